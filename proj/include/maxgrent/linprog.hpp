#pragma once

#include <set>

#include "maxgrent/model.hpp"

namespace maxgrent {

enum class LpDirection { Min, Max };

struct LpResult {
    double value = 0.0;
    VectorXd point;
};

/// Optimize a linear objective over C(0). Deterministic (Bland's rule).
/// Throws SolveError on infeasible or unbounded problems.
LpResult lp_optimize(const VectorXd& objective, const ProblemSpec& spec, LpDirection dir);

/// Same over the widened region C(delta).
LpResult lp_optimize_region(const VectorXd& objective, const ProblemSpec& spec, double delta,
                            LpDirection dir);

/// [s1, s2] bounds on the sum over C(0), and the integer window [n1, n2]
/// derived by pushing each bound out by ceil(m/2).
struct SumRange {
    double s1 = 0.0;
    double s2 = 0.0;
    long long n1 = 0;
    long long n2 = 0;
};
SumRange sum_range(const ProblemSpec& spec);

/// min(btilde_min/||A||_inf, dtilde_min/||C||_inf) with row-l1 matrix norms;
/// +infinity when there are no constraints.
double rho_inf(const ProblemSpec& spec);

/// Indices forced to zero over all of C(0) (LP max of each coordinate <= 1e-9).
std::set<int> forced_zeros(const ProblemSpec& spec);

/// Whether C(0) is nonempty.
bool feasible(const ProblemSpec& spec);

/// Per-variable upper bounds over C(delta), used to prune lattice enumeration.
std::vector<double> variable_upper_bounds(const ProblemSpec& spec, double delta);

namespace detail {

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct SimplexOutcome {
    LpStatus status = LpStatus::Infeasible;
    double value = 0.0;
    VectorXd x;
};

/// minimize cost.x  s.t.  Aeq x = beq, Cle x <= dle, x >= 0
SimplexOutcome simplex(const MatrixXd& Aeq, const VectorXd& beq, const MatrixXd& Cle,
                       const VectorXd& dle, const VectorXd& cost);

}  // namespace detail

}  // namespace maxgrent
