#pragma once

#include "maxgrent/linprog.hpp"
#include "maxgrent/model.hpp"

namespace maxgrent {

/// Multipliers of the dual problem: lambda per equality (free sign), zeta per
/// inequality (>= 0). `value` is the dual optimum lambda.b + zeta.d, which
/// equals the primal maximum by strong duality. `e_residual` measures how far
/// sum_i mu_i e^{-z_i} is from 1 (active at the optimum).
struct DualSolution {
    VectorXd lambda;
    VectorXd zeta;
    double value = 0.0;
    double e_residual = 0.0;
};

struct Solution {
    VectorXd x_star;
    VectorXd chi_star;
    double s_star = 0.0;
    double g_star = 0.0;
    DualSolution duals;
    CountVector nu_star;
    long long n_star = 0;
    std::set<int> removed_zeros;
    std::vector<std::string> warnings;
};

/// Maximize the relative-entropy objective via the dual: barrier continuation
/// plus damped Newton, then an active-set polish. Forced zeros must have been
/// removed by the caller (solve() does this). `init_hint`, when given and
/// strictly feasible, replaces the standard starting point (used to probe
/// uniqueness of the recovered maximizer).
DualSolution solve_dual(const ProblemSpec& spec, const VectorXd* init_hint = nullptr);

/// Recover chi*, s*, x* and the rounded count vector from optimal duals.
/// Throws NonUniqueMaximizer when the optimum is 0 with a density prior.
Solution recover_primal(const DualSolution& duals, const ProblemSpec& spec);

/// forced_zeros -> solve_dual -> recover_primal, with removed coordinates
/// re-inserted as exact zeros. Asserts the optimality contracts.
Solution solve(const ProblemSpec& spec);

/// Elementwise nearest integer, ties away from zero.
CountVector round_to_counts(const VectorXd& x_star);

/// Max violation among: equality residual, inequality excess, the fixed-point
/// identity x_j = mu_j (sum x) e^{-z_j}, and complementary slackness.
double kkt_residual(const VectorXd& candidate, const DualSolution& duals,
                    const ProblemSpec& spec);

struct MinidivSolution {
    VectorXd u_star;
    DualSolution duals;  // (rho, sigma); value = divergence at the optimum
    CountVector nu_hat;
    double sum = 0.0;
    double divergence = 0.0;
    std::set<int> removed_zeros;
};

/// Minimize the I-divergence from the prior under the same constraints.
MinidivSolution solve_minidiv(const ProblemSpec& spec);

/// Prior that makes the I-divergence minimizer coincide with x*.
ProblemSpec prior_transfer_to_minidiv(const Solution& sol, const ProblemSpec& spec);

/// Prior (plus an appended sum equality) that makes the entropy maximizer
/// coincide with u*.
ProblemSpec prior_transfer_to_maxgrent(const MinidivSolution& sol, const ProblemSpec& spec);

/// |lambda|.btilde + zeta.dtilde: growth rate of the optimum under widening.
double g_tilde(const DualSolution& duals, const ProblemSpec& spec);

/// G* + delta*Gtilde, an upper bound for the maximum over C(delta).
double perturbed_max_bound(const Solution& sol, double delta, const VectorXd& b_tilde,
                           const VectorXd& d_tilde);

}  // namespace maxgrent
