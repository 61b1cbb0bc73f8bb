#include "maxgrent/linprog.hpp"

#include <limits>

namespace maxgrent {

namespace detail {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kPhase1Tol = 1e-7;

// Dense tableau with Bland's rule (anti-cycling, deterministic vertices).
// Objective row stores z_j - c_j; optimal for a minimization when all <= tol.
class Tableau {
  public:
    Tableau(const MatrixXd& rows, const VectorXd& rhs, int n_real)
        : n_rows_(static_cast<int>(rows.rows())), n_real_(n_real) {
        n_cols_ = n_real_ + n_rows_;  // + one artificial per row
        T_ = MatrixXd::Zero(n_rows_ + 1, n_cols_ + 1);
        basis_.resize(n_rows_);
        for (int i = 0; i < n_rows_; ++i) {
            double sign = rhs[i] < 0.0 ? -1.0 : 1.0;
            T_.block(i, 0, 1, n_real_) = sign * rows.row(i);
            T_(i, n_real_ + i) = 1.0;
            T_(i, n_cols_) = sign * rhs[i];
            basis_[i] = n_real_ + i;
        }
        // Phase-1 objective: minimize the artificial sum.
        for (int j = 0; j <= n_cols_; ++j) {
            if (j >= n_real_ && j < n_cols_) continue;
            double s = 0.0;
            for (int i = 0; i < n_rows_; ++i) s += T_(i, j);
            T_(n_rows_, j) = s;
        }
    }

    LpStatus run(bool allow_artificials) {
        for (long pivots = 0; pivots < 100000; ++pivots) {
            int enter = -1;
            int limit = allow_artificials ? n_cols_ : n_real_;
            for (int j = 0; j < limit; ++j) {
                if (T_(n_rows_, j) > kCostTol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return LpStatus::Optimal;
            int leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n_rows_; ++i) {
                if (T_(i, enter) > kPivotTol) {
                    double ratio = T_(i, n_cols_) / T_(i, enter);
                    if (ratio < best - 1e-12 ||
                        (ratio < best + 1e-12 && (leave < 0 || basis_[i] < basis_[leave]))) {
                        best = ratio;
                        leave = i;
                    }
                }
            }
            if (leave < 0) return LpStatus::Unbounded;
            pivot(leave, enter);
        }
        throw SolveError("simplex exceeded its pivot limit");
    }

    void pivot(int r, int c) {
        T_.row(r) /= T_(r, c);
        for (int i = 0; i <= n_rows_; ++i) {
            if (i == r) continue;
            double f = T_(i, c);
            if (f != 0.0) T_.row(i) -= f * T_.row(r);
        }
        basis_[r] = c;
    }

    double phase1_value() const { return T_(n_rows_, n_cols_); }

    // After phase 1: pivot artificials out of the basis or drop their rows.
    void eliminate_artificials(std::vector<int>& dropped_rows) {
        for (int i = 0; i < n_rows_; ++i) {
            if (basis_[i] < n_real_) continue;
            int col = -1;
            for (int j = 0; j < n_real_; ++j)
                if (std::abs(T_(i, j)) > kPivotTol) {
                    col = j;
                    break;
                }
            if (col >= 0)
                pivot(i, col);
            else
                dropped_rows.push_back(i);  // redundant row
        }
    }

    void set_costs(const VectorXd& cost, const std::vector<int>& dropped_rows) {
        T_.row(n_rows_).setZero();
        for (int j = 0; j < n_real_; ++j) T_(n_rows_, j) = -cost[j];
        for (int i = 0; i < n_rows_; ++i) {
            if (std::find(dropped_rows.begin(), dropped_rows.end(), i) != dropped_rows.end())
                continue;
            int b = basis_[i];
            double cb = b < n_real_ ? cost[b] : 0.0;
            if (cb != 0.0) T_.row(n_rows_) += cb * T_.row(i);
        }
        // Block artificial columns from re-entering.
        for (int j = n_real_; j < n_cols_; ++j) T_(n_rows_, j) = -1.0;
        // Neutralize dropped (redundant) rows.
        for (int i : dropped_rows) {
            T_.row(i).setZero();
            T_(i, n_real_ + i) = 1.0;
            basis_[i] = n_real_ + i;
        }
    }

    VectorXd solution(int n_vars) const {
        VectorXd x = VectorXd::Zero(n_vars);
        for (int i = 0; i < n_rows_; ++i)
            if (basis_[i] < n_vars) x[basis_[i]] = T_(i, n_cols_);
        return x;
    }

  private:
    int n_rows_, n_real_, n_cols_;
    MatrixXd T_;
    std::vector<int> basis_;
};

}  // namespace

SimplexOutcome simplex(const MatrixXd& Aeq, const VectorXd& beq, const MatrixXd& Cle,
                       const VectorXd& dle, const VectorXd& cost) {
    const int m = static_cast<int>(cost.size());
    const int n_eq = static_cast<int>(Aeq.rows());
    const int n_le = static_cast<int>(Cle.rows());
    const int n_real = m + n_le;

    MatrixXd rows = MatrixXd::Zero(n_eq + n_le, n_real);
    VectorXd rhs(n_eq + n_le);
    if (n_eq > 0) {
        rows.block(0, 0, n_eq, m) = Aeq;
        rhs.head(n_eq) = beq;
    }
    for (int i = 0; i < n_le; ++i) {
        rows.block(n_eq + i, 0, 1, m) = Cle.row(i);
        rows(n_eq + i, m + i) = 1.0;  // slack
        rhs[n_eq + i] = dle[i];
    }

    VectorXd full_cost = VectorXd::Zero(n_real);
    full_cost.head(m) = cost;

    SimplexOutcome out;
    if (rows.rows() == 0) {
        // No constraints: x = 0 unless some cost coefficient is negative.
        for (int j = 0; j < m; ++j)
            if (cost[j] < -kCostTol) {
                out.status = LpStatus::Unbounded;
                return out;
            }
        out.status = LpStatus::Optimal;
        out.value = 0.0;
        out.x = VectorXd::Zero(m);
        return out;
    }

    Tableau tab(rows, rhs, n_real);
    if (tab.run(true) != LpStatus::Optimal || tab.phase1_value() > kPhase1Tol) {
        out.status = LpStatus::Infeasible;
        return out;
    }
    std::vector<int> dropped;
    tab.eliminate_artificials(dropped);
    tab.set_costs(full_cost, dropped);
    LpStatus st = tab.run(false);
    if (st != LpStatus::Optimal) {
        out.status = st;
        return out;
    }
    VectorXd xfull = tab.solution(n_real);
    out.status = LpStatus::Optimal;
    out.x = xfull.head(m);
    out.value = cost.dot(out.x);
    return out;
}

}  // namespace detail

namespace {

detail::SimplexOutcome run_lp(const VectorXd& objective, const ProblemSpec& spec, double delta,
                              LpDirection dir) {
    VectorXd cost = dir == LpDirection::Min ? objective : VectorXd(-objective);
    detail::SimplexOutcome out;
    if (delta == 0.0) {
        out = detail::simplex(spec.eq_matrix(), spec.eq_rhs(), spec.ineq_matrix(),
                              spec.ineq_rhs(), cost);
    } else {
        auto [bt, dt] = error_vectors(spec);
        MatrixXd A = spec.eq_matrix();
        VectorXd b = spec.eq_rhs();
        MatrixXd C = spec.ineq_matrix();
        VectorXd d = spec.ineq_rhs();
        int ne = static_cast<int>(A.rows()), ni = static_cast<int>(C.rows());
        MatrixXd Cw(2 * ne + ni, spec.dim());
        VectorXd dw(2 * ne + ni);
        for (int i = 0; i < ne; ++i) {
            Cw.row(2 * i) = A.row(i);
            dw[2 * i] = b[i] + delta * bt[i];
            Cw.row(2 * i + 1) = -A.row(i);
            dw[2 * i + 1] = -(b[i] - delta * bt[i]);
        }
        for (int i = 0; i < ni; ++i) {
            Cw.row(2 * ne + i) = C.row(i);
            dw[2 * ne + i] = d[i] + delta * dt[i];
        }
        out = detail::simplex(MatrixXd(0, spec.dim()), VectorXd(0), Cw, dw, cost);
    }
    if (out.status == detail::LpStatus::Optimal && dir == LpDirection::Max) out.value = -out.value;
    return out;
}

LpResult require_optimal(const detail::SimplexOutcome& out) {
    if (out.status == detail::LpStatus::Infeasible) throw SolveError("infeasible constraints");
    if (out.status == detail::LpStatus::Unbounded) throw SolveError("unbounded objective");
    return {out.value, out.x};
}

}  // namespace

LpResult lp_optimize(const VectorXd& objective, const ProblemSpec& spec, LpDirection dir) {
    return require_optimal(run_lp(objective, spec, 0.0, dir));
}

LpResult lp_optimize_region(const VectorXd& objective, const ProblemSpec& spec, double delta,
                            LpDirection dir) {
    return require_optimal(run_lp(objective, spec, delta, dir));
}

SumRange sum_range(const ProblemSpec& spec) {
    const int m = spec.dim();
    VectorXd ones = VectorXd::Ones(m);
    auto lo = run_lp(ones, spec, 0.0, LpDirection::Min);
    if (lo.status == detail::LpStatus::Infeasible) throw SolveError("infeasible constraints");
    auto hi = run_lp(ones, spec, 0.0, LpDirection::Max);
    if (hi.status == detail::LpStatus::Unbounded)
        throw SolveError("sum of variables is unbounded over the feasible region");
    SumRange out;
    out.s1 = lo.value;
    out.s2 = hi.value;
    long long half_m = (m + 1) / 2;  // ceil(m/2), rounded outward
    out.n1 = std::max(0ll, ceil_tol(out.s1) - half_m);
    out.n2 = ceil_tol(out.s2) + half_m;
    return out;
}

double rho_inf(const ProblemSpec& spec) {
    auto [bt, dt] = error_vectors(spec);
    auto row_l1_max = [](const MatrixXd& M) {
        double best = 0.0;
        for (int i = 0; i < M.rows(); ++i) best = std::max(best, M.row(i).lpNorm<1>());
        return best;
    };
    double out = std::numeric_limits<double>::infinity();
    if (!spec.equalities.empty()) out = std::min(out, bt.minCoeff() / row_l1_max(spec.eq_matrix()));
    if (!spec.inequalities.empty())
        out = std::min(out, dt.minCoeff() / row_l1_max(spec.ineq_matrix()));
    return out;
}

std::set<int> forced_zeros(const ProblemSpec& spec) {
    std::set<int> out;
    const int m = spec.dim();
    for (int j = 0; j < m; ++j) {
        VectorXd obj = VectorXd::Zero(m);
        obj[j] = 1.0;
        auto res = run_lp(obj, spec, 0.0, LpDirection::Max);
        if (res.status == detail::LpStatus::Infeasible) throw SolveError("infeasible constraints");
        if (res.status == detail::LpStatus::Optimal && res.value <= 1e-9) out.insert(j);
    }
    return out;
}

bool feasible(const ProblemSpec& spec) {
    auto out = run_lp(VectorXd::Zero(spec.dim()), spec, 0.0, LpDirection::Min);
    return out.status == detail::LpStatus::Optimal;
}

std::vector<double> variable_upper_bounds(const ProblemSpec& spec, double delta) {
    const int m = spec.dim();
    std::vector<double> ubs(m);
    for (int j = 0; j < m; ++j) {
        VectorXd obj = VectorXd::Zero(m);
        obj[j] = 1.0;
        auto res = run_lp(obj, spec, delta, LpDirection::Max);
        if (res.status == detail::LpStatus::Infeasible) throw SolveError("infeasible constraints");
        ubs[j] = res.status == detail::LpStatus::Unbounded
                     ? std::numeric_limits<double>::infinity()
                     : res.value;
    }
    return ubs;
}

}  // namespace maxgrent
