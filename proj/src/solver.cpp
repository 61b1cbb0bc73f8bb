#include "maxgrent/solver.hpp"

#include <algorithm>
#include <limits>

#include "maxgrent/entropy.hpp"

namespace maxgrent {

namespace {

constexpr double kInitXi = 1e-3;

struct DualWork {
    MatrixXd J;     // (l_eq + l_in) x m, rows [A; C]
    VectorXd clin;  // (b; d)
    VectorXd mu;
    int l_eq = 0, l_in = 0, m = 0;

    static DualWork make(const ProblemSpec& spec) {
        DualWork w;
        w.m = spec.dim();
        w.l_eq = static_cast<int>(spec.equalities.size());
        w.l_in = static_cast<int>(spec.inequalities.size());
        w.J.resize(w.l_eq + w.l_in, w.m);
        w.clin.resize(w.l_eq + w.l_in);
        if (w.l_eq > 0) {
            w.J.topRows(w.l_eq) = spec.eq_matrix();
            w.clin.head(w.l_eq) = spec.eq_rhs();
        }
        if (w.l_in > 0) {
            w.J.bottomRows(w.l_in) = spec.ineq_matrix();
            w.clin.tail(w.l_in) = spec.ineq_rhs();
        }
        w.mu = spec.prior.values;
        return w;
    }

    VectorXd weights(const VectorXd& theta) const {
        VectorXd z = J.transpose() * theta;
        VectorXd out(m);
        for (int i = 0; i < m; ++i) out[i] = z[i] > 700.0 ? 0.0 : mu[i] * std::exp(-z[i]);
        return out;
    }
};

double barrier_objective(const DualWork& w, const VectorXd& theta, double t, VectorXd* wout) {
    VectorXd wv = w.weights(theta);
    double g = 1.0 - wv.sum();
    if (!(g > 0.0)) return std::numeric_limits<double>::infinity();
    double f = w.clin.dot(theta) - t * std::log(g);
    for (int k = 0; k < w.l_in; ++k) {
        double xi = theta[w.l_eq + k];
        if (!(xi > 0.0)) return std::numeric_limits<double>::infinity();
        f -= t * std::log(xi);
    }
    if (wout) *wout = wv;
    return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
}

// One barrier stage: damped Newton on f_t until the decrement stalls.
void newton_stage(const DualWork& w, VectorXd& theta, double t, int max_iter) {
    for (int it = 0; it < max_iter; ++it) {
        VectorXd wv;
        double f = barrier_objective(w, theta, t, &wv);
        if (!std::isfinite(f)) throw SolveError("dual solve left the feasible region");
        double g = 1.0 - wv.sum();
        double u = t / g;
        VectorXd Jw = w.J * wv;
        VectorXd grad = w.clin - u * Jw;
        MatrixXd H = u * (w.J * wv.asDiagonal() * w.J.transpose()) +
                     (u * u / t) * (Jw * Jw.transpose());
        for (int k = 0; k < w.l_in; ++k) {
            double xi = theta[w.l_eq + k];
            grad[w.l_eq + k] -= t / xi;
            H(w.l_eq + k, w.l_eq + k) += t / (xi * xi);
        }
        H.diagonal().array() += 1e-13 * (1.0 + H.diagonal().maxCoeff());
        VectorXd step = H.ldlt().solve(-grad);
        double dec = -0.5 * grad.dot(step);
        if (!(dec > 1e-16 * (1.0 + std::abs(f)))) return;
        double alpha = 1.0;
        double slope = grad.dot(step);
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            VectorXd cand = theta + alpha * step;
            double fc = barrier_objective(w, cand, t, nullptr);
            if (std::isfinite(fc) && fc <= f + 0.25 * alpha * slope) {
                theta = cand;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) return;
    }
}

// Strictly feasible start: scale up a direction theta* with J^T theta* >= tau.
VectorXd initial_point(const DualWork& w) {
    const int l = w.l_eq + w.l_in;
    const double r = w.mu.sum();

    // LP: maximize tau subject to J^T theta >= tau*1, xi >= 0, tau <= 1.
    // Variables: lambda+ (l_eq), lambda- (l_eq), xi (l_in), tau+, tau-.
    const int nv = 2 * w.l_eq + w.l_in + 2;
    MatrixXd C(w.m + 1, nv);
    VectorXd d(w.m + 1);
    for (int i = 0; i < w.m; ++i) {
        for (int e = 0; e < w.l_eq; ++e) {
            C(i, e) = -w.J(e, i);
            C(i, w.l_eq + e) = w.J(e, i);
        }
        for (int k = 0; k < w.l_in; ++k) C(i, 2 * w.l_eq + k) = -w.J(w.l_eq + k, i);
        C(i, nv - 2) = 1.0;
        C(i, nv - 1) = -1.0;
        d[i] = 0.0;
    }
    C.row(w.m).setZero();
    C(w.m, nv - 2) = 1.0;
    C(w.m, nv - 1) = -1.0;
    d[w.m] = 1.0;
    VectorXd cost = VectorXd::Zero(nv);
    cost[nv - 2] = -1.0;
    cost[nv - 1] = 1.0;
    auto lp = detail::simplex(MatrixXd(0, nv), VectorXd(0), C, d, cost);
    double tau = lp.status == detail::LpStatus::Optimal ? -lp.value : 0.0;

    VectorXd theta = VectorXd::Zero(l);
    if (tau > 1e-8) {
        VectorXd dir(l);
        for (int e = 0; e < w.l_eq; ++e) dir[e] = lp.x[e] - lp.x[w.l_eq + e];
        for (int k = 0; k < w.l_in; ++k) dir[w.l_eq + k] = lp.x[2 * w.l_eq + k];
        double target = std::log(2.0 * std::max(r, 1.0)) + 1.0;
        theta = (target / tau) * dir;
        for (int k = 0; k < w.l_in; ++k)
            theta[w.l_eq + k] = std::max(theta[w.l_eq + k], kInitXi);
        for (int tries = 0; tries < 200 && w.weights(theta).sum() >= 0.95; ++tries)
            theta += (target / tau) * dir;
        if (w.weights(theta).sum() < 0.95) return theta;
    }

    // Fallback: descend the log of the constraint sum directly.
    theta = VectorXd::Zero(l);
    for (int k = 0; k < w.l_in; ++k) theta[w.l_eq + k] = kInitXi;
    const double tiny = 1e-6;
    for (int it = 0; it < 300; ++it) {
        VectorXd wv = w.weights(theta);
        double h = wv.sum();
        if (h < 1.0 - 1e-7) return theta;
        VectorXd Jw = w.J * wv;
        VectorXd grad = -Jw / h;
        MatrixXd H = (w.J * wv.asDiagonal() * w.J.transpose()) / h -
                     (Jw * Jw.transpose()) / (h * h);
        for (int k = 0; k < w.l_in; ++k) {
            double xi = theta[w.l_eq + k];
            grad[w.l_eq + k] -= tiny / xi;
            H(w.l_eq + k, w.l_eq + k) += tiny / (xi * xi);
        }
        H.diagonal().array() += 1e-10 * (1.0 + H.diagonal().maxCoeff());
        VectorXd step = H.ldlt().solve(-grad);
        if (step.lpNorm<Eigen::Infinity>() < 1e-14) break;
        double alpha = 1.0;
        double f0 = std::log(h);
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            VectorXd cand = theta + alpha * step;
            bool ok = true;
            for (int k = 0; k < w.l_in; ++k)
                if (!(cand[w.l_eq + k] > 0.0)) ok = false;
            if (ok) {
                double hc = w.weights(cand).sum();
                if (hc > 0.0 && std::log(hc) < f0 + 1e-4 * alpha * grad.dot(step)) {
                    theta = cand;
                    moved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if (!moved) break;
    }
    if (w.weights(theta).sum() < 1.0 - 1e-7) return theta;
    if (w.mu.sum() <= 1.0 + 1e-9) {
        // Density prior whose dual feasible set has no interior: the optimum
        // is 0 at zero multipliers.
        return VectorXd::Zero(l);
    }
    throw SolveError("sum of variables is unbounded over the feasible region");
}

// Newton refinement on the active-set optimality system. Returns false when
// the guessed active set is inconsistent.
bool polish(const DualWork& w, const std::vector<int>& active, VectorXd& theta, double& s) {
    const int ke = w.l_eq;
    const int ka = static_cast<int>(active.size());
    const int kt = ke + ka;

    MatrixXd Jr(kt, w.m);
    VectorXd rr(kt);
    if (ke > 0) {
        Jr.topRows(ke) = w.J.topRows(ke);
        rr.head(ke) = w.clin.head(ke);
    }
    for (int a = 0; a < ka; ++a) {
        Jr.row(ke + a) = w.J.row(w.l_eq + active[a]);
        rr[ke + a] = w.clin[w.l_eq + active[a]];
    }

    VectorXd y(kt + 1);
    if (ke > 0) y.head(ke) = theta.head(ke);
    for (int a = 0; a < ka; ++a) y[ke + a] = theta[w.l_eq + active[a]];
    y[kt] = s;

    auto reduced_weights = [&](const VectorXd& yv) {
        VectorXd th = VectorXd::Zero(w.l_eq + w.l_in);
        if (ke > 0) th.head(ke) = yv.head(ke);
        for (int a = 0; a < ka; ++a) th[w.l_eq + active[a]] = yv[ke + a];
        return w.weights(th);
    };
    auto residual = [&](const VectorXd& yv) {
        VectorXd wv = reduced_weights(yv);
        VectorXd F(kt + 1);
        F[0] = wv.sum() - 1.0;
        F.tail(kt) = yv[kt] * (Jr * wv) - rr;
        return std::make_pair(F, wv);
    };

    auto [F, wv] = residual(y);
    double scale = std::max(1.0, rr.lpNorm<Eigen::Infinity>());
    for (int it = 0; it < 60; ++it) {
        if (F.lpNorm<Eigen::Infinity>() <= 1e-12 * scale) break;
        MatrixXd Jac(kt + 1, kt + 1);
        VectorXd Jrw = Jr * wv;
        Jac.row(0).head(kt) = -Jrw.transpose();
        Jac(0, kt) = 0.0;
        Jac.block(1, 0, kt, kt) = -y[kt] * (Jr * wv.asDiagonal() * Jr.transpose());
        Jac.block(1, kt, kt, 1) = Jrw;
        VectorXd step = Jac.completeOrthogonalDecomposition().solve(-F);
        double alpha = 1.0;
        double phi0 = F.squaredNorm();
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            VectorXd cand = y + alpha * step;
            auto [Fc, wc] = residual(cand);
            if (Fc.allFinite() && Fc.squaredNorm() < phi0 * (1.0 - 1e-4 * alpha)) {
                y = cand;
                F = Fc;
                wv = wc;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) break;
    }
    if (F.lpNorm<Eigen::Infinity>() > 1e-9 * scale) return false;
    if (!(y[kt] > 0.0)) return false;
    for (int a = 0; a < ka; ++a)
        if (y[ke + a] < -1e-9) return false;

    // Inactive rows must still be satisfied by the polished primal point.
    VectorXd x = y[kt] * wv;
    for (int k = 0; k < w.l_in; ++k) {
        if (std::find(active.begin(), active.end(), k) != active.end()) continue;
        double slack = w.clin[w.l_eq + k] - w.J.row(w.l_eq + k).dot(x);
        if (slack < -1e-7 * scale) return false;
    }

    VectorXd out = VectorXd::Zero(w.l_eq + w.l_in);
    if (ke > 0) out.head(ke) = y.head(ke);
    for (int a = 0; a < ka; ++a) out[w.l_eq + active[a]] = std::max(0.0, y[ke + a]);
    theta = out;
    s = y[kt];
    return true;
}

DualSolution assemble(const DualWork& w, const VectorXd& theta) {
    DualSolution out;
    out.lambda = theta.head(w.l_eq);
    out.zeta = theta.tail(w.l_in);
    out.value = w.clin.dot(theta);
    out.e_residual = std::abs(w.weights(theta).sum() - 1.0);
    return out;
}

struct ReducedSpec {
    ProblemSpec spec;
    std::vector<int> kept_vars;
    std::vector<int> kept_eq;
    std::vector<int> kept_ineq;
};

ReducedSpec remove_variables(const ProblemSpec& spec, const std::set<int>& zeros) {
    ReducedSpec out;
    const int m = spec.dim();
    std::vector<int> new_index(m, -1);
    for (int j = 0; j < m; ++j) {
        if (!zeros.count(j)) {
            new_index[j] = static_cast<int>(out.kept_vars.size());
            out.kept_vars.push_back(j);
        }
    }
    if (out.kept_vars.size() < 2)
        throw SolveError("fewer than 2 free variables remain after removing forced zeros");

    ProblemSpec red;
    for (int j : out.kept_vars) red.variable_names.push_back(spec.variable_names[j]);
    VectorXd pv(static_cast<int>(out.kept_vars.size()));
    for (std::size_t i = 0; i < out.kept_vars.size(); ++i) pv[i] = spec.prior.values[out.kept_vars[i]];
    red.prior = Prior::make(pv, spec.prior.kind == PriorKind::Density ? PriorKind::General
                                                                      : spec.prior.kind);
    red.tolerance = spec.tolerance;

    auto reduce_rows = [&](const std::vector<LinearConstraint>& rows, Sense sense,
                           std::vector<int>& kept) {
        std::vector<LinearConstraint> out_rows;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            LinearConstraint r;
            r.sense = sense;
            r.rhs = rows[i].rhs;
            r.exact_rhs = rows[i].exact_rhs;
            for (const auto& [j, c] : rows[i].coeffs) {
                if (new_index[j] >= 0 && c != 0.0) {
                    r.coeffs[new_index[j]] = c;
                    r.exact_coeffs[new_index[j]] = rows[i].exact_coeffs.at(j);
                }
            }
            if (r.coeffs.empty()) {
                bool ok = sense == Sense::Eq ? std::abs(r.rhs) <= 1e-7 : r.rhs >= -1e-7;
                if (!ok) throw SolveError("infeasible constraints");
                continue;
            }
            kept.push_back(static_cast<int>(i));
            out_rows.push_back(std::move(r));
        }
        return out_rows;
    };
    red.equalities = reduce_rows(spec.equalities, Sense::Eq, out.kept_eq);
    red.inequalities = reduce_rows(spec.inequalities, Sense::Le, out.kept_ineq);
    out.spec = std::move(red);
    return out;
}

}  // namespace

DualSolution solve_dual(const ProblemSpec& spec, const VectorXd* init_hint) {
    const DualWork w = DualWork::make(spec);
    const int l = w.l_eq + w.l_in;
    const double r = w.mu.sum();

    if (l == 0) {
        if (r > 1.0 + 1e-12)
            throw SolveError("sum of variables is unbounded over the feasible region");
        DualSolution out;
        out.lambda = VectorXd(0);
        out.zeta = VectorXd(0);
        out.value = 0.0;
        out.e_residual = std::abs(r - 1.0);
        return out;
    }
    if (!feasible(spec)) throw SolveError("infeasible constraints");

    VectorXd theta;
    bool hint_ok = false;
    if (init_hint && init_hint->size() == l) {
        bool positive = true;
        for (int k = 0; k < w.l_in; ++k)
            if (!((*init_hint)[w.l_eq + k] > 0.0)) positive = false;
        if (positive && w.weights(*init_hint).sum() < 1.0 - 1e-9) {
            theta = *init_hint;
            hint_ok = true;
        }
    }
    if (!hint_ok) theta = initial_point(w);
    if (w.weights(theta).sum() >= 1.0 - 1e-9) {
        // No strict interior: degenerate density case, optimum 0 at zero duals.
        return assemble(w, VectorXd::Zero(l));
    }

    for (double t : {1.0, 1e-2, 1e-4, 1e-6, 1e-8, 1e-10}) newton_stage(w, theta, t, 500);

    // Active set from the final barrier iterate.
    VectorXd wv = w.weights(theta);
    double g = 1.0 - wv.sum();
    double s_est = g > 0.0 ? 1e-10 / g : 1.0;
    VectorXd x_est = s_est * wv;
    std::vector<int> active;
    for (int k = 0; k < w.l_in; ++k) {
        double slack = w.clin[w.l_eq + k] - w.J.row(w.l_eq + k).dot(x_est);
        if (theta[w.l_eq + k] > slack) active.push_back(k);
    }
    VectorXd polished = theta;
    double s = s_est;
    if (polish(w, active, polished, s)) theta = polished;

    return assemble(w, theta);
}

Solution recover_primal(const DualSolution& duals, const ProblemSpec& spec) {
    const int m = spec.dim();
    VectorXd z = VectorXd::Zero(m);
    if (duals.lambda.size() > 0) z += spec.eq_matrix().transpose() * duals.lambda;
    if (duals.zeta.size() > 0) z += spec.ineq_matrix().transpose() * duals.zeta;

    VectorXd chi(m);
    for (int i = 0; i < m; ++i) chi[i] = spec.prior.values[i] * std::exp(-z[i]);
    double total = chi.sum();
    chi /= total;

    const double r = spec.prior.r;
    VectorXd psi = spec.prior.values / r;
    double div = 0.0;
    for (int i = 0; i < m; ++i) div += chi[i] * std::log(chi[i] / psi[i]);
    double denom = std::log(r) - div;
    if (std::abs(denom) < 1e-10) throw NonUniqueMaximizer(chi);

    Solution sol;
    sol.g_star = duals.value;
    sol.s_star = duals.value / denom;
    if (!(sol.s_star > 0.0)) throw SolveError("primal recovery produced a nonpositive sum");
    sol.chi_star = chi;
    sol.x_star = sol.s_star * chi;
    sol.duals = duals;
    sol.nu_star = round_to_counts(sol.x_star);
    sol.n_star = sol.nu_star.n;
    return sol;
}

CountVector round_to_counts(const VectorXd& x_star) {
    std::vector<long long> entries(x_star.size());
    for (int i = 0; i < x_star.size(); ++i)
        entries[i] = static_cast<long long>(std::floor(x_star[i] + 0.5));
    return CountVector::of(std::move(entries));
}

double kkt_residual(const VectorXd& x, const DualSolution& duals, const ProblemSpec& spec) {
    if (x.size() != spec.dim()) throw SpecError("dimension mismatch");
    double res = 0.0;
    VectorXd z = VectorXd::Zero(spec.dim());
    if (duals.lambda.size() > 0) {
        MatrixXd A = spec.eq_matrix();
        res = std::max(res, (A * x - spec.eq_rhs()).lpNorm<Eigen::Infinity>());
        z += A.transpose() * duals.lambda;
    }
    if (duals.zeta.size() > 0) {
        MatrixXd C = spec.ineq_matrix();
        VectorXd excess = C * x - spec.ineq_rhs();
        for (int k = 0; k < excess.size(); ++k) {
            res = std::max(res, std::max(0.0, excess[k]));
            res = std::max(res, std::abs(duals.zeta[k] * excess[k]));
        }
        z += C.transpose() * duals.zeta;
    }
    double s = x.sum();
    for (int j = 0; j < x.size(); ++j)
        res = std::max(res, std::abs(x[j] - spec.prior.values[j] * s * std::exp(-z[j])));
    return res;
}

Solution solve(const ProblemSpec& spec) {
    std::set<int> zeros = forced_zeros(spec);

    Solution sol;
    if (zeros.empty()) {
        DualSolution duals = solve_dual(spec);
        sol = recover_primal(duals, spec);
        double kkt = kkt_residual(sol.x_star, sol.duals, spec);
        if (kkt > 1e-7)
            throw SolveError("solver did not reach the optimality tolerance (residual " +
                             std::to_string(kkt) + ")");
    } else {
        ReducedSpec red = remove_variables(spec, zeros);
        DualSolution duals_red = solve_dual(red.spec);
        Solution inner = recover_primal(duals_red, red.spec);
        double kkt = kkt_residual(inner.x_star, inner.duals, red.spec);
        if (kkt > 1e-7)
            throw SolveError("solver did not reach the optimality tolerance (residual " +
                             std::to_string(kkt) + ")");

        sol.g_star = inner.g_star;
        sol.s_star = inner.s_star;
        sol.x_star = VectorXd::Zero(spec.dim());
        sol.chi_star = VectorXd::Zero(spec.dim());
        std::vector<long long> entries(spec.dim(), 0);
        for (std::size_t i = 0; i < red.kept_vars.size(); ++i) {
            sol.x_star[red.kept_vars[i]] = inner.x_star[static_cast<int>(i)];
            sol.chi_star[red.kept_vars[i]] = inner.chi_star[static_cast<int>(i)];
            entries[red.kept_vars[i]] = inner.nu_star.entries[i];
        }
        sol.nu_star = CountVector::of(std::move(entries));
        sol.n_star = sol.nu_star.n;
        sol.duals.lambda = VectorXd::Zero(static_cast<int>(spec.equalities.size()));
        sol.duals.zeta = VectorXd::Zero(static_cast<int>(spec.inequalities.size()));
        for (std::size_t i = 0; i < red.kept_eq.size(); ++i)
            sol.duals.lambda[red.kept_eq[i]] = duals_red.lambda[static_cast<int>(i)];
        for (std::size_t i = 0; i < red.kept_ineq.size(); ++i)
            sol.duals.zeta[red.kept_ineq[i]] = duals_red.zeta[static_cast<int>(i)];
        sol.duals.value = duals_red.value;
        sol.duals.e_residual = duals_red.e_residual;
        sol.removed_zeros = zeros;
    }

    // Optimality contracts.
    double g_direct = g_rel_entropy(sol.x_star, spec.prior.values);
    if (std::abs(g_direct - sol.g_star) > 1e-7 * (1.0 + std::abs(sol.g_star)))
        throw SolveError("duality gap above tolerance");
    if (sol.duals.e_residual > 1e-8)
        throw SolveError("dual constraint not active at the reported optimum");
    const int m = spec.dim();
    if (std::abs(double(sol.n_star) - sol.s_star) > m / 2.0 + 1e-9 ||
        (sol.nu_star.as_vector() - sol.x_star).lpNorm<Eigen::Infinity>() > 0.5 + 1e-9 ||
        (sol.nu_star.as_vector() - sol.x_star).lpNorm<1>() > m / 2.0 + 1e-9)
        throw SolveError("rounded count vector violates its distance guarantees");
    if (sol.n_star > 0) {
        VectorXd freq = sol.nu_star.as_vector() / double(sol.n_star);
        if ((freq - sol.chi_star).lpNorm<1>() > double(m) / double(sol.n_star) + 1e-9)
            throw SolveError("rounded frequency vector violates its distance guarantee");
    }

    for (int i = 0; i < sol.x_star.size(); ++i) {
        if (!sol.removed_zeros.count(i) && sol.x_star[i] <= 0.5) {
            sol.warnings.push_back("x*[" + spec.variable_names[i] +
                                   "] <= 1/2; concentration constants are undefined");
        }
    }
    return sol;
}

namespace {

// Barrier Newton for the I-divergence dual (no membership constraint).
VectorXd minidiv_dual(const DualWork& w) {
    const int l = w.l_eq + w.l_in;
    VectorXd theta = VectorXd::Zero(l);
    for (int k = 0; k < w.l_in; ++k) theta[w.l_eq + k] = kInitXi;

    auto objective = [&](const VectorXd& th) {
        VectorXd u = w.weights(th);
        double f = w.clin.dot(th) + u.sum();
        for (int k = 0; k < w.l_in; ++k) {
            if (!(th[w.l_eq + k] > 0.0)) return std::numeric_limits<double>::infinity();
        }
        return f;
    };

    for (double t : {1.0, 1e-2, 1e-4, 1e-6, 1e-8, 1e-10}) {
        for (int it = 0; it < 500; ++it) {
            VectorXd u = w.weights(theta);
            double f = objective(theta);
            for (int k = 0; k < w.l_in; ++k) f -= t * std::log(theta[w.l_eq + k]);
            VectorXd grad = w.clin - w.J * u;
            MatrixXd H = w.J * u.asDiagonal() * w.J.transpose();
            for (int k = 0; k < w.l_in; ++k) {
                double xi = theta[w.l_eq + k];
                grad[w.l_eq + k] -= t / xi;
                H(w.l_eq + k, w.l_eq + k) += t / (xi * xi);
            }
            H.diagonal().array() += 1e-13 * (1.0 + H.diagonal().maxCoeff());
            VectorXd step = H.ldlt().solve(-grad);
            double dec = -0.5 * grad.dot(step);
            if (!(dec > 1e-15 * (1.0 + std::abs(f)))) break;
            double alpha = 1.0;
            double slope = grad.dot(step);
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls) {
                VectorXd cand = theta + alpha * step;
                double fc = objective(cand);
                if (std::isfinite(fc)) {
                    double fb = fc;
                    bool pos = true;
                    for (int k = 0; k < w.l_in; ++k) {
                        if (!(cand[w.l_eq + k] > 0.0)) pos = false;
                    }
                    if (pos) {
                        for (int k = 0; k < w.l_in; ++k) fb -= t * std::log(cand[w.l_eq + k]);
                        if (fb <= f + 0.25 * alpha * slope) {
                            theta = cand;
                            moved = true;
                            break;
                        }
                    }
                }
                alpha *= 0.5;
            }
            if (!moved) break;
            if (theta.lpNorm<Eigen::Infinity>() > 1e9)
                throw SolveError("divergence minimization did not converge");
        }
    }
    return theta;
}

bool minidiv_polish(const DualWork& w, const std::vector<int>& active, VectorXd& theta) {
    const int ke = w.l_eq;
    const int ka = static_cast<int>(active.size());
    const int kt = ke + ka;
    if (kt == 0) return true;

    MatrixXd Jr(kt, w.m);
    VectorXd rr(kt);
    if (ke > 0) {
        Jr.topRows(ke) = w.J.topRows(ke);
        rr.head(ke) = w.clin.head(ke);
    }
    for (int a = 0; a < ka; ++a) {
        Jr.row(ke + a) = w.J.row(w.l_eq + active[a]);
        rr[ke + a] = w.clin[w.l_eq + active[a]];
    }
    VectorXd y(kt);
    if (ke > 0) y.head(ke) = theta.head(ke);
    for (int a = 0; a < ka; ++a) y[ke + a] = theta[w.l_eq + active[a]];

    auto weights_of = [&](const VectorXd& yv) {
        VectorXd th = VectorXd::Zero(w.l_eq + w.l_in);
        if (ke > 0) th.head(ke) = yv.head(ke);
        for (int a = 0; a < ka; ++a) th[w.l_eq + active[a]] = yv[ke + a];
        return w.weights(th);
    };

    double scale = std::max(1.0, rr.lpNorm<Eigen::Infinity>());
    VectorXd u = weights_of(y);
    VectorXd F = Jr * u - rr;
    for (int it = 0; it < 60; ++it) {
        if (F.lpNorm<Eigen::Infinity>() <= 1e-12 * scale) break;
        MatrixXd Jac = -Jr * u.asDiagonal() * Jr.transpose();
        VectorXd step = Jac.completeOrthogonalDecomposition().solve(-F);
        double alpha = 1.0;
        double phi0 = F.squaredNorm();
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            VectorXd cand = y + alpha * step;
            VectorXd uc = weights_of(cand);
            VectorXd Fc = Jr * uc - rr;
            if (Fc.allFinite() && Fc.squaredNorm() < phi0 * (1.0 - 1e-4 * alpha)) {
                y = cand;
                u = uc;
                F = Fc;
                moved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!moved) break;
    }
    if (F.lpNorm<Eigen::Infinity>() > 1e-9 * scale) return false;
    for (int a = 0; a < ka; ++a)
        if (y[ke + a] < -1e-9) return false;
    for (int k = 0; k < w.l_in; ++k) {
        if (std::find(active.begin(), active.end(), k) != active.end()) continue;
        double slack = w.clin[w.l_eq + k] - w.J.row(w.l_eq + k).dot(u);
        if (slack < -1e-7 * scale) return false;
    }
    VectorXd out = VectorXd::Zero(w.l_eq + w.l_in);
    if (ke > 0) out.head(ke) = y.head(ke);
    for (int a = 0; a < ka; ++a) out[w.l_eq + active[a]] = std::max(0.0, y[ke + a]);
    theta = out;
    return true;
}

MinidivSolution solve_minidiv_core(const ProblemSpec& spec) {
    const DualWork w = DualWork::make(spec);
    const int l = w.l_eq + w.l_in;

    MinidivSolution out;
    if (l == 0) {
        out.u_star = spec.prior.values;
        out.duals.lambda = VectorXd(0);
        out.duals.zeta = VectorXd(0);
    } else {
        if (!feasible(spec)) throw SolveError("infeasible constraints");
        VectorXd theta = minidiv_dual(w);
        VectorXd u = w.weights(theta);
        std::vector<int> active;
        for (int k = 0; k < w.l_in; ++k) {
            double slack = w.clin[w.l_eq + k] - w.J.row(w.l_eq + k).dot(u);
            if (theta[w.l_eq + k] > slack) active.push_back(k);
        }
        VectorXd polished = theta;
        if (minidiv_polish(w, active, polished)) theta = polished;
        out.u_star = w.weights(theta);
        out.duals.lambda = theta.head(w.l_eq);
        out.duals.zeta = theta.tail(w.l_in);
    }
    out.sum = out.u_star.sum();
    out.divergence = i_div(out.u_star, spec.prior.values);
    out.duals.value = out.divergence;
    out.duals.e_residual = 0.0;
    out.nu_hat = round_to_counts(out.u_star);
    return out;
}

}  // namespace

MinidivSolution solve_minidiv(const ProblemSpec& spec) {
    std::set<int> zeros = forced_zeros(spec);
    if (zeros.empty()) return solve_minidiv_core(spec);

    ReducedSpec red = remove_variables(spec, zeros);
    MinidivSolution inner = solve_minidiv_core(red.spec);
    MinidivSolution out;
    out.u_star = VectorXd::Zero(spec.dim());
    std::vector<long long> entries(spec.dim(), 0);
    for (std::size_t i = 0; i < red.kept_vars.size(); ++i) {
        out.u_star[red.kept_vars[i]] = inner.u_star[static_cast<int>(i)];
        entries[red.kept_vars[i]] = inner.nu_hat.entries[i];
    }
    out.nu_hat = CountVector::of(std::move(entries));
    out.sum = inner.sum;
    out.divergence = inner.divergence;
    out.duals.lambda = VectorXd::Zero(static_cast<int>(spec.equalities.size()));
    out.duals.zeta = VectorXd::Zero(static_cast<int>(spec.inequalities.size()));
    for (std::size_t i = 0; i < red.kept_eq.size(); ++i)
        out.duals.lambda[red.kept_eq[i]] = inner.duals.lambda[static_cast<int>(i)];
    for (std::size_t i = 0; i < red.kept_ineq.size(); ++i)
        out.duals.zeta[red.kept_ineq[i]] = inner.duals.zeta[static_cast<int>(i)];
    out.duals.value = inner.duals.value;
    out.removed_zeros = zeros;
    return out;
}

namespace {

PriorKind classify_prior_values(const VectorXd& v) {
    if (std::abs(v.sum() - 1.0) <= 1e-12) return PriorKind::Density;
    if (v.minCoeff() >= 1.0 - 1e-12) return PriorKind::CountLike;
    return PriorKind::General;
}

}  // namespace

ProblemSpec prior_transfer_to_minidiv(const Solution& sol, const ProblemSpec& spec) {
    ProblemSpec out = spec;
    VectorXd v = sol.s_star * spec.prior.values;
    out.prior = Prior::make(v, classify_prior_values(v));
    return out;
}

ProblemSpec prior_transfer_to_maxgrent(const MinidivSolution& sol, const ProblemSpec& spec) {
    ProblemSpec out = spec;
    VectorXd y = spec.prior.values / sol.sum;
    out.prior = Prior::make(y, classify_prior_values(y));
    LinearConstraint row;
    row.sense = Sense::Eq;
    row.rhs = sol.sum;
    row.exact_rhs = rational_from_double(sol.sum);
    for (int j = 0; j < spec.dim(); ++j) {
        row.coeffs[j] = 1.0;
        row.exact_coeffs[j] = 1;
    }
    out.equalities.push_back(std::move(row));
    return out;
}

double g_tilde(const DualSolution& duals, const ProblemSpec& spec) {
    auto [bt, dt] = error_vectors(spec);
    double acc = 0.0;
    for (int i = 0; i < duals.lambda.size(); ++i) acc += std::abs(duals.lambda[i]) * bt[i];
    for (int k = 0; k < duals.zeta.size(); ++k) acc += duals.zeta[k] * dt[k];
    return acc;
}

double perturbed_max_bound(const Solution& sol, double delta, const VectorXd& b_tilde,
                           const VectorXd& d_tilde) {
    double gt = 0.0;
    for (int i = 0; i < sol.duals.lambda.size(); ++i)
        gt += std::abs(sol.duals.lambda[i]) * b_tilde[i];
    for (int k = 0; k < sol.duals.zeta.size(); ++k) gt += sol.duals.zeta[k] * d_tilde[k];
    return sol.g_star + delta * gt;
}

}  // namespace maxgrent
