#include "maxgrent/concentration.hpp"

#include <algorithm>

namespace maxgrent {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

double front_log(int m) {
    return std::log(m + 1.0) + std::lgamma(m / 2.0) - m / 12.0 - std::log(2.0) -
           (m / 2.0) * std::log(M_PI);
}

double half_log_prior(const Prior& mu) {
    double acc = 0.0;
    for (int i = 0; i < mu.size(); ++i) acc += std::log(mu.values[i]);
    return 0.5 * acc;
}

double log_c2(const VectorXd& x, double s) {
    double acc = std::log(s);
    for (int i = 0; i < x.size(); ++i) acc += std::log(x[i] / s) - std::log(x[i] + 0.5);
    return 0.5 * acc;
}

// log of (sqrt(s2+m/2+2)+sqrt(m))^{m+1} - (sqrt(s1-m/2)+sqrt(m))^{m+1}.
double log_c3(double s1, double s2, int m) {
    double inner = std::max(s1 - m / 2.0, 0.0);
    double a = (m + 1.0) * std::log(std::sqrt(s2 + m / 2.0 + 2.0) + std::sqrt(double(m)));
    double b = (m + 1.0) * std::log(std::sqrt(inner) + std::sqrt(double(m)));
    return log_diff_exp(a, b);
}

double sum_inv_above_half(const VectorXd& x) {
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i) acc += 1.0 / (x[i] - 0.5);
    return acc;
}

double log_c4(const VectorXd& x, double s) {
    const int m = static_cast<int>(x.size());
    return -0.125 * (sum_inv_above_half(x) - m / (s / m - 0.5));
}

double log_c4_floor(const VectorXd& x, double s) {
    const int m = static_cast<int>(x.size());
    return -0.125 * (sum_inv_above_half(x) - double(m) * m / s);
}

// Sum of the per-coordinate log terms in the eta-condition; density priors
// substitute 1/mu_i for mu_i.
double eta_log_sum(const Solution& sol, const Prior& mu) {
    double acc = 0.0;
    for (int i = 0; i < mu.size(); ++i) {
        double chi = sol.chi_star[i];
        acc += mu.kind == PriorKind::Density ? std::log(1.0 / (mu.values[i] * chi))
                                             : std::log(mu.values[i] / chi);
    }
    return acc;
}

Flag make_flag(const std::string& name, bool ok, const std::string& why_bad) {
    return {name, ok, ok ? "" : why_bad};
}

Flag x_above_half_flag(const Solution& sol) {
    return make_flag("x_star_above_half", sol.x_star.minCoeff() > 0.5,
                     "some x*_i <= 1/2; the realization lower bound is undefined");
}

Flag delta_floor_flag(double delta, double rho) {
    bool ok = delta >= 1.0 / (2.0 * rho) - 1e-12;
    char buf[128];
    std::snprintf(buf, sizeof(buf),
                  "delta = %g is below 1/(2 rho_inf) = %g; rounded vectors may leave the region",
                  delta, 1.0 / (2.0 * rho));
    return make_flag("delta_floor", ok, buf);
}

}  // namespace

bool all_ok(const std::vector<Flag>& flags) {
    return std::all_of(flags.begin(), flags.end(), [](const Flag& f) { return f.ok; });
}

CConstants c_constants(const Solution& sol, const SumRange& range, const Prior& mu) {
    const int m = mu.size();
    CConstants out;
    Flag xa = x_above_half_flag(sol);
    out.flags.push_back(xa);
    Flag inner = make_flag("c3_inner_sqrt", range.s1 >= m / 2.0,
                           "s1 < m/2: the inner square root of C3 is clamped at 0");
    out.flags.push_back(inner);

    out.log_C3 = log_c3(range.s1, range.s2, m);
    out.log_C1 = 0.5 * std::log(M_PI) - std::log(m + 1.0) - (m - 3.0) / 2.0 * std::log(2.0) -
                 std::lgamma(m / 2.0) + out.log_C3;
    if (xa.ok) {
        out.log_C2 = log_c2(sol.x_star, sol.s_star);
        out.log_C4 = log_c4(sol.x_star, sol.s_star);
        out.log_C0 = -m / 12.0 - (m - 1.0) / 2.0 * std::log(2.0 * M_PI) - half_log_prior(mu) +
                     out.log_C2 + out.log_C4;
    } else {
        out.log_C2 = log_c2(sol.x_star, sol.s_star);  // defined whenever x* > 0
        out.log_C4 = kNaN;
        out.log_C0 = kNaN;
    }
    return out;
}

BoundResult value_ratio_bound(const Solution& sol, const ProblemSpec& spec, const SumRange& range,
                              double eta, double delta) {
    const Prior& mu = spec.prior;
    if (mu.kind == PriorKind::Density)
        throw std::invalid_argument("value_ratio_bound: use prob_ratio_bound for density priors");
    if (!(eta > 0.0 && eta < 1.0))
        throw std::invalid_argument("value_ratio_bound: eta must lie in (0,1)");

    BoundResult out;
    Flag xa = x_above_half_flag(sol);
    out.flags.push_back(xa);
    out.flags.push_back(delta_floor_flag(delta, rho_inf(spec)));
    if (!xa.ok) {
        out.log_bound = kNaN;
        return out;
    }
    const int m = mu.size();
    double eta_min = (0.5 * eta_log_sum(sol, mu) +
                      0.125 * (sum_inv_above_half(sol.x_star) -
                               m / (sol.s_star / m - 0.5))) /
                     sol.g_star;
    char buf[128];
    std::snprintf(buf, sizeof(buf), "eta = %g is below the floor %g; nu* may fall outside A", eta,
                  eta_min);
    out.flags.push_back(make_flag("eta_floor", eta >= eta_min, buf));

    out.log_bound = front_log(m) - half_log_prior(mu) + log_c2(sol.x_star, sol.s_star) +
                    log_c4(sol.x_star, sol.s_star) - log_c3(range.s1, range.s2, m) +
                    eta * sol.g_star;
    return out;
}

double k_factor(double theta, const VectorXd& x_star) {
    double inf_norm = x_star.lpNorm<Eigen::Infinity>();
    double one_norm = x_star.lpNorm<1>();
    double limit = 0.5 * one_norm / inf_norm - 1.0;
    if (!(theta > 0.0 && theta <= limit + 1e-12))
        throw std::invalid_argument("k_factor: theta outside the admissible interval (0, " +
                                    std::to_string(limit) + "]");
    return 1.0 / (2.0 * (1.0 + theta) * (1.0 - (1.0 + theta) * inf_norm / one_norm));
}

double growth_gap(double theta, const VectorXd& x_star) {
    return theta * theta * k_factor(theta, x_star) * x_star.lpNorm<Eigen::Infinity>();
}

BoundResult distance_ratio_bound(const Solution& sol, const ProblemSpec& spec,
                                 const SumRange& range, double theta, double delta,
                                 double g_tilde_value) {
    const Prior& mu = spec.prior;
    if (mu.kind == PriorKind::Density)
        throw std::invalid_argument(
            "distance_ratio_bound: use prob_ratio_bound for density priors");
    BoundResult out;
    double k = k_factor(theta, sol.x_star);  // throws if theta inadmissible
    double inf_norm = sol.x_star.lpNorm<Eigen::Infinity>();

    Flag xa = x_above_half_flag(sol);
    out.flags.push_back(xa);
    out.flags.push_back(delta_floor_flag(delta, rho_inf(spec)));
    out.flags.push_back(make_flag("theta_floor", theta >= 1.0 / (2.0 * inf_norm),
                                  "theta < 1/(2||x*||_inf): nu* may fall outside A"));
    double useful_limit = theta * theta * k * inf_norm / g_tilde_value;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "delta = %g is not below theta^2 K ||x*||_inf / Gtilde = %g; the bound is weak",
                  delta, useful_limit);
    out.flags.push_back(make_flag("delta_useful", delta < useful_limit, buf));

    if (!xa.ok) {
        out.log_bound = kNaN;
        return out;
    }
    const int m = mu.size();
    out.log_bound = front_log(m) - half_log_prior(mu) + log_c2(sol.x_star, sol.s_star) +
                    log_c4(sol.x_star, sol.s_star) - log_c3(range.s1, range.s2, m) +
                    theta * theta * k * inf_norm - delta * g_tilde_value;
    return out;
}

ScalingConstants scaling_constants(const Solution& sol, const ProblemSpec& spec,
                                   const SumRange& range, ConcentrationMode mode,
                                   const ConcentrationParams& params, double epsilon) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("scaling_constants: epsilon must be > 0");
    const Prior& mu = spec.prior;
    const int m = mu.size();
    const bool density = mu.kind == PriorKind::Density;

    ScalingConstants out;
    Flag xa = x_above_half_flag(sol);
    out.flags.push_back(xa);
    if (!xa.ok) throw SolveError("x* must exceed 1/2 elementwise for the scaling constants");

    double prior_term = density ? half_log_prior(mu) : -half_log_prior(mu);
    out.log_K = front_log(m) + prior_term + log_c2(sol.x_star, sol.s_star) +
                log_c4_floor(sol.x_star, sol.s_star) - log_c3(range.s1, range.s2, m);
    out.beta = m - 0.5;

    if (mode == ConcentrationMode::Value) {
        if (!(params.eta > 0.0))
            throw std::invalid_argument("scaling_constants: eta must be positive");
        out.alpha = density ? -params.eta * sol.g_star : params.eta * sol.g_star;
    } else {
        double k = k_factor(params.theta, sol.x_star);
        double gt = g_tilde(sol.duals, spec);
        out.alpha = params.theta * params.theta * k * sol.x_star.lpNorm<Eigen::Infinity>() -
                    params.delta * gt;
    }
    if (!(out.alpha > 0.0))
        throw SolveError("no concentration at this parameterization (alpha <= 0)");
    out.gamma = -std::log(epsilon) - out.log_K;
    out.flags.push_back(make_flag("gamma_positive", out.gamma > 0.0,
                                  "gamma <= 0: the constant K is not small at this epsilon"));
    return out;
}

double c3_root(double alpha, double beta, double gamma) {
    if (!(alpha > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("c3_root: alpha and gamma must be positive");
    auto f = [&](double c) { return alpha * c - beta * std::log(c) - gamma; };
    if (alpha >= gamma) return 1.0;
    double stat = beta / alpha;
    if (f(stat) >= 0.0) return std::max(1.0, stat);

    double lo = std::max(stat, 1.0);
    double hi = std::max({gamma / alpha, 2.0 * lo, 2.0});
    for (int it = 0; it < 200 && f(hi) <= 0.0; ++it) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    double c = 0.5 * (lo + hi);
    for (int it = 0; it < 50 && std::abs(f(c)) > 1e-10; ++it) {
        double deriv = alpha - beta / c;
        if (deriv <= 0.0) break;
        c -= f(c) / deriv;
    }
    return c;
}

ConcentrationReport threshold(const Solution& sol, const ProblemSpec& spec, const SumRange& range,
                              ConcentrationMode mode, const ConcentrationParams& params,
                              double epsilon, const ThresholdOptions& options) {
    const Prior& mu = spec.prior;
    const int m = mu.size();
    const bool density = mu.kind == PriorKind::Density;

    ConcentrationReport rep;
    rep.mode = mode;
    rep.prior_kind = mu.kind;

    CConstants cc = c_constants(sol, range, mu);
    rep.log_C0 = cc.log_C0;
    rep.log_C1 = cc.log_C1;
    rep.log_C2 = cc.log_C2;
    rep.log_C3 = cc.log_C3;
    rep.log_C4 = cc.log_C4;
    for (const auto& f : cc.flags) rep.flags.push_back(f);

    rep.g_tilde_value = g_tilde(sol.duals, spec);
    double rho = rho_inf(spec);

    ScalingConstants sc = scaling_constants(sol, spec, range, mode, params, epsilon);
    rep.alpha = sc.alpha;
    rep.beta = sc.beta;
    rep.gamma = sc.gamma;
    rep.log_inv_epsilon = -std::log(epsilon);
    rep.neg_log_K = -sc.log_K;
    for (const auto& f : sc.flags) rep.flags.push_back(f);

    if (mode == ConcentrationMode::Value) {
        double g_mag = std::abs(sol.g_star);
        double s_ln = eta_log_sum(sol, mu);
        double t_term = sum_inv_above_half(sol.x_star) -
                        (options.eta_condition_alt_term ? double(m) * m / sol.s_star
                                                        : double(m) * m / (4.0 * sol.s_star));
        double a = 8.0 * params.eta * g_mag;
        double p = 4.0 * s_ln;
        double disc = p * p + 4.0 * a * t_term;
        double quad = disc >= 0.0 ? (p + std::sqrt(disc)) / (2.0 * a) : 0.0;
        rep.c1 = std::max(1.0, quad);
        if (params.delta > 0.0)
            rep.c1 = std::max(rep.c1, 1.0 / (2.0 * params.delta * rho));
        else
            rep.flags.push_back(make_flag(
                "delta_floor_scaled", false,
                "delta = 0: rounded vectors are not guaranteed inside the region at any scale"));
        rep.c2 = 1.0;
    } else {
        rep.k_factor_value = k_factor(params.theta, sol.x_star);
        double inf_norm = sol.x_star.lpNorm<Eigen::Infinity>();
        rep.c1 = 1.0;
        rep.c2 = std::max(1.0, 1.0 / (2.0 * params.theta * inf_norm));
        // The region-membership floor for nu* is reported, not folded into
        // c_hat: the ratio bound does not depend on it.
        double c_floor = params.delta > 0.0 ? 1.0 / (2.0 * params.delta * rho)
                                            : std::numeric_limits<double>::infinity();
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "delta floor: nu* of the scaled problem is guaranteed inside C(delta) only "
                      "for c >= %g",
                      c_floor);
        rep.flags.push_back(make_flag("delta_floor_scaled", rep.c2 >= c_floor || rep.c1 >= c_floor,
                                      buf));
    }
    rep.c3 = c3_root(sc.alpha, sc.beta, sc.gamma);
    rep.c_hat = std::max({rep.c1, rep.c2, rep.c3});

    // Bracket on c3 from the root characterization.
    {
        double lo = sc.gamma / sc.alpha;
        double upper = sc.alpha <= sc.beta + sc.gamma
                           ? lo + 2.0 * sc.beta / sc.alpha * std::log((sc.beta + sc.gamma) / sc.alpha)
                           : lo + std::log(lo);
        bool in_bracket = rep.c3 <= 1.0 + 1e-12 ||
                          (rep.c3 >= lo - 1e-9 * (1.0 + lo) && rep.c3 <= upper + 1e-9 * (1.0 + upper));
        rep.flags.push_back(make_flag("c3_bracket", in_bracket, "c3 escaped its analytic bracket"));
    }

    ConcentrationParams p1 = params;
    if (density) {
        BoundResult pb = prob_ratio_bound(sol, spec, range, mode, p1, 1.0);
        rep.log_ratio_bound = pb.log_bound;
        for (const auto& f : pb.flags) rep.flags.push_back(f);
    } else if (mode == ConcentrationMode::Value) {
        BoundResult vb = value_ratio_bound(sol, spec, range, params.eta, params.delta);
        rep.log_ratio_bound = vb.log_bound;
        for (const auto& f : vb.flags) rep.flags.push_back(f);
    } else {
        BoundResult db =
            distance_ratio_bound(sol, spec, range, params.theta, params.delta, rep.g_tilde_value);
        rep.log_ratio_bound = db.log_bound;
        for (const auto& f : db.flags) rep.flags.push_back(f);
    }
    return rep;
}

BoundResult prob_ratio_bound(const Solution& sol, const ProblemSpec& spec, const SumRange& range,
                             ConcentrationMode mode, const ConcentrationParams& params, double c) {
    const Prior& mu = spec.prior;
    if (mu.kind != PriorKind::Density)
        throw std::invalid_argument("prob_ratio_bound: requires a density prior");
    if (!(c >= 1.0)) throw std::invalid_argument("prob_ratio_bound: scale must be >= 1");

    BoundResult out;
    VectorXd xs = c * sol.x_star;
    double ss = c * sol.s_star;
    Flag xa = make_flag("x_star_above_half", xs.minCoeff() > 0.5,
                        "some scaled x*_i <= 1/2; the probability lower bound is undefined");
    out.flags.push_back(xa);
    if (!xa.ok) {
        out.log_bound = kNaN;
        return out;
    }
    const int m = mu.size();
    double base = front_log(m) + half_log_prior(mu) + log_c2(xs, ss) + log_c4(xs, ss) -
                  log_c3(c * range.s1, c * range.s2, m);
    if (mode == ConcentrationMode::Value) {
        if (!(params.eta > 0.0))
            throw std::invalid_argument("prob_ratio_bound: eta must be positive");
        out.log_bound = base - params.eta * c * sol.g_star;
    } else {
        double k = k_factor(params.theta, sol.x_star);
        double gt = g_tilde(sol.duals, spec);
        out.log_bound = base + params.theta * params.theta * k * xs.lpNorm<Eigen::Infinity>() -
                        params.delta * c * gt;
        out.flags.push_back(make_flag("theta_floor",
                                      params.theta >= 1.0 / (2.0 * xs.lpNorm<Eigen::Infinity>()),
                                      "theta < 1/(2||cx*||_inf): nu* may fall outside A"));
    }
    return out;
}

}  // namespace maxgrent
