#pragma once

#include "maxgrent/combinatorics.hpp"

namespace maxgrent {

enum class ConcentrationMode { Value, Distance };

/// Named precondition check; failures are reported, never silently clamped.
struct Flag {
    std::string name;
    bool ok = true;
    std::string message;
};

bool all_ok(const std::vector<Flag>& flags);

struct CConstants {
    double log_C0 = 0.0;
    double log_C1 = 0.0;
    double log_C2 = 0.0;
    double log_C3 = 0.0;
    double log_C4 = 0.0;
    std::vector<Flag> flags;
};
/// The constant block shared by the ratio bounds, in log domain.
CConstants c_constants(const Solution& sol, const SumRange& range, const Prior& mu);

struct BoundResult {
    double log_bound = 0.0;
    std::vector<Flag> flags;
};

/// Log of the lower bound on #nu* / #B(delta, eta) (value proximity).
BoundResult value_ratio_bound(const Solution& sol, const ProblemSpec& spec, const SumRange& range,
                              double eta, double delta);

/// K(theta, x*) of the growth condition; theta must lie in
/// (0, ||x*||_1 / (2 ||x*||_inf) - 1].
double k_factor(double theta, const VectorXd& x_star);

/// Minimum drop of the objective outside the theta-cube around x*.
double growth_gap(double theta, const VectorXd& x_star);

/// Log of the lower bound on #nu* / #B(delta, theta) (distance proximity).
BoundResult distance_ratio_bound(const Solution& sol, const ProblemSpec& spec,
                                 const SumRange& range, double theta, double delta,
                                 double g_tilde_value);

struct ConcentrationParams {
    double eta = std::numeric_limits<double>::quiet_NaN();
    double theta = std::numeric_limits<double>::quiet_NaN();
    double delta = 0.0;
};

struct ScalingConstants {
    double log_K = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    std::vector<Flag> flags;
};
/// K, alpha, beta, gamma of the scaled lower bound K c^{-beta} e^{alpha c};
/// density priors use the probabilistic constant K'. Throws SolveError when
/// alpha <= 0 (no concentration at this parameterization).
ScalingConstants scaling_constants(const Solution& sol, const ProblemSpec& spec,
                                   const SumRange& range, ConcentrationMode mode,
                                   const ConcentrationParams& params, double epsilon);

/// Smallest c with K c^{-beta} e^{alpha c} >= 1/epsilon, per the closed case
/// analysis; root found by bisection plus Newton polish.
double c3_root(double alpha, double beta, double gamma);

struct ConcentrationReport {
    ConcentrationMode mode = ConcentrationMode::Value;
    PriorKind prior_kind = PriorKind::General;
    double log_C0 = 0.0, log_C1 = 0.0, log_C2 = 0.0, log_C3 = 0.0, log_C4 = 0.0;
    double g_tilde_value = 0.0;
    double k_factor_value = std::numeric_limits<double>::quiet_NaN();
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
    double log_inv_epsilon = 0.0;
    double neg_log_K = 0.0;
    double c1 = 1.0, c2 = 1.0, c3 = 1.0, c_hat = 1.0;
    double log_ratio_bound = 0.0;
    std::vector<Flag> flags;
};

struct ThresholdOptions {
    /// Use m^2/s* instead of m^2/(4 s*) in the eta-condition quadratic.
    bool eta_condition_alt_term = false;
};

/// Concentration threshold c_hat = max(c1, c2, c3) plus the full constant
/// record. Density priors route through the probabilistic substitutions.
ConcentrationReport threshold(const Solution& sol, const ProblemSpec& spec, const SumRange& range,
                              ConcentrationMode mode, const ConcentrationParams& params,
                              double epsilon, const ThresholdOptions& options = {});

/// Log of the probabilistic ratio lower bound on the c-scaled problem
/// (density priors; evaluated via the scaling covariance, no re-solve).
BoundResult prob_ratio_bound(const Solution& sol, const ProblemSpec& spec, const SumRange& range,
                             ConcentrationMode mode, const ConcentrationParams& params, double c);

}  // namespace maxgrent
