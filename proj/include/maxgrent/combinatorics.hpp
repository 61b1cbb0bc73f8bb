#pragma once

#include "maxgrent/solver.hpp"

namespace maxgrent {

/// Number of allocation sequences realizing a count vector. `value` is exact
/// when the prior is integral; `log_value` is always filled.
struct RealizationCount {
    BigInt value = 0;
    double log_value = 0.0;
    bool exact = false;
};
RealizationCount realizations(const CountVector& nu, const Prior& mu);

/// multinomial(n; nu) as an exact big integer.
BigInt multinomial(const CountVector& nu);

/// Probability of a count vector under a density prior (exact rationals when
/// the prior literals are exact decimals) or an integral prior divided by r^n.
struct Probability {
    BigRat exact = 0;
    double log_value = 0.0;
    bool is_exact = false;
};
Probability probability(const CountVector& nu, const Prior& mu);

/// S(nu) = sqrt(n) / ((2*pi)^{(m-1)/2} sqrt(prod nu_i)); requires nu > 0.
double stirling_factor(const CountVector& nu);

/// All count vectors in C(delta) with sums in [range.n1, range.n2], in
/// lexicographic order. Membership is decided in exact rational arithmetic.
/// Throws CapExceeded beyond `cap` points.
std::vector<CountVector> enumerate_region(const ProblemSpec& spec, double delta,
                                          const SumRange& range, std::size_t cap);

enum class ClassifyMode { Value, Distance };

/// The A/B partition of an enumerated universe, with realization totals.
struct EnumerationSet {
    ClassifyMode mode = ClassifyMode::Value;
    double parameter = 0.0;
    double delta = 0.0;
    std::vector<CountVector> members_A;
    std::vector<CountVector> members_B;
    BigInt realizations_A = 0;
    BigInt realizations_B = 0;
    double log_realizations_A = 0.0;
    double log_realizations_B = 0.0;
    bool exact = false;
};
EnumerationSet classify(const std::vector<CountVector>& universe, const Solution& sol,
                        ClassifyMode mode, double parameter, const Prior& mu, double delta);

/// Exact ratio of the optimal vector's realizations to the B set's.
struct ExactRatio {
    double ratio = 0.0;
    BigInt numerator = 0;
    BigInt denominator = 0;
    bool infinite = false;
};
ExactRatio exact_ratio(const Solution& sol, const EnumerationSet& set, const Prior& mu);

/// Exact total probability mass of a set of count vectors (rational path).
BigRat exact_probability_mass(const std::vector<CountVector>& set, const Prior& mu);

}  // namespace maxgrent
