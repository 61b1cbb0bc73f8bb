#include "maxgrent/combinatorics.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "maxgrent/entropy.hpp"

namespace maxgrent {

namespace mp = boost::multiprecision;

BigInt multinomial(const CountVector& nu) {
    BigInt out = 1;
    long long rem = nu.n;
    for (long long e : nu.entries) {
        if (e < 0) throw std::invalid_argument("multinomial: negative entry");
        // C(rem, e) accumulated incrementally.
        BigInt num = 1, den = 1;
        for (long long i = 1; i <= e; ++i) {
            num *= rem - e + i;
            den *= i;
        }
        out *= num / den;
        rem -= e;
    }
    return out;
}

namespace {

BigRat rat_pow(const BigRat& q, long long e) {
    return BigRat(mp::pow(mp::numerator(q), static_cast<unsigned>(e)),
                  mp::pow(mp::denominator(q), static_cast<unsigned>(e)));
}

double log_realizations(const CountVector& nu, const Prior& mu) {
    double acc = std::lgamma(double(nu.n) + 1.0);
    for (int i = 0; i < nu.size(); ++i) {
        acc -= std::lgamma(double(nu.entries[i]) + 1.0);
        acc += double(nu.entries[i]) * std::log(mu.values[i]);
    }
    return acc;
}

}  // namespace

RealizationCount realizations(const CountVector& nu, const Prior& mu) {
    if (nu.size() != mu.size()) throw std::invalid_argument("realizations: length mismatch");
    RealizationCount out;
    out.log_value = log_realizations(nu, mu);
    if (mu.integral()) {
        out.value = multinomial(nu);
        for (int i = 0; i < nu.size(); ++i) {
            BigInt base = mp::numerator(mu.exact[i]);
            out.value *= mp::pow(base, static_cast<unsigned>(nu.entries[i]));
        }
        out.exact = true;
    }
    return out;
}

Probability probability(const CountVector& nu, const Prior& mu) {
    if (nu.size() != mu.size()) throw std::invalid_argument("probability: length mismatch");
    Probability out;
    if (mu.kind == PriorKind::Density) {
        out.exact = BigRat(multinomial(nu));
        for (int i = 0; i < nu.size(); ++i) out.exact *= rat_pow(mu.exact[i], nu.entries[i]);
        out.is_exact = true;
        out.log_value = log_realizations(nu, mu);
    } else if (mu.integral()) {
        RealizationCount rc = realizations(nu, mu);
        BigInt r = 0;
        for (const auto& q : mu.exact) r += mp::numerator(q);
        out.exact = BigRat(rc.value, mp::pow(r, static_cast<unsigned>(nu.n)));
        out.is_exact = true;
        out.log_value = rc.log_value - double(nu.n) * std::log(mu.r);
    } else {
        throw std::invalid_argument("probability: prior is neither a density nor integral");
    }
    return out;
}

double stirling_factor(const CountVector& nu) {
    const int m = nu.size();
    double log_prod = 0.0;
    for (long long e : nu.entries) {
        if (e <= 0) throw std::invalid_argument("stirling_factor: zero entry");
        log_prod += std::log(double(e));
    }
    return std::exp(0.5 * std::log(double(nu.n)) - 0.5 * (m - 1) * std::log(2.0 * M_PI) -
                    0.5 * log_prod);
}

namespace {

// One constraint row in exact integer form: lo <= a.nu <= hi, with lo/hi
// optional. Rows are pre-multiplied by the lcm of all denominators.
struct ExactRow {
    std::vector<BigInt> coeffs;  // dense, length m
    BigInt lo = 0, hi = 0;
    bool has_lo = false, has_hi = false;
    std::vector<BigInt> suff_min, suff_max;  // over remaining free variables
};

BigRat exact_error_term(const BigRat& rhs, double zero_replacement) {
    if (rhs != 0) return rhs < 0 ? BigRat(-rhs) : rhs;
    return rational_from_double(zero_replacement);
}

ExactRow make_row(const LinearConstraint& row, int m, const BigRat& delta,
                  double zero_replacement, const std::vector<long long>& ubs) {
    BigRat err = exact_error_term(row.exact_rhs, zero_replacement);
    BigRat lo_q = row.exact_rhs - delta * err;
    BigRat hi_q = row.exact_rhs + delta * err;

    BigInt lcm = 1;
    for (const auto& [j, q] : row.exact_coeffs) lcm = mp::lcm(lcm, mp::denominator(q));
    lcm = mp::lcm(lcm, mp::denominator(lo_q));
    lcm = mp::lcm(lcm, mp::denominator(hi_q));

    ExactRow out;
    out.coeffs.assign(m, 0);
    for (const auto& [j, q] : row.exact_coeffs)
        out.coeffs[j] = mp::numerator(q) * (lcm / mp::denominator(q));
    if (row.sense == Sense::Eq) {
        out.has_lo = true;
        out.lo = mp::numerator(lo_q) * (lcm / mp::denominator(lo_q));
    }
    out.has_hi = true;
    out.hi = mp::numerator(hi_q) * (lcm / mp::denominator(hi_q));

    out.suff_min.assign(m + 1, 0);
    out.suff_max.assign(m + 1, 0);
    for (int j = m - 1; j >= 0; --j) {
        BigInt contrib = out.coeffs[j] * ubs[j];
        out.suff_min[j] = out.suff_min[j + 1] + (contrib < 0 ? contrib : BigInt(0));
        out.suff_max[j] = out.suff_max[j + 1] + (contrib > 0 ? contrib : BigInt(0));
    }
    return out;
}

}  // namespace

std::vector<CountVector> enumerate_region(const ProblemSpec& spec, double delta,
                                          const SumRange& range, std::size_t cap) {
    if (cap == 0) throw std::invalid_argument("enumerate_region: cap must be positive");
    const int m = spec.dim();

    std::vector<double> real_ubs;
    try {
        real_ubs = variable_upper_bounds(spec, delta);
    } catch (const SolveError&) {
        return {};  // infeasible region
    }
    std::vector<long long> ubs(m);
    for (int j = 0; j < m; ++j) {
        if (!std::isfinite(real_ubs[j])) throw SolveError("unbounded coordinate in enumeration");
        ubs[j] = std::min<long long>(static_cast<long long>(std::floor(real_ubs[j] + 1e-9)),
                                     range.n2);
        if (ubs[j] < 0) return {};
    }

    BigRat dq = rational_from_double(delta);
    std::vector<ExactRow> rows;
    for (const auto& c : spec.equalities)
        rows.push_back(make_row(c, m, dq, spec.tolerance.zero_replacement, ubs));
    for (const auto& c : spec.inequalities)
        rows.push_back(make_row(c, m, dq, spec.tolerance.zero_replacement, ubs));

    std::vector<long long> ub_suffix_sum(m + 1, 0);
    for (int j = m - 1; j >= 0; --j) ub_suffix_sum[j] = ub_suffix_sum[j + 1] + ubs[j];

    std::vector<CountVector> out;
    std::vector<long long> current(m, 0);
    std::vector<BigInt> partial(rows.size(), 0);

    // Lexicographic depth-first scan with interval pruning per row.
    auto viable = [&](int depth, long long partial_sum) {
        if (partial_sum > range.n2) return false;
        if (partial_sum + ub_suffix_sum[depth] < range.n1) return false;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].has_hi && partial[r] + rows[r].suff_min[depth] > rows[r].hi) return false;
            if (rows[r].has_lo && partial[r] + rows[r].suff_max[depth] < rows[r].lo) return false;
        }
        return true;
    };

    std::function<void(int, long long)> dfs = [&](int depth, long long partial_sum) {
        if (depth == m) {
            out.push_back(CountVector::of(current));
            if (out.size() > cap) throw CapExceeded(cap);
            return;
        }
        for (long long v = 0; v <= ubs[depth]; ++v) {
            current[depth] = v;
            if (v > 0)
                for (std::size_t r = 0; r < rows.size(); ++r) partial[r] += rows[r].coeffs[depth];
            if (viable(depth + 1, partial_sum + v)) dfs(depth + 1, partial_sum + v);
        }
        for (std::size_t r = 0; r < rows.size(); ++r)
            partial[r] -= rows[r].coeffs[depth] * ubs[depth];
        current[depth] = 0;
    };
    dfs(0, 0);
    return out;
}

EnumerationSet classify(const std::vector<CountVector>& universe, const Solution& sol,
                        ClassifyMode mode, double parameter, const Prior& mu, double delta) {
    EnumerationSet out;
    out.mode = mode;
    out.parameter = parameter;
    out.delta = delta;
    out.exact = mu.integral();

    if (mode == ClassifyMode::Value) {
        bool density = mu.kind == PriorKind::Density;
        if (density ? !(parameter > 0.0) : !(parameter > 0.0 && parameter < 1.0))
            throw std::invalid_argument("classify: eta out of range");
    } else if (!(parameter > 0.0)) {
        throw std::invalid_argument("classify: theta must be positive");
    }

    double threshold = 0.0;
    double radius = 0.0;
    if (mode == ClassifyMode::Value) {
        threshold = mu.kind == PriorKind::Density ? (1.0 + parameter) * sol.g_star
                                                  : (1.0 - parameter) * sol.g_star;
    } else {
        radius = parameter * sol.x_star.lpNorm<Eigen::Infinity>();
    }

    std::vector<double> logs_a, logs_b;
    for (const auto& nu : universe) {
        bool in_a;
        if (mode == ClassifyMode::Value) {
            in_a = g_rel_entropy(nu.as_vector(), mu.values) >= threshold;
        } else {
            in_a = (nu.as_vector() - sol.x_star).lpNorm<Eigen::Infinity>() <= radius;
        }
        RealizationCount rc = realizations(nu, mu);
        if (in_a) {
            out.members_A.push_back(nu);
            if (out.exact) out.realizations_A += rc.value;
            logs_a.push_back(rc.log_value);
        } else {
            out.members_B.push_back(nu);
            if (out.exact) out.realizations_B += rc.value;
            logs_b.push_back(rc.log_value);
        }
    }
    out.log_realizations_A = log_sum_exp(logs_a);
    out.log_realizations_B = log_sum_exp(logs_b);
    return out;
}

ExactRatio exact_ratio(const Solution& sol, const EnumerationSet& set, const Prior& mu) {
    if (!set.exact) throw std::invalid_argument("exact_ratio: prior has no exact counting path");
    ExactRatio out;
    out.numerator = realizations(sol.nu_star, mu).value;
    out.denominator = set.realizations_B;
    if (out.denominator == 0) {
        out.infinite = true;
        out.ratio = std::numeric_limits<double>::infinity();
        return out;
    }
    out.ratio = std::exp(log_big(out.numerator) - log_big(out.denominator));
    return out;
}

BigRat exact_probability_mass(const std::vector<CountVector>& set, const Prior& mu) {
    BigRat acc = 0;
    for (const auto& nu : set) acc += probability(nu, mu).exact;
    return acc;
}

}  // namespace maxgrent
