#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

namespace maxgrent {

using Eigen::MatrixXd;
using Eigen::VectorXd;

using BigInt = boost::multiprecision::cpp_int;
using BigRat = boost::multiprecision::cpp_rational;

/// Malformed or invalid problem document.
struct SpecError : std::runtime_error {
    explicit SpecError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Infeasible / unbounded / non-convergent optimization.
struct SolveError : std::runtime_error {
    explicit SolveError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Density prior attained G* = 0: the maximizer is any positive multiple of
/// the recovered density, so only chi* is reported.
struct NonUniqueMaximizer : std::runtime_error {
    VectorXd chi;
    explicit NonUniqueMaximizer(VectorXd chi_)
        : std::runtime_error("non-unique maximizer: G* = 0, any x = alpha*chi attains it"),
          chi(std::move(chi_)) {}
};

/// Lattice enumeration exceeded the point cap; callers should switch to the
/// analytic bounds instead.
struct CapExceeded : std::runtime_error {
    std::size_t cap;
    explicit CapExceeded(std::size_t cap_)
        : std::runtime_error("enumeration cap of " + std::to_string(cap_) +
                             " lattice points exceeded; use certify instead"),
          cap(cap_) {}
};

/// Exact rational equal in value to the shortest decimal that round-trips to
/// this double, so "0.1" in a document becomes 1/10, not the binary fraction.
BigRat rational_from_double(double v);

/// Natural log of a positive big integer (works far beyond double range).
double log_big(const BigInt& v);

/// ln(e^a - e^b) for a > b, stable for nearly-equal magnitudes.
double log_diff_exp(double a, double b);

/// ln(sum_i e^{v_i}); -inf for an empty list.
double log_sum_exp(const std::vector<double>& v);

/// FNV-1a 64-bit digest, hex-encoded.
std::string fnv1a_hex(const std::string& bytes);

/// Conservative outward integer ceiling: ceil(v) robust to ~1e-7 float fuzz.
long long ceil_tol(double v);

}  // namespace maxgrent
