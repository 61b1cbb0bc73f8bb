#include "maxgrent/util.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>

namespace maxgrent {

BigRat rational_from_double(double v) {
    if (!std::isfinite(v)) throw SpecError("non-finite number in document");
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    std::string s(buf, res.ptr);

    bool neg = false;
    std::size_t i = 0;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
        neg = s[i] == '-';
        ++i;
    }
    BigInt digits = 0;
    long long exp10 = 0;
    bool seen_dot = false;
    for (; i < s.size(); ++i) {
        char c = s[i];
        if (c == '.') {
            seen_dot = true;
        } else if (c == 'e' || c == 'E') {
            long long e = 0;
            auto r = std::from_chars(s.data() + i + 1, s.data() + s.size(), e);
            if (r.ec != std::errc{}) throw SpecError("bad numeric literal: " + s);
            exp10 += e;
            break;
        } else if (c >= '0' && c <= '9') {
            digits = digits * 10 + (c - '0');
            if (seen_dot) --exp10;
        } else {
            throw SpecError("bad numeric literal: " + s);
        }
    }
    BigRat q;
    if (exp10 >= 0) {
        q = BigRat(digits * boost::multiprecision::pow(BigInt(10), unsigned(exp10)), 1);
    } else {
        q = BigRat(digits, boost::multiprecision::pow(BigInt(10), unsigned(-exp10)));
    }
    return neg ? -q : q;
}

double log_big(const BigInt& v) {
    if (v <= 0) throw std::domain_error("log_big: nonpositive argument");
    const std::size_t bits = boost::multiprecision::msb(v) + 1;
    if (bits <= 900) return std::log(v.convert_to<double>());
    BigInt top = v >> (bits - 64);
    return std::log(top.convert_to<double>()) + double(bits - 64) * std::log(2.0);
}

double log_diff_exp(double a, double b) {
    if (!(a > b)) throw std::domain_error("log_diff_exp: requires a > b");
    return a + std::log1p(-std::exp(b - a));
}

double log_sum_exp(const std::vector<double>& v) {
    if (v.empty()) return -std::numeric_limits<double>::infinity();
    double hi = *std::max_element(v.begin(), v.end());
    if (!std::isfinite(hi)) return hi;
    double acc = 0.0;
    for (double x : v) acc += std::exp(x - hi);
    return hi + std::log(acc);
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

long long ceil_tol(double v) { return static_cast<long long>(std::ceil(v - 1e-7)); }

}  // namespace maxgrent
