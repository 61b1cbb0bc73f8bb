#include "maxgrent/entropy.hpp"

namespace maxgrent {

namespace {

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

void check_nonneg(const VectorXd& x, const char* who) {
    for (int i = 0; i < x.size(); ++i)
        if (x[i] < 0.0) throw std::invalid_argument(std::string(who) + ": negative entry");
}

void check_positive(const VectorXd& y, const char* who) {
    for (int i = 0; i < y.size(); ++i)
        if (!(y[i] > 0.0)) throw std::invalid_argument(std::string(who) + ": nonpositive entry");
}

}  // namespace

double g_entropy(const VectorXd& x) {
    check_nonneg(x, "g_entropy");
    double s = x.sum();
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i) acc -= xlogx(x[i]);
    return acc + xlogx(s);
}

double g_rel_entropy(const VectorXd& x, const VectorXd& y) {
    if (x.size() != y.size()) throw std::invalid_argument("g_rel_entropy: length mismatch");
    check_nonneg(x, "g_rel_entropy");
    check_positive(y, "g_rel_entropy");
    double s = x.sum();
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i)
        if (x[i] > 0.0) acc -= x[i] * std::log(x[i] / y[i]);
    return acc + xlogx(s);
}

double i_div(const VectorXd& u, const VectorXd& v) {
    if (u.size() != v.size()) throw std::invalid_argument("i_div: length mismatch");
    check_nonneg(u, "i_div");
    check_positive(v, "i_div");
    double acc = 0.0;
    for (int i = 0; i < u.size(); ++i) {
        if (u[i] > 0.0) acc += u[i] * std::log(u[i] / v[i]);
        acc += v[i] - u[i];
    }
    return acc;
}

std::pair<double, double> basic_bounds(const VectorXd& x, const VectorXd& y) {
    if (x.size() != y.size()) throw std::invalid_argument("basic_bounds: length mismatch");
    check_nonneg(x, "basic_bounds");
    check_positive(y, "basic_bounds");
    double s = x.sum();
    if (s == 0.0) return {0.0, 0.0};
    return {s * std::log(y.minCoeff()), s * std::log(y.sum())};
}

HypercubeGaps hypercube_bounds(const VectorXd& x, double zeta, const VectorXd& mu) {
    if (x.size() != mu.size()) throw std::invalid_argument("hypercube_bounds: length mismatch");
    check_positive(x, "hypercube_bounds");
    check_positive(mu, "hypercube_bounds");
    if (!(zeta >= 0.0)) throw std::invalid_argument("hypercube_bounds: negative zeta");
    const int m = static_cast<int>(x.size());
    const double s = x.sum();
    const double mean = s / m;

    double g = 0.0;
    for (int i = 0; i < m; ++i) g += std::log(mu[i] * s / x[i]);  // ln(mu_i / chi_i)

    auto h = [&](double z) {
        double acc = 0.0;
        for (int i = 0; i < m; ++i) acc += 1.0 / (x[i] - z);
        return acc - m / (mean - z);
    };

    if (x.minCoeff() <= zeta)
        throw std::invalid_argument("hypercube_bounds: some x_i <= zeta, lower gap undefined");
    HypercubeGaps out;
    out.lower = -g * zeta - 0.5 * h(zeta) * zeta * zeta;
    out.upper = g * zeta - 0.5 * h(-zeta) * zeta * zeta;
    return out;
}

DensityDecomposition density_decomposition(const VectorXd& x, const VectorXd& y) {
    if (x.size() != y.size())
        throw std::invalid_argument("density_decomposition: length mismatch");
    check_positive(x, "density_decomposition");
    check_positive(y, "density_decomposition");
    DensityDecomposition out;
    out.s = x.sum();
    out.t = y.sum();
    out.chi = x / out.s;
    out.psi = y / out.t;
    double div = 0.0;
    for (int i = 0; i < x.size(); ++i) div += out.chi[i] * std::log(out.chi[i] / out.psi[i]);
    out.div = div;
    out.l1_distance = (out.chi - out.psi).lpNorm<1>();
    out.psi_min = out.psi.minCoeff();
    return out;
}

}  // namespace maxgrent
