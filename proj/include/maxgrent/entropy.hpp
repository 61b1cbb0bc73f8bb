#pragma once

#include "maxgrent/util.hpp"

namespace maxgrent {

/// Generalized entropy G(x) = -sum x_i ln x_i + (sum x_i) ln(sum x_i),
/// with 0 ln 0 = 0. Natural log throughout.
double g_entropy(const VectorXd& x);

/// Generalized relative entropy G(x||y) = -sum x_i ln(x_i/y_i) + s ln s.
double g_rel_entropy(const VectorXd& x, const VectorXd& y);

/// I-divergence D(u||v) = sum u_i ln(u_i/v_i) - sum u_i + sum v_i.
double i_div(const VectorXd& u, const VectorXd& v);

/// (s ln min_i y_i, s ln sum_i y_i): the elementary sandwich on G(x||y).
std::pair<double, double> basic_bounds(const VectorXd& x, const VectorXd& y);

/// Bounds on G(y||mu) - G(x||mu) for y inside the hypercube ||y-x||_inf <= zeta,
/// assuming a count-like prior. The lower gap needs x > zeta elementwise.
struct HypercubeGaps {
    double lower = 0.0;
    double upper = 0.0;
};
HypercubeGaps hypercube_bounds(const VectorXd& x, double zeta, const VectorXd& mu);

/// Density decomposition of G(x||y): sums s, t, densities chi, psi, and
/// div = D(chi||psi), tied together by G = s ln t - s div.
struct DensityDecomposition {
    double s = 0.0;
    double t = 0.0;
    double div = 0.0;
    VectorXd chi;
    VectorXd psi;
    double l1_distance = 0.0;
    double psi_min = 0.0;

    double value() const { return s * std::log(t) - s * div; }
    // Pinsker / reverse-Pinsker sandwich on G(x||y).
    double pinsker_upper() const { return s * std::log(t) - 0.5 * s * l1_distance * l1_distance; }
    double pinsker_lower() const {
        return s * std::log(t) - (s / psi_min) * l1_distance * l1_distance;
    }
};
DensityDecomposition density_decomposition(const VectorXd& x, const VectorXd& y);

}  // namespace maxgrent
