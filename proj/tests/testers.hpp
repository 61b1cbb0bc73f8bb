#pragma once

#include <array>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "maxgrent/combinatorics.hpp"
#include "maxgrent/concentration.hpp"
#include "maxgrent/entropy.hpp"
#include "maxgrent/solver.hpp"

namespace testers {

using namespace maxgrent;

inline std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline ProblemSpec load_fixture(const std::string& name) {
    return parse_spec(slurp(std::string(FIXTURES_DIR) + "/" + name));
}

using Rng = std::mt19937_64;

inline VectorXd random_vector(Rng& rng, int m, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    VectorXd x(m);
    for (int i = 0; i < m; ++i) x[i] = dist(rng);
    return x;
}

/// Random bounded feasible spec with a strictly positive interior point:
/// 1-2 equalities and up to 4 inequalities with nonnegative coefficients,
/// plus a sum cap, all anchored at a random x0 > 0.
inline ProblemSpec random_spec(Rng& rng, int max_m = 10) {
    std::uniform_int_distribution<int> mdist(2, max_m);
    const int m = mdist(rng);
    std::uniform_real_distribution<double> xdist(0.8, 10.0);
    std::uniform_real_distribution<double> cdist(0.0, 2.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    ProblemSpec spec;
    for (int j = 0; j < m; ++j) spec.variable_names.push_back("x" + std::to_string(j));
    VectorXd prior(m);
    for (int j = 0; j < m; ++j) prior[j] = 1.0 + 2.0 * unif(rng);
    spec.prior = Prior::make(prior, PriorKind::CountLike);

    VectorXd x0(m);
    for (int j = 0; j < m; ++j) x0[j] = xdist(rng);

    auto random_row = [&](Sense sense, double slackness) {
        LinearConstraint row;
        row.sense = sense;
        double lhs = 0.0;
        int nonzero = 0;
        for (int j = 0; j < m; ++j) {
            double c = std::floor(cdist(rng) + 0.5);  // 0, 1 or 2
            if (c != 0.0) {
                row.coeffs[j] = c;
                row.exact_coeffs[j] = rational_from_double(c);
                lhs += c * x0[j];
                ++nonzero;
            }
        }
        if (nonzero == 0) {
            row.coeffs[0] = 1.0;
            row.exact_coeffs[0] = 1;
            lhs = x0[0];
        }
        row.rhs = lhs + slackness;
        row.exact_rhs = rational_from_double(row.rhs);
        return row;
    };

    // At most 6 rows in total, including the sum cap below.
    std::uniform_int_distribution<int> neq(1, 2), nin(1, 3);
    int eqs = neq(rng), ins = nin(rng);
    for (int i = 0; i < eqs; ++i) spec.equalities.push_back(random_row(Sense::Eq, 0.0));
    for (int i = 0; i < ins; ++i) spec.inequalities.push_back(random_row(Sense::Le, 3.0 * unif(rng)));
    // Cap the total so the maximum exists.
    LinearConstraint cap;
    cap.sense = Sense::Le;
    for (int j = 0; j < m; ++j) {
        cap.coeffs[j] = 1.0;
        cap.exact_coeffs[j] = 1;
    }
    cap.rhs = x0.sum() * (1.2 + 0.8 * unif(rng));
    cap.exact_rhs = rational_from_double(cap.rhs);
    spec.inequalities.push_back(std::move(cap));
    spec.validate();
    return spec;
}

/// Example 8.1 in its 16-variable form, diagonal forced to zero.
inline std::string transport16_json() {
    return R"({
      "variables": ["v11","v12","v13","v14","v21","v22","v23","v24","v31","v32","v33","v34","v41","v42","v43","v44"],
      "prior": {"values": [1,2,2,1,1,1,1,1,1,1,1,1,1,1,2,1], "kind": "count"},
      "equalities": [
        {"coeffs": {"v11": 1}, "rhs": 0},
        {"coeffs": {"v22": 1}, "rhs": 0},
        {"coeffs": {"v33": 1}, "rhs": 0},
        {"coeffs": {"v44": 1}, "rhs": 0},
        {"coeffs": {"v31": 1, "v41": 1}, "rhs": 122},
        {"coeffs": {"v14": 1, "v24": 1, "v34": 1}, "rhs": 172}
      ],
      "inequalities": [
        {"coeffs": {"v11": 1, "v12": 1, "v13": 1, "v14": 1}, "rhs": 200},
        {"coeffs": {"v21": 1, "v22": 1, "v23": 1, "v24": 1}, "rhs": 240},
        {"coeffs": {"v31": 1, "v32": 1, "v33": 1, "v34": 1}, "rhs": 160},
        {"coeffs": {"v41": 1, "v42": 1, "v43": 1, "v44": 1}, "rhs": 180},
        {"coeffs": {"v23": 1, "v24": 1}, "rhs": 154, "sense": "ge"}
      ]
    })";
}

/// Simplex-with-cap instance whose maximizer is the uniform vector s/m * 1;
/// admissible for the distance-mode machinery when m >= 3.
inline ProblemSpec uniform_instance(int m, double s) {
    ProblemSpec spec;
    for (int j = 0; j < m; ++j) spec.variable_names.push_back("x" + std::to_string(j));
    spec.prior = Prior::make(VectorXd::Ones(m), PriorKind::CountLike);
    LinearConstraint row;
    row.sense = Sense::Eq;
    row.rhs = s;
    row.exact_rhs = rational_from_double(s);
    for (int j = 0; j < m; ++j) {
        row.coeffs[j] = 1.0;
        row.exact_coeffs[j] = 1;
    }
    spec.equalities.push_back(std::move(row));
    spec.validate();
    return spec;
}

/// Independent maximizer for m = 3 specs with one equality: eliminate one
/// variable through the equality and grid-search the remaining plane.
inline double grid_max_g3(const ProblemSpec& spec, int coarse = 300) {
    if (spec.dim() != 3 || spec.equalities.size() != 1)
        throw std::runtime_error("grid oracle needs m = 3 and a single equality");
    const auto& eq = spec.equalities[0];
    int solve_for = eq.coeffs.rbegin()->first;  // highest-index variable in the row
    double c_solve = eq.coeffs.at(solve_for);
    std::array<int, 2> free_vars{};
    int fi = 0;
    for (int j = 0; j < 3; ++j)
        if (j != solve_for) free_vars[fi++] = j;

    auto ubs = variable_upper_bounds(spec, 0.0);
    const VectorXd& mu = spec.prior.values;
    double lo0 = 0.0, hi0 = ubs[free_vars[0]], lo1 = 0.0, hi1 = ubs[free_vars[1]];
    double best = -1e300, b0 = 0.0, b1 = 0.0;
    for (int level = 0; level < 4; ++level) {
        double s0 = (hi0 - lo0) / coarse, s1 = (hi1 - lo1) / coarse;
        for (int i = 0; i <= coarse; ++i) {
            for (int j = 0; j <= coarse; ++j) {
                VectorXd x(3);
                x[free_vars[0]] = lo0 + i * s0;
                x[free_vars[1]] = lo1 + j * s1;
                double partial = 0.0;
                for (const auto& [k, ck] : eq.coeffs)
                    if (k != solve_for) partial += ck * x[k];
                x[solve_for] = (eq.rhs - partial) / c_solve;
                if (x[solve_for] < 0.0 || !in_region(x, spec, 0.0)) continue;
                double g = g_rel_entropy(x, mu);
                if (g > best) {
                    best = g;
                    b0 = x[free_vars[0]];
                    b1 = x[free_vars[1]];
                }
            }
        }
        lo0 = std::max(0.0, b0 - 2.0 * s0);
        hi0 = std::min(ubs[free_vars[0]], b0 + 2.0 * s0);
        lo1 = std::max(0.0, b1 - 2.0 * s1);
        hi1 = std::min(ubs[free_vars[1]], b1 + 2.0 * s1);
    }
    return best;
}

/// Independent maximizer for m = 2: hierarchical grid search over the
/// feasible set, refined three levels below the starting resolution.
inline double grid_max_g(const ProblemSpec& spec, int coarse = 400) {
    if (spec.dim() != 2) throw std::runtime_error("grid oracle is for m = 2");
    auto ubs = variable_upper_bounds(spec, 0.0);
    const VectorXd& mu = spec.prior.values;

    if (spec.equalities.size() == 1) {
        // One equality: walk the segment parameterized by x0.
        const auto& eq = spec.equalities[0];
        double a0 = eq.coeffs.count(0) ? eq.coeffs.at(0) : 0.0;
        double a1 = eq.coeffs.count(1) ? eq.coeffs.at(1) : 0.0;
        if (a1 == 0.0) throw std::runtime_error("grid oracle: degenerate equality");
        double lo = 0.0, hi = ubs[0];
        double best = -1e300, best_t = lo;
        for (int level = 0; level < 4; ++level) {
            double step = (hi - lo) / coarse;
            for (int i = 0; i <= coarse; ++i) {
                double t = lo + i * step;
                VectorXd x(2);
                x[0] = t;
                x[1] = (eq.rhs - a0 * t) / a1;
                if (x[1] < 0.0 || !in_region(x, spec, 0.0)) continue;
                double g = g_rel_entropy(x, mu);
                if (g > best) {
                    best = g;
                    best_t = t;
                }
            }
            double width = (hi - lo) / coarse * 2.0;
            lo = std::max(0.0, best_t - width);
            hi = std::min(ubs[0], best_t + width);
        }
        return best;
    }

    double lo0 = 0.0, hi0 = ubs[0], lo1 = 0.0, hi1 = ubs[1];
    double best = -1e300, bx = 0.0, by = 0.0;
    for (int level = 0; level < 4; ++level) {
        double s0 = (hi0 - lo0) / coarse, s1 = (hi1 - lo1) / coarse;
        for (int i = 0; i <= coarse; ++i) {
            for (int j = 0; j <= coarse; ++j) {
                VectorXd x(2);
                x[0] = lo0 + i * s0;
                x[1] = lo1 + j * s1;
                if (!in_region(x, spec, 0.0)) continue;
                double g = g_rel_entropy(x, mu);
                if (g > best) {
                    best = g;
                    bx = x[0];
                    by = x[1];
                }
            }
        }
        lo0 = std::max(0.0, bx - 2.0 * s0);
        hi0 = std::min(ubs[0], bx + 2.0 * s0);
        lo1 = std::max(0.0, by - 2.0 * s1);
        hi1 = std::min(ubs[1], by + 2.0 * s1);
    }
    return best;
}

}  // namespace testers
