#include <doctest.h>

#include "testers.hpp"

using namespace maxgrent;
using testers::load_fixture;

namespace {

double log10_of(double natural_log) { return natural_log / std::log(10.0); }

struct Solved {
    ProblemSpec spec;
    Solution sol;
    SumRange range;
};

Solved solved_fixture(const std::string& name) {
    Solved out{load_fixture(name), {}, {}};
    out.sol = solve(out.spec);
    out.range = sum_range(out.spec);
    return out;
}

}  // namespace

TEST_CASE("constant block") {
    // Uniform maximizer: the curvature constant collapses to 1.
    ProblemSpec uni = testers::uniform_instance(3, 12.0);
    Solution sol = solve(uni);
    SumRange sr = sum_range(uni);
    CConstants cc = c_constants(sol, sr, uni.prior);
    CHECK(cc.log_C4 == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(all_ok(cc.flags));
    CHECK(std::isfinite(cc.log_C3));
    CHECK(cc.log_C3 > 0.0);  // width-zero sum range still leaves C3 positive

    // C1 is the C3 block with its analytic prefactor.
    double prefactor = 0.5 * std::log(M_PI) - std::log(4.0) - 0.0 * std::log(2.0) -
                       std::lgamma(1.5);
    CHECK(cc.log_C1 == doctest::Approx(prefactor + cc.log_C3).epsilon(1e-12));

    // Transport: the scaled constant reproduces the back-solved value.
    Solved t = solved_fixture("transport.json");
    ConcentrationParams p;
    p.eta = 0.01;
    p.delta = 0.01;
    ScalingConstants sc =
        scaling_constants(t.sol, t.spec, t.range, ConcentrationMode::Value, p, 1e-15);
    CHECK(-sc.log_K == doctest::Approx(83.8).epsilon(2e-3));
    CHECK(log10_of(sc.log_K) == doctest::Approx(-36.4).epsilon(2e-3));
    CHECK(sc.beta == doctest::Approx(11.5));
    CHECK(sc.alpha == doctest::Approx(20.79).epsilon(1e-3));
    CHECK(sc.gamma == doctest::Approx(118.4).epsilon(1e-3));
}

TEST_CASE("value ratio bounds reproduce the published table") {
    Solved t = solved_fixture("transport.json");
    auto check = [&](double eta, double want, double tol_log10) {
        auto b = value_ratio_bound(t.sol, t.spec, t.range, eta, 0.01);
        CHECK(std::abs(log10_of(b.log_bound) - std::log10(want)) <= tol_log10);
    };
    check(0.04, 0.542, std::log10(2.0));
    check(0.05, 5.8e8, 0.5);
    check(0.10, 8.3e53, 1.0);
    check(0.20, 1.7e144, 1.0);

    // Strictly increasing in eta.
    double prev = -1e300;
    for (double eta = 0.02; eta < 0.6; eta += 0.02) {
        auto b = value_ratio_bound(t.sol, t.spec, t.range, eta, 0.01);
        CHECK(b.log_bound > prev);
        prev = b.log_bound;
    }
    CHECK_THROWS_AS(value_ratio_bound(t.sol, t.spec, t.range, 1.2, 0.01), std::invalid_argument);
}

TEST_CASE("growth condition factor") {
    Solved t = solved_fixture("transport.json");
    double inf_norm = t.sol.x_star.lpNorm<Eigen::Infinity>();
    double one_norm = t.sol.x_star.lpNorm<1>();
    CHECK(k_factor(0.1, t.sol.x_star) == doctest::Approx(0.514).epsilon(2e-3));

    // Limit as theta -> 0.
    double limit = 1.0 / (2.0 * (1.0 - inf_norm / one_norm));
    CHECK(k_factor(1e-9, t.sol.x_star) == doctest::Approx(limit).epsilon(1e-6));

    // Ratio exactly 2 leaves an empty admissible interval.
    VectorXd flat(2);
    flat << 3.0, 3.0;
    CHECK_THROWS_AS(k_factor(0.05, flat), std::invalid_argument);

    // Gap grows with theta and is positive.
    double prev = 0.0;
    for (double th = 0.05; th <= 0.35; th += 0.05) {
        double gap = growth_gap(th, t.sol.x_star);
        CHECK(gap > prev);
        prev = gap;
    }
}

TEST_CASE("growth condition dominates sampled feasible points") {
    ProblemSpec uni = testers::uniform_instance(3, 12.0);
    Solution sol = solve(uni);
    const double inf_norm = sol.x_star.lpNorm<Eigen::Infinity>();

    testers::Rng rng(41);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (double theta : {0.2, 0.35, 0.5}) {
        double gap = growth_gap(theta, sol.x_star);
        int outside = 0;
        for (int t = 0; t < 20000; ++t) {
            // Random point of the simplex slice sum = 12.
            double a = unif(rng), b = unif(rng);
            if (a + b > 1.0) {
                a = 1.0 - a;
                b = 1.0 - b;
            }
            VectorXd x(3);
            x << 12.0 * a, 12.0 * b, 12.0 * (1.0 - a - b);
            if ((x - sol.x_star).lpNorm<Eigen::Infinity>() <= theta * inf_norm) continue;
            ++outside;
            CHECK(sol.g_star - g_rel_entropy(x, uni.prior.values) >= gap - 1e-9);
        }
        CHECK(outside > 1000);
    }
}

TEST_CASE("distance ratio bound") {
    Solved t = solved_fixture("transport.json");
    double gt = g_tilde(t.sol.duals, t.spec);

    auto weak = distance_ratio_bound(t.sol, t.spec, t.range, 0.1, 0.0045, gt);
    CHECK(log10_of(weak.log_bound) == doctest::Approx(std::log10(3.5e-41)).epsilon(0.03));

    // With delta = 0 the exponent reduces to the pure growth term.
    auto base = distance_ratio_bound(t.sol, t.spec, t.range, 0.1, 0.0, gt);
    double growth = growth_gap(0.1, t.sol.x_star);
    CHECK(base.log_bound - weak.log_bound == doctest::Approx(0.0045 * gt).epsilon(1e-9));
    CHECK(base.log_bound == doctest::Approx(weak.log_bound + 0.0045 * gt).epsilon(1e-9));
    CHECK(growth > 0.0);

    CHECK_THROWS_AS(distance_ratio_bound(t.sol, t.spec, t.range, 5.0, 0.01, gt),
                    std::invalid_argument);
}

TEST_CASE("root of the threshold equation") {
    CHECK(c3_root(5.0, 2.0, 4.0) == doctest::Approx(1.0));  // alpha >= gamma
    CHECK(c3_root(20.79, 11.5, 118.4) == doctest::Approx(6.75).epsilon(2e-3));
    CHECK(c3_root(20.79, 11.5, 152.9) == doctest::Approx(8.54).epsilon(2e-3));
    CHECK_THROWS_AS(c3_root(-1.0, 2.0, 3.0), std::invalid_argument);

    // The root satisfies its equation and bracket.
    for (auto [a, b, g] : {std::tuple{0.4, 11.5, 90.7}, {3.0, 2.5, 10.8}, {0.016, 11.5, 90.7}}) {
        double c = c3_root(a, b, g);
        if (c > 1.0) {
            CHECK(std::abs(a * c - b * std::log(c) - g) <= 1e-8);
            CHECK(c >= g / a - 1e-9);
            double upper = a <= b + g ? g / a + 2 * b / a * std::log((b + g) / a)
                                      : g / a + std::log(g / a);
            CHECK(c <= upper + 1e-9);
        }
    }
}

TEST_CASE("value thresholds reproduce the published table") {
    Solved t = solved_fixture("transport.json");
    auto run = [&](double eta, double eps) {
        ConcentrationParams p;
        p.eta = eta;
        p.delta = 0.01;
        return threshold(t.sol, t.spec, t.range, ConcentrationMode::Value, p, eps);
    };
    CHECK(run(0.01, 1e-15).c_hat == doctest::Approx(6.75).epsilon(0.015));
    CHECK(run(0.01, 1e-20).c_hat == doctest::Approx(7.35).epsilon(0.014));
    CHECK(run(0.01, 1e-30).c_hat == doctest::Approx(8.54).epsilon(0.018));
    CHECK(run(0.005, 1e-10).c_hat == doctest::Approx(13.1).epsilon(0.023));

    // Monotone: larger epsilon can only lower the threshold.
    double prev = 0.0;
    for (double eps : {1e-30, 1e-20, 1e-15, 1e-10, 1e-5}) {
        double c = run(0.01, eps).c_hat;
        if (prev > 0.0) CHECK(c <= prev + 1e-12);
        prev = c;
    }

    auto rep = run(0.01, 1e-15);
    CHECK(rep.c_hat == std::max({rep.c1, rep.c2, rep.c3}));
    CHECK(rep.beta == doctest::Approx(11.5));
    for (const auto& f : rep.flags)
        if (f.name == "c3_bracket") CHECK(f.ok);
    // Threshold delivers the requested odds at c = c_hat.
    CHECK(-rep.neg_log_K - rep.beta * std::log(rep.c_hat) + rep.alpha * rep.c_hat >=
          rep.log_inv_epsilon - 1e-6);
}

TEST_CASE("distance thresholds reproduce the published table") {
    Solved t = solved_fixture("transport.json");
    auto run = [&](double eps, double del, double th) {
        ConcentrationParams p;
        p.theta = th;
        p.delta = del;
        return threshold(t.sol, t.spec, t.range, ConcentrationMode::Distance, p, eps);
    };
    CHECK(run(1e-3, 1e-5, 0.1).c_hat == doctest::Approx(410.0).epsilon(0.05));
    CHECK(run(1e-20, 1e-5, 0.05).c_hat == doctest::Approx(2490.0).epsilon(0.05));
    CHECK(run(1e-3, 1e-6, 0.02).c_hat == doctest::Approx(12500.0).epsilon(0.05));
    CHECK(run(1e-10, 1e-5, 0.1).c_hat == doctest::Approx(441.0).epsilon(0.05));
    CHECK(std::isfinite(run(1e-3, 1e-5, 0.1).k_factor_value));
    CHECK(run(1e-3, 1e-5, 0.1).alpha == doctest::Approx(0.40).epsilon(0.01));
}

TEST_CASE("eta-condition variant switch") {
    Solved t = solved_fixture("transport.json");
    ConcentrationParams p;
    p.eta = 0.01;
    p.delta = 0.01;
    ThresholdOptions alt;
    alt.eta_condition_alt_term = true;
    auto base = threshold(t.sol, t.spec, t.range, ConcentrationMode::Value, p, 1e-15);
    auto swapped = threshold(t.sol, t.spec, t.range, ConcentrationMode::Value, p, 1e-15, alt);
    // The variant only perturbs the quadratic inside c1; at these scales the
    // threshold itself is unchanged.
    CHECK(swapped.c3 == doctest::Approx(base.c3));
    CHECK(swapped.c_hat == doctest::Approx(base.c_hat).epsilon(1e-6));
}

TEST_CASE("divergence solution falls in the far set below its eta ceiling") {
    Solved t = solved_fixture("transport.json");
    MinidivSolution md = solve_minidiv(t.spec);
    double g_hat = g_rel_entropy(md.u_star, t.spec.prior.values);
    double eta_max = 1.0 - g_hat / t.sol.g_star;
    CHECK(eta_max == doctest::Approx(0.7665).epsilon(1e-3));
    // The value classification puts u* in B exactly for eta below the ceiling.
    for (double eta : {0.2, 0.5, 0.76}) CHECK(g_hat < (1.0 - eta) * t.sol.g_star);
    CHECK(g_hat >= (1.0 - 0.78) * t.sol.g_star);
}

TEST_CASE("density-prior thresholds and probabilistic bounds") {
    Solved d = solved_fixture("transport_density.json");
    ConcentrationParams p;
    p.theta = 0.1;
    p.delta = 1e-5;
    auto rep = threshold(d.sol, d.spec, d.range, ConcentrationMode::Distance, p, 1e-3);
    CHECK(rep.c_hat == doctest::Approx(414.0).epsilon(0.05));
    CHECK(rep.prior_kind == PriorKind::Density);

    ConcentrationParams v;
    v.delta = 0.01;
    v.eta = 1.0;
    auto b1 = prob_ratio_bound(d.sol, d.spec, d.range, ConcentrationMode::Value, v, 10.0);
    CHECK(log10_of(b1.log_bound) == doctest::Approx(47.6).epsilon(0.03));
    v.eta = 1.5;
    auto b2 = prob_ratio_bound(d.sol, d.spec, d.range, ConcentrationMode::Value, v, 5.0);
    CHECK(log10_of(b2.log_bound) == doctest::Approx(25.7).epsilon(0.04));
    v.eta = 0.5;
    auto b3 = prob_ratio_bound(d.sol, d.spec, d.range, ConcentrationMode::Value, v, 5.0);
    CHECK(log10_of(b3.log_bound) == doctest::Approx(-25.05).epsilon(0.04));

    CHECK_THROWS_AS(
        prob_ratio_bound(solved_fixture("transport.json").sol, load_fixture("transport.json"),
                         d.range, ConcentrationMode::Value, v, 5.0),
        std::invalid_argument);
}

TEST_CASE("scaling covariance of the exponent") {
    Solved t = solved_fixture("transport.json");
    ConcentrationParams p;
    p.eta = 0.01;
    p.delta = 0.01;
    ScalingConstants base =
        scaling_constants(t.sol, t.spec, t.range, ConcentrationMode::Value, p, 1e-10);
    for (double c : {2.0, 5.0}) {
        ProblemSpec scaled = scale_spec(t.spec, c);
        Solution ssol = solve(scaled);
        SumRange ssr = sum_range(scaled);
        ScalingConstants sc =
            scaling_constants(ssol, scaled, ssr, ConcentrationMode::Value, p, 1e-10);
        CHECK(sc.alpha == doctest::Approx(c * base.alpha).epsilon(1e-6));
    }
    ConcentrationParams pd;
    pd.theta = 0.1;
    pd.delta = 1e-5;
    ScalingConstants based =
        scaling_constants(t.sol, t.spec, t.range, ConcentrationMode::Distance, pd, 1e-10);
    ProblemSpec scaled = scale_spec(t.spec, 3.0);
    Solution ssol = solve(scaled);
    ScalingConstants scd =
        scaling_constants(ssol, scaled, sum_range(scaled), ConcentrationMode::Distance, pd, 1e-10);
    CHECK(scd.alpha == doctest::Approx(3.0 * based.alpha).epsilon(1e-6));
}

TEST_CASE("constants move the right way under scaling") {
    Solved t = solved_fixture("transport.json");
    CConstants base = c_constants(t.sol, t.range, t.spec.prior);
    const int m = t.spec.dim();
    for (double c : {1.0, 2.0, 5.0, 10.0}) {
        ProblemSpec scaled = scale_spec(t.spec, c);
        Solution ssol = solve(scaled);
        SumRange ssr = sum_range(scaled);
        CConstants sc = c_constants(ssol, ssr, scaled.prior);
        // The true decay exponent of C2 under scaling is (m-1)/2.
        CHECK(sc.log_C2 >= base.log_C2 - (m - 1.0) / 2.0 * std::log(c) - 1e-6);
        CHECK(sc.log_C3 <= base.log_C3 + (m + 1.0) / 2.0 * std::log(c) + 1e-6);
        double floor_62 = -0.125 * ((t.sol.x_star.array() - 0.5).inverse().sum() -
                                    double(m) * m / t.sol.s_star);
        CHECK(sc.log_C4 >= floor_62 - 1e-6);
    }
}

TEST_CASE("no concentration when the exponent is nonpositive") {
    Solved t = solved_fixture("transport.json");
    ConcentrationParams p;
    p.theta = 0.1;
    p.delta = 0.1;  // delta so large that the widening term swamps the growth
    CHECK_THROWS_AS(
        threshold(t.sol, t.spec, t.range, ConcentrationMode::Distance, p, 1e-3), SolveError);
}

TEST_CASE("x* at or below one half is flagged") {
    ProblemSpec low = parse_spec(R"({"variables":["a","b","c"],
        "prior":{"values":[1,1,1],"kind":"count"},
        "equalities":[{"coeffs":{"a":1,"b":1,"c":1},"rhs":1.2}]})");
    Solution sol = solve(low);
    CHECK_FALSE(sol.warnings.empty());
    SumRange sr = sum_range(low);
    CConstants cc = c_constants(sol, sr, low.prior);
    CHECK_FALSE(all_ok(cc.flags));
    CHECK(std::isnan(cc.log_C4));
    auto b = value_ratio_bound(sol, low, sr, 0.3, 0.3);
    CHECK(std::isnan(b.log_bound));
    CHECK_FALSE(all_ok(b.flags));
}
