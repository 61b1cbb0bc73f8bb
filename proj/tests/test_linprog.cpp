#include <doctest.h>

#include "testers.hpp"

using namespace maxgrent;
using testers::load_fixture;

TEST_CASE("lp optimize") {
    ProblemSpec twovar = parse_spec(R"({"variables":["a","b"],
        "prior":{"values":[1,1]},
        "equalities":[{"coeffs":{"a":1,"b":1},"rhs":4}]})");
    auto res = lp_optimize(VectorXd::Ones(2), twovar, LpDirection::Max);
    CHECK(res.value == doctest::Approx(4.0));

    ProblemSpec ex21 = load_fixture("example_2_1.json");
    CHECK(lp_optimize(VectorXd::Ones(3), ex21, LpDirection::Max).value == doctest::Approx(10.0));
    CHECK(lp_optimize(VectorXd::Ones(3), ex21, LpDirection::Min).value == doctest::Approx(4.0));

    ProblemSpec infeas = parse_spec(R"({"variables":["a","b"],
        "prior":{"values":[1,1]},
        "equalities":[{"coeffs":{"a":1,"b":1},"rhs":-1}]})");
    CHECK_THROWS_AS(lp_optimize(VectorXd::Ones(2), infeas, LpDirection::Min), SolveError);

    ProblemSpec unb = parse_spec(R"({"variables":["a","b"],
        "prior":{"values":[1,1]},
        "equalities":[{"coeffs":{"a":1},"rhs":3}]})");
    CHECK_THROWS_AS(lp_optimize(VectorXd::Ones(2), unb, LpDirection::Max), SolveError);
}

TEST_CASE("sum range") {
    ProblemSpec t = load_fixture("transport.json");
    auto sr = sum_range(t);
    CHECK(sr.s1 == doctest::Approx(294.0).epsilon(1e-9));
    CHECK(sr.s2 == doctest::Approx(780.0).epsilon(1e-9));
    CHECK(sr.n1 == 288);
    CHECK(sr.n2 == 786);

    ProblemSpec fixed = parse_spec(R"({"variables":["a","b"],
        "prior":{"values":[1,1]},
        "equalities":[{"coeffs":{"a":1,"b":1},"rhs":4}]})");
    auto fr = sum_range(fixed);
    CHECK(fr.s1 == doctest::Approx(4.0));
    CHECK(fr.s2 == doctest::Approx(4.0));

    ProblemSpec ex21 = load_fixture("example_2_1.json");
    auto er = sum_range(ex21);
    CHECK(er.s1 == doctest::Approx(4.0));
    CHECK(er.s2 == doctest::Approx(10.0));
    CHECK(er.n1 == 2);
    CHECK(er.n2 == 12);
}

TEST_CASE("rho infinity") {
    ProblemSpec single = parse_spec(R"({"variables":["a","b"],
        "prior":{"values":[1,1]},
        "equalities":[{"coeffs":{"a":1,"b":1},"rhs":4}]})");
    CHECK(rho_inf(single) == doctest::Approx(2.0));

    ProblemSpec none = parse_spec(R"({"variables":["a","b"],"prior":{"values":[1,1]}})");
    CHECK(std::isinf(rho_inf(none)));

    ProblemSpec t = load_fixture("transport.json");
    CHECK(rho_inf(t) == doctest::Approx(122.0 / 3.0));

    // Scales linearly with the data.
    CHECK(rho_inf(scale_spec(t, 5.0)) == doctest::Approx(5.0 * rho_inf(t)));
    CHECK(rho_inf(scale_spec(single, 3.0)) == doctest::Approx(6.0));
}

TEST_CASE("forced zeros") {
    ProblemSpec pinned = parse_spec(R"({"variables":["a","b","c"],
        "prior":{"values":[1,1,1]},
        "equalities":[{"coeffs":{"a":1},"rhs":0},{"coeffs":{"b":1,"c":1},"rhs":3}]})");
    auto fz = forced_zeros(pinned);
    CHECK(fz == std::set<int>{0});

    ProblemSpec ex21 = load_fixture("example_2_1.json");
    CHECK(forced_zeros(ex21).empty());

    ProblemSpec t16 = parse_spec(testers::transport16_json());
    auto z16 = forced_zeros(t16);
    CHECK(z16 == std::set<int>{0, 5, 10, 15});  // the four diagonal slots

    // Adding a constraint can only grow the forced set.
    ProblemSpec more = pinned;
    LinearConstraint extra;
    extra.sense = Sense::Le;
    extra.coeffs[1] = 1.0;
    extra.exact_coeffs[1] = 1;
    extra.rhs = 0.0;
    extra.exact_rhs = 0;
    more.inequalities.push_back(extra);
    auto fz2 = forced_zeros(more);
    for (int j : fz) CHECK(fz2.count(j) == 1);
    CHECK(fz2.count(1) == 1);
}

TEST_CASE("degenerate pivoting terminates") {
    // A classic cycling instance for naive pivot rules; the optimum is -1/20
    // at (0.04, 0, 1, 0).
    ProblemSpec beale = parse_spec(R"({"variables":["x1","x2","x3","x4"],
        "prior":{"values":[1,1,1,1]},
        "inequalities":[
          {"coeffs":{"x1":0.25,"x2":-60,"x3":-0.04,"x4":9},"rhs":0},
          {"coeffs":{"x1":0.5,"x2":-90,"x3":-0.02,"x4":3},"rhs":0},
          {"coeffs":{"x3":1},"rhs":1}]})");
    VectorXd cost(4);
    cost << -0.75, 150, -0.02, 6;
    auto res = lp_optimize(cost, beale, LpDirection::Min);
    CHECK(res.value == doctest::Approx(-0.05).epsilon(1e-9));
    CHECK(res.point[2] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("feasibility probe") {
    CHECK(feasible(load_fixture("transport.json")));
    ProblemSpec infeas = parse_spec(R"({"variables":["a","b"],
        "prior":{"values":[1,1]},
        "inequalities":[{"coeffs":{"a":1,"b":1},"rhs":-2}]})");
    CHECK_FALSE(feasible(infeas));
}

TEST_CASE("lattice sums stay inside the lp range") {
    ProblemSpec ex21 = load_fixture("example_2_1.json");
    auto sr = sum_range(ex21);
    auto pts = enumerate_region(ex21, 0.0, sr, 1000);
    for (const auto& nu : pts) {
        CHECK(double(nu.n) >= sr.s1 - 1e-9);
        CHECK(double(nu.n) <= sr.s2 + 1e-9);
    }
}
