#include <algorithm>
#include <cmath>
#include <sstream>

#include "gs/cycle.hpp"

#include "doctest.h"

using namespace gs;

TEST_CASE("csv cycle loads with and without a slope column") {
    std::istringstream two("t,v\n0,0\n1,1\n2,2\n");
    DrivingCycle c = load_cycle(two);
    REQUIRE(c.size() == 3);
    CHECK(c.v[2] == 2.0);
    CHECK(c.alpha == std::vector<double>{0.0, 0.0, 0.0});

    std::istringstream three("t,v,alpha\n0,5,0.01\n1,6,0.02\n");
    DrivingCycle d = load_cycle(three);
    REQUIRE(d.size() == 2);
    CHECK(d.alpha[1] == 0.02);
}

TEST_CASE("csv errors carry the offending line number") {
    std::istringstream nonuniform("t,v\n0,0\n1,1\n3,2\n");
    CHECK_THROWS_WITH_AS(load_cycle(nonuniform), doctest::Contains("line 4"), ParseError);

    std::istringstream negative("t,v\n0,0\n1,-1\n");
    CHECK_THROWS_WITH_AS(load_cycle(negative), doctest::Contains("line 3"), ParseError);

    std::istringstream malformed("t,v\n0,0\n1,abc\n");
    CHECK_THROWS_AS(load_cycle(malformed), ParseError);

    std::istringstream empty("t,v\n");
    CHECK_THROWS_AS(load_cycle(empty), ParseError);
}

TEST_CASE("reference cycle has the expected duration, start, and distance") {
    DrivingCycle c = gen_nedc();
    REQUIRE(c.size() == 1181);
    CHECK(c.t.front() == 0.0);
    CHECK(c.t.back() == 1180.0);
    CHECK(c.v.front() == 0.0);
    CHECK(c.v.back() == 0.0);
    const double km = cycle_distance(c) / 1000.0;
    CHECK(km > 10.9);
    CHECK(km < 11.1);
}

TEST_CASE("reference cycle is deterministic") {
    DrivingCycle a = gen_nedc();
    DrivingCycle b = gen_nedc();
    CHECK(a.v == b.v);
    CHECK(a.t == b.t);
}

TEST_CASE("unsupported sampling interval is rejected") {
    CHECK_THROWS_AS((void)gen_nedc(0.7), ConfigError);
    CHECK_THROWS_AS((void)gen_nedc(-1.0), ConfigError);
}

TEST_CASE("acceleration is a forward difference with held tail") {
    DrivingCycle c;
    c.t = {0, 1, 2};
    c.v = {0, 1, 2};
    c.alpha = {0, 0, 0};
    std::vector<double> a = derive_accel(c);
    CHECK(a == std::vector<double>{1.0, 1.0, 1.0});

    DrivingCycle hold;
    hold.t = {0, 1, 2, 3};
    hold.v = {0, 2, 2, 2};
    hold.alpha = {0, 0, 0, 0};
    std::vector<double> ah = derive_accel(hold);
    CHECK(ah == std::vector<double>{2.0, 0.0, 0.0, 0.0});

    DrivingCycle constant;
    constant.t = {0, 1};
    constant.v = {5, 5};
    constant.alpha = {0, 0};
    CHECK(derive_accel(constant) == std::vector<double>{0.0, 0.0});

    DrivingCycle tiny;
    tiny.t = {0};
    tiny.v = {0};
    tiny.alpha = {0};
    CHECK_THROWS_AS((void)derive_accel(tiny), Error);
}

TEST_CASE("reference cycle accelerations stay within gentle bounds") {
    DrivingCycle c = gen_nedc();
    std::vector<double> a = derive_accel(c);
    const double worst = *std::max_element(a.begin(), a.end(),
                                           [](double x, double y) { return std::abs(x) < std::abs(y); });
    CHECK(std::abs(worst) <= 1.5);
}

TEST_CASE("window extraction counts and slices") {
    DrivingCycle c;
    for (int i = 0; i < 10; ++i) {
        c.t.push_back(i);
        c.v.push_back(i * 0.5);
        c.alpha.push_back(0.0);
    }
    std::vector<Scenario> w1 = windows(c, 8, 1);
    REQUIRE(w1.size() == 2);
    CHECK(w1[0].horizon() == 8);
    CHECK(w1[1].v_ref[0] == c.v[1]);
    CHECK(w1[0].x0 == 0.0);

    std::vector<Scenario> w2 = windows(c, 8, 10);
    CHECK(w2.size() == 1);

    CHECK_THROWS_AS((void)windows(c, 10, 1), Error);
}

TEST_CASE("window slices match the cycle exactly") {
    DrivingCycle c = gen_nedc();
    std::vector<double> a = derive_accel(c);
    std::vector<Scenario> w = windows(c, 8);
    REQUIRE(w.size() == 1173);
    for (std::size_t k : {std::size_t{0}, std::size_t{117}, std::size_t{1172}}) {
        for (std::size_t i = 0; i < 8; ++i) {
            CHECK(w[k].v_ref[i] == c.v[k + i]);
            CHECK(w[k].a_ref[i] == a[k + i]);
            CHECK(w[k].alpha_ref[i] == 0.0);
        }
    }
}

TEST_CASE("cycle invariants are validated") {
    DrivingCycle bad;
    bad.t = {0, 1, 2};
    bad.v = {0, 1};
    bad.alpha = {0, 0, 0};
    CHECK_THROWS_AS(bad.validate(), Error);

    DrivingCycle nonuniform;
    nonuniform.t = {0, 1, 3};
    nonuniform.v = {0, 0, 0};
    nonuniform.alpha = {0, 0, 0};
    CHECK_THROWS_AS(nonuniform.validate(), Error);
}
