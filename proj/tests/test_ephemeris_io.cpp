#include "sotrack/config.hpp"
#include "sotrack/ephemeris.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

using namespace sotrack;

namespace {

std::string header_line() { return std::string(kEphemerisHeader) + "\n"; }

}  // namespace

TEST_CASE("a well-formed three-row file loads") {
    std::istringstream in(header_line() +
                          "0,7000,0,0,0,7.5,0\n"
                          "10,6999,75,0,-0.2,7.49,0\n"
                          "20,6996,150,0,-0.4,7.47,0\n");
    const TargetEphemeris eph = load_ephemeris(in);
    REQUIRE(eph.size() == 3);
    CHECK(eph.epochs[2] == 20.0);
    CHECK(eph.r_bar[1].y == 75.0);
    CHECK(eph.v_bar[0].y == 7.5);
}

TEST_CASE("a row with six fields is rejected with its row number") {
    std::istringstream in(header_line() +
                          "0,7000,0,0,0,7.5,0\n"
                          "10,6999,75,0,-0.2,7.49\n");
    try {
        load_ephemeris(in);
        FAIL("expected EphemerisError");
    } catch (const EphemerisError& e) {
        CHECK(e.kind() == EphemerisErrorKind::MalformedRow);
        CHECK(e.row() == 3);
    }
}

TEST_CASE("non-numeric fields are rejected") {
    std::istringstream in(header_line() + "0,7000,zero,0,0,7.5,0\n");
    try {
        load_ephemeris(in);
        FAIL("expected EphemerisError");
    } catch (const EphemerisError& e) {
        CHECK(e.kind() == EphemerisErrorKind::MalformedRow);
        CHECK(e.row() == 2);
    }
}

TEST_CASE("non-uniform spacing is rejected") {
    std::istringstream in(header_line() +
                          "0,7000,0,0,0,7.5,0\n"
                          "10,6999,75,0,0,7.5,0\n"
                          "20,6996,150,0,0,7.5,0\n"
                          "30.5,6991,225,0,0,7.5,0\n");
    try {
        load_ephemeris(in);
        FAIL("expected EphemerisError");
    } catch (const EphemerisError& e) {
        CHECK(e.kind() == EphemerisErrorKind::NonUniformSpacing);
        CHECK(e.row() == 5);
    }
}

TEST_CASE("non-monotone epochs are rejected") {
    std::istringstream in(header_line() +
                          "0,7000,0,0,0,7.5,0\n"
                          "10,6999,75,0,0,7.5,0\n"
                          "5,6996,150,0,0,7.5,0\n");
    try {
        load_ephemeris(in);
        FAIL("expected EphemerisError");
    } catch (const EphemerisError& e) {
        CHECK(e.kind() == EphemerisErrorKind::NonMonotoneTime);
        CHECK(e.row() == 4);
    }
}

TEST_CASE("zero radius rows are rejected") {
    std::istringstream in(header_line() +
                          "0,7000,0,0,0,7.5,0\n"
                          "10,0,0,0,0,7.5,0\n");
    try {
        load_ephemeris(in);
        FAIL("expected EphemerisError");
    } catch (const EphemerisError& e) {
        CHECK(e.kind() == EphemerisErrorKind::ZeroRadius);
        CHECK(e.row() == 3);
    }
}

TEST_CASE("a wrong header is rejected") {
    std::istringstream in("time,x,y,z,vx,vy,vz\n0,7000,0,0,0,7.5,0\n");
    CHECK_THROWS_AS(load_ephemeris(in), EphemerisError);
}

TEST_CASE("write then load reproduces every bit") {
    const TimeGrid grid{0.0, 10.0, 60};
    const TargetEphemeris eph = default_target(grid);

    std::ostringstream out;
    save_ephemeris(eph, out);
    std::istringstream in(out.str());
    const TargetEphemeris back = load_ephemeris(in);

    REQUIRE(back.size() == eph.size());
    for (std::size_t i = 0; i < eph.size(); ++i) {
        CHECK(back.epochs[i] == eph.epochs[i]);
        CHECK(back.r_bar[i].x == eph.r_bar[i].x);
        CHECK(back.r_bar[i].y == eph.r_bar[i].y);
        CHECK(back.r_bar[i].z == eph.r_bar[i].z);
        CHECK(back.v_bar[i].x == eph.v_bar[i].x);
        CHECK(back.v_bar[i].y == eph.v_bar[i].y);
        CHECK(back.v_bar[i].z == eph.v_bar[i].z);
    }
}

TEST_CASE("generated circular targets hold their radius") {
    const double R = 6878.0;
    const double v = std::sqrt(kEarthMu / R);  // 7.6127 km/s
    CHECK(v == Catch::Approx(7.612683933636782).epsilon(1e-12));
    const TimeGrid grid{0.0, 10.0, 360};
    const TargetEphemeris eph =
        generate_keplerian_target(State{{R, 0, 0}, {0, v, 0}}, grid, kEarthMu);
    for (std::size_t i = 0; i < eph.size(); ++i) {
        CHECK(norm(eph.r_bar[i]) == Catch::Approx(R).epsilon(1e-6));
    }
}

TEST_CASE("the default target is a 6878 km perigee ellipse with e = 0.02") {
    const TimeGrid grid{0.0, 10.0, 360};
    const TargetEphemeris eph = default_target(grid);
    CHECK(norm(eph.r_bar.front()) == 6878.0);

    // Energy of an unthrusted arc is constant; its value pins the ellipse.
    const auto q0 = conserved_quantities(State{eph.r_bar[0], eph.v_bar[0]}, kEarthMu);
    const double a = 6878.0 / (1.0 - 0.02);
    CHECK(q0.energy == Catch::Approx(-kEarthMu / (2.0 * a)).epsilon(1e-12));
    for (std::size_t i = 0; i < eph.size(); i += 30) {
        const auto q = conserved_quantities(State{eph.r_bar[i], eph.v_bar[i]}, kEarthMu);
        CHECK(std::abs(q.energy - q0.energy) / std::abs(q0.energy) <= 1e-8);
    }
}

TEST_CASE("grid matching tolerates only uniform aligned epochs") {
    const TimeGrid grid{0.0, 10.0, 10};
    TargetEphemeris eph = default_target(grid);
    CHECK(eph.matches_grid(grid));
    CHECK_FALSE(eph.matches_grid(TimeGrid{0.0, 10.0, 11}));
    CHECK_FALSE(eph.matches_grid(TimeGrid{0.0, 9.0, 10}));
    eph.epochs[5] += 2e-3;
    CHECK_FALSE(eph.matches_grid(grid));
}

TEST_CASE("config parsing, overrides and hashing") {
    std::istringstream in(
        "# case study\n"
        "dt = 60\n"
        "n = 60\n"
        "n_budget = 17\n"
        "delta0 = 10 10 10\n"
        "beta = 0.4\n");
    const ProblemConfig c = parse_config(in);
    CHECK(c.grid.dt == 60.0);
    CHECK(c.grid.n_intervals == 60);
    CHECK(c.n_budget == 17);
    CHECK(c.beta == 0.4);
    CHECK(c.delta0.x == 10.0);
    validate(c);

    const ProblemConfig d;
    CHECK(config_hash(c) != config_hash(d));
    CHECK(config_hash(c) == config_hash(c));

    std::istringstream bad("whatever = 1\n");
    CHECK_THROWS_AS(parse_config(bad), std::invalid_argument);
}

TEST_CASE("config invariants are enforced") {
    ProblemConfig c;
    c.delta_min = 60.0;  // above delta_max
    CHECK_THROWS_AS(validate(c), std::invalid_argument);

    ProblemConfig c2;
    c2.delta0 = {100.0, 100.0, 100.0};  // outside the band
    CHECK_THROWS_AS(validate(c2), std::invalid_argument);

    ProblemConfig c3;
    c3.n_budget = 1000;  // above N+1
    CHECK_THROWS_AS(validate(c3), std::invalid_argument);

    ProblemConfig c4;
    c4.norm_q = 3;
    CHECK_THROWS_AS(validate(c4), std::invalid_argument);
}
