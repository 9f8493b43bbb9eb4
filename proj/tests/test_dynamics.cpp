#include "sotrack/dynamics.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

using namespace sotrack;

namespace {

std::vector<Vec3> zero_controls(const TimeGrid& grid) {
    return std::vector<Vec3>(grid.node_count(), Vec3{});
}

State circular_state(double radius, double mu) {
    return State{{radius, 0.0, 0.0}, {0.0, std::sqrt(mu / radius), 0.0}};
}

double circular_period(double radius, double mu) {
    return 2.0 * M_PI * std::sqrt(radius * radius * radius / mu);
}

Vec3 rotate_z90(const Vec3& v) { return {-v.y, v.x, v.z}; }
Vec3 rotate_x90(const Vec3& v) { return {v.x, -v.z, v.y}; }

}  // namespace

TEST_CASE("gravity acceleration matches the inverse-square oracle") {
    const Vec3 r{6378.0, 0.0, 0.0};
    const Vec3 g = gravity_accel(r, kEarthMu);
    // Scalar oracle: magnitude mu/R^2, direction -r/R.
    const double expected = kEarthMu / (6378.0 * 6378.0);
    CHECK(g.x == Catch::Approx(-expected).epsilon(1e-14));
    CHECK(g.x == Catch::Approx(-0.009798706277192855).margin(1e-15));
    CHECK(g.y == 0.0);
    CHECK(g.z == 0.0);
}

TEST_CASE("gravity is antisymmetric under r -> -r") {
    const Vec3 r{6378.0, 0.0, 0.0};
    const Vec3 gp = gravity_accel(r, kEarthMu);
    const Vec3 gm = gravity_accel(-r, kEarthMu);
    CHECK(gm.x == -gp.x);
    CHECK(gm.y == -gp.y);
    CHECK(gm.z == -gp.z);
}

TEST_CASE("gravity magnitude depends only on radius") {
    std::mt19937 rng(42);
    std::normal_distribution<double> dist(0.0, 1.0);
    const double R = 7000.0;
    const double expected = kEarthMu / (R * R);
    for (int trial = 0; trial < 50; ++trial) {
        Vec3 dir{dist(rng), dist(rng), dist(rng)};
        dir = dir / norm(dir);
        const Vec3 g = gravity_accel(dir * R, kEarthMu);
        CHECK(norm(g) == Catch::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("gravity rejects a zero radius") {
    CHECK_THROWS_AS(gravity_accel(Vec3{0, 0, 0}, kEarthMu), std::domain_error);
}

TEST_CASE("rk4 step is exact for constant acceleration") {
    const State s{{1.0, -2.0, 3.0}, {0.5, 0.25, -0.125}};
    const Vec3 u{1e-3, -2e-3, 5e-4};
    const double dt = 7.0;
    const auto [next, stg] = rk4_step(s, u, u, dt, 0.0);

    // With mu = 0 the quadratic kinematics are reproduced to round-off.
    for (int c = 0; c < 3; ++c) {
        CHECK(next.r[c] == Catch::Approx(s.r[c] + s.v[c] * dt + 0.5 * u[c] * dt * dt).epsilon(1e-15));
        CHECK(next.v[c] == Catch::Approx(s.v[c] + u[c] * dt).epsilon(1e-15));
    }
    for (int m = 0; m < 4; ++m) {
        CHECK(stg.kv[m].x == u.x);
        CHECK(stg.kv[m].y == u.y);
        CHECK(stg.kv[m].z == u.z);
    }
}

TEST_CASE("rk4 step preserves the radius of a circular orbit") {
    const double R = 6878.0;
    const State s = circular_state(R, kEarthMu);
    const auto [next, stg] = rk4_step(s, Vec3{}, Vec3{}, 10.0, kEarthMu);
    (void)stg;
    CHECK(norm(next.r) == Catch::Approx(R).epsilon(1e-9));
}

TEST_CASE("first stage distance variable is mu over r cubed") {
    const State s{{5123.0, -3456.0, 1234.0}, {1.0, 2.0, 3.0}};
    const auto [next, stg] = rk4_step(s, Vec3{0.1, 0.0, 0.0}, Vec3{0.0, 0.2, 0.0}, 4.0, kEarthMu);
    (void)next;
    const double rn = norm(s.r);
    CHECK(stg.dtil[0] == Catch::Approx(kEarthMu / (rn * rn * rn)).epsilon(1e-14));
}

TEST_CASE("propagation closes a circular orbit over one period") {
    const double R = 6878.0;
    const double T = circular_period(R, kEarthMu);
    // Choose the step nearest 10 s that lands exactly on the analytic period.
    const int n = static_cast<int>(std::lround(T / 10.0));
    const TimeGrid grid{0.0, T / n, n};
    const State s0 = circular_state(R, kEarthMu);
    const Trajectory traj = propagate(s0, zero_controls(grid), grid, kEarthMu);
    const Vec3 err = traj.states.back().r - s0.r;
    CHECK(norm(err) < 1e-3);
}

TEST_CASE("energy and angular momentum drift stay below 1e-8 over an hour") {
    const double R = 6878.0;
    const TimeGrid grid{0.0, 10.0, 360};
    const State s0 = circular_state(R, kEarthMu);
    const Trajectory traj = propagate(s0, zero_controls(grid), grid, kEarthMu);

    const auto q0 = conserved_quantities(s0, kEarthMu);
    double max_energy_drift = 0.0;
    double max_h_drift = 0.0;
    for (const State& s : traj.states) {
        const auto q = conserved_quantities(s, kEarthMu);
        max_energy_drift = std::max(max_energy_drift,
                                    std::abs(q.energy - q0.energy) / std::abs(q0.energy));
        max_h_drift =
            std::max(max_h_drift, norm(q.angular_momentum - q0.angular_momentum) /
                                      norm(q0.angular_momentum));
    }
    CHECK(max_energy_drift <= 1e-8);
    CHECK(max_h_drift <= 1e-8);

    // Cross-check: a 1 s grid drifts far less, consistent with O(dt^4).
    const TimeGrid fine{0.0, 1.0, 3600};
    const Trajectory ref = propagate(s0, zero_controls(fine), fine, kEarthMu);
    const auto qf = conserved_quantities(ref.states.back(), kEarthMu);
    const double fine_drift = std::abs(qf.energy - q0.energy) / std::abs(q0.energy);
    CHECK(fine_drift < max_energy_drift / 100.0);
}

TEST_CASE("propagation commutes with axis-aligned rotations") {
    const State s0{{6878.0, 120.0, -340.0}, {0.3, 7.5, 0.4}};
    const TimeGrid grid{0.0, 10.0, 50};
    std::vector<Vec3> controls(grid.node_count());
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> dist(-1e-4, 1e-4);
    for (Vec3& u : controls) u = {dist(rng), dist(rng), dist(rng)};

    const Trajectory base = propagate(s0, controls, grid, kEarthMu);

    for (auto rotate : {rotate_z90, rotate_x90}) {
        const State s0_rot{rotate(s0.r), rotate(s0.v)};
        std::vector<Vec3> controls_rot(controls.size());
        for (std::size_t i = 0; i < controls.size(); ++i) controls_rot[i] = rotate(controls[i]);
        const Trajectory rot = propagate(s0_rot, controls_rot, grid, kEarthMu);
        for (std::size_t i = 0; i < base.states.size(); ++i) {
            const Vec3 expect_r = rotate(base.states[i].r);
            const Vec3 expect_v = rotate(base.states[i].v);
            CHECK(norm(rot.states[i].r - expect_r) < 1e-12 * std::max(1.0, norm(expect_r)));
            CHECK(norm(rot.states[i].v - expect_v) < 1e-12 * std::max(1.0, norm(expect_v)));
        }
    }
}

TEST_CASE("propagation reports the offending interval on domain errors") {
    // Force-free straight line through the origin: r(t) = (2 - t, 0, 0).
    // Interval 1's last stage position lands exactly on r = 0.
    const State s0{{2.0, 0.0, 0.0}, {-1.0, 0.0, 0.0}};
    const TimeGrid grid{0.0, 1.0, 10};
    try {
        propagate(s0, zero_controls(grid), grid, 0.0);
        FAIL("expected a PropagationError");
    } catch (const PropagationError& e) {
        CHECK(e.interval() == 1);
    }
}

TEST_CASE("propagate validates the controls length") {
    const TimeGrid grid{0.0, 10.0, 5};
    const std::vector<Vec3> wrong(3);
    CHECK_THROWS_AS(propagate(circular_state(7000.0, kEarthMu), wrong, grid, kEarthMu),
                    std::invalid_argument);
}

TEST_CASE("conserved quantities match the vis-viva identity on circular orbits") {
    const double R = 6878.0;
    const auto q = conserved_quantities(circular_state(R, kEarthMu), kEarthMu);
    CHECK(q.energy == Catch::Approx(-kEarthMu / (2.0 * R)).epsilon(1e-13));
}

TEST_CASE("angular momentum vanishes for radial motion") {
    const State s{{7000.0, 0.0, 0.0}, {3.0, 0.0, 0.0}};
    const auto q = conserved_quantities(s, kEarthMu);
    CHECK(norm(q.angular_momentum) == 0.0);
}
