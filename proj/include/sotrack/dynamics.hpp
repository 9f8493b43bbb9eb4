#pragma once

#include "sotrack/vec3.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sotrack {

/// Geocentric gravitational constant [km^3/s^2].
inline constexpr double kEarthMu = 398600.436;

/// Chaser state: geocentric position [km] and inertial velocity [km/s].
struct State {
    Vec3 r;
    Vec3 v;
};

/// One interval's RK4 stage values.
///
/// k[m] are position slopes [km/s], kv[m] velocity slopes [km/s^2], and
/// dtil[m] the scaled inverse cubic distances mu/|p_m|^3 [s^-2] evaluated at
/// the stage positions p_m. Working with mu*d instead of the raw inverse cube
/// keeps the values around 1e-6..1e-4 instead of 1e-12.
struct StageBlock {
    std::array<Vec3, 4> k;
    std::array<Vec3, 4> kv;
    std::array<double, 4> dtil;
};

/// Uniform time grid: N intervals, N+1 nodes, t_i = t0 + i*dt.
struct TimeGrid {
    double t0 = 0.0;
    double dt = 0.0;
    int n_intervals = 0;

    int node_count() const { return n_intervals + 1; }
    double time_at(int i) const { return t0 + i * dt; }
    double horizon() const { return n_intervals * dt; }
};

/// Chaser states at every grid node.
struct Trajectory {
    TimeGrid grid;
    std::vector<State> states;
};

/// Thrown when a propagation step hits a zero-radius stage position.
class PropagationError : public std::runtime_error {
public:
    PropagationError(std::size_t interval, const std::string& what)
        : std::runtime_error(what), interval_(interval) {}
    std::size_t interval() const { return interval_; }

private:
    std::size_t interval_;
};

/// Two-body gravitational acceleration -mu*r/|r|^3 [km/s^2].
inline Vec3 gravity_accel(const Vec3& r, double mu) {
    const double r2 = squared_norm(r);
    if (r2 <= 0.0) {
        throw std::domain_error("gravity_accel: zero radius");
    }
    const double inv_r3 = 1.0 / (r2 * std::sqrt(r2));
    return r * (-mu * inv_r3);
}

/// mu/|p|^3 for a stage position p.
inline double scaled_inverse_cube(const Vec3& p, double mu) {
    const double p2 = squared_norm(p);
    if (p2 <= 0.0) {
        throw std::domain_error("scaled_inverse_cube: zero radius");
    }
    return mu / (p2 * std::sqrt(p2));
}

/// One classical RK4 step of the thrusted two-body system.
///
/// The control is sampled at the surrounding nodes: stage 1 uses u_i, stages
/// 2 and 3 the average (u_i + u_next)/2, stage 4 uses u_next.
inline std::pair<State, StageBlock> rk4_step(const State& s, const Vec3& u_i, const Vec3& u_next,
                                             double dt, double mu) {
    StageBlock stg;
    const Vec3 u_mid = (u_i + u_next) * 0.5;

    const Vec3 p1 = s.r;
    stg.dtil[0] = scaled_inverse_cube(p1, mu);
    stg.k[0] = s.v;
    stg.kv[0] = u_i - p1 * stg.dtil[0];

    const Vec3 p2 = s.r + stg.k[0] * (dt / 2.0);
    stg.dtil[1] = scaled_inverse_cube(p2, mu);
    stg.k[1] = s.v + stg.kv[0] * (dt / 2.0);
    stg.kv[1] = u_mid - p2 * stg.dtil[1];

    const Vec3 p3 = s.r + stg.k[1] * (dt / 2.0);
    stg.dtil[2] = scaled_inverse_cube(p3, mu);
    stg.k[2] = s.v + stg.kv[1] * (dt / 2.0);
    stg.kv[2] = u_mid - p3 * stg.dtil[2];

    const Vec3 p4 = s.r + stg.k[2] * dt;
    stg.dtil[3] = scaled_inverse_cube(p4, mu);
    stg.k[3] = s.v + stg.kv[2] * dt;
    stg.kv[3] = u_next - p4 * stg.dtil[3];

    State next;
    next.r = s.r + (stg.k[0] + stg.k[1] * 2.0 + stg.k[2] * 2.0 + stg.k[3]) * (dt / 6.0);
    next.v = s.v + (stg.kv[0] + stg.kv[1] * 2.0 + stg.kv[2] * 2.0 + stg.kv[3]) * (dt / 6.0);
    return {next, stg};
}

/// Forward RK4 propagation with node-sampled controls (N+1 values for N intervals).
inline Trajectory propagate(const State& s0, std::span<const Vec3> controls, const TimeGrid& grid,
                            double mu) {
    if (controls.size() != static_cast<std::size_t>(grid.node_count())) {
        throw std::invalid_argument("propagate: controls length must equal node count");
    }
    Trajectory traj;
    traj.grid = grid;
    traj.states.reserve(grid.node_count());
    traj.states.push_back(s0);
    for (int i = 0; i < grid.n_intervals; ++i) {
        try {
            auto [next, stg] = rk4_step(traj.states.back(), controls[i], controls[i + 1], grid.dt, mu);
            traj.states.push_back(next);
        } catch (const std::domain_error& e) {
            throw PropagationError(i, std::string(e.what()) + " in interval " + std::to_string(i));
        }
    }
    return traj;
}

/// Specific orbital energy |v|^2/2 - mu/|r| [km^2/s^2] and angular momentum r x v [km^2/s].
struct ConservedQuantities {
    double energy;
    Vec3 angular_momentum;
};

inline ConservedQuantities conserved_quantities(const State& s, double mu) {
    const double rn = norm(s.r);
    if (rn <= 0.0) {
        throw std::domain_error("conserved_quantities: zero radius");
    }
    return {0.5 * squared_norm(s.v) - mu / rn, cross(s.r, s.v)};
}

}  // namespace sotrack
