#pragma once

#include "sotrack/dynamics.hpp"
#include "sotrack/ephemeris.hpp"
#include "sotrack/vec3.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sotrack {

/// All physical and algorithmic parameters of a tracking problem.
///
/// Defaults reproduce the 1-hour case study: dt = 10 s over 360 intervals, a
/// 10..50 km proximity band, initial offset (10,10,10) km, +-1 km/s^2
/// componentwise thrust bounds and a budget of 100 thrust nodes.
struct ProblemConfig {
    double mu = kEarthMu;          // [km^3/s^2]
    TimeGrid grid{0.0, 10.0, 360};
    double delta_min = 10.0;       // [km]
    double delta_max = 50.0;       // [km]
    Vec3 delta0{10.0, 10.0, 10.0}; // initial offset [km]
    Vec3 u_min{-1.0, -1.0, -1.0};  // [km/s^2]
    Vec3 u_max{1.0, 1.0, 1.0};     // [km/s^2]
    int n_budget = 100;            // max number of thrust-on nodes
    int norm_q = 2;                // proximity norm: 1 or 2
    double beta = 0.5;             // rounding cut-off in (0,1)
    double abs_smoothing_eps = 1e-6;  // [km], smoothing of |.| for q = 1
    bool nondimensional_scaling = false;

    /// Proximity distance in the configured norm (smoothed for q = 1).
    double distance(const Vec3& offset) const {
        if (norm_q == 1) {
            const double e2 = abs_smoothing_eps * abs_smoothing_eps;
            return std::sqrt(offset.x * offset.x + e2) + std::sqrt(offset.y * offset.y + e2) +
                   std::sqrt(offset.z * offset.z + e2);
        }
        return norm(offset);
    }
};

/// Validates the config invariants; throws std::invalid_argument on the first violation.
inline void validate(const ProblemConfig& c) {
    if (!(c.mu > 0.0)) throw std::invalid_argument("config: mu must be positive");
    if (!(c.grid.dt > 0.0)) throw std::invalid_argument("config: dt must be positive");
    if (c.grid.n_intervals < 1) throw std::invalid_argument("config: n must be >= 1");
    if (!(c.delta_min > 0.0) || !(c.delta_min < c.delta_max)) {
        throw std::invalid_argument("config: need 0 < delta_min < delta_max");
    }
    for (int j = 0; j < 3; ++j) {
        if (!(c.u_min[j] < 0.0) || !(c.u_max[j] > 0.0)) {
            throw std::invalid_argument("config: need u_min < 0 < u_max componentwise");
        }
    }
    if (c.n_budget < 1 || c.n_budget > c.grid.node_count()) {
        throw std::invalid_argument("config: need 0 < n_budget <= N+1");
    }
    if (c.norm_q != 1 && c.norm_q != 2) throw std::invalid_argument("config: norm_q must be 1 or 2");
    if (!(c.beta > 0.0) || !(c.beta < 1.0)) throw std::invalid_argument("config: beta must be in (0,1)");
    if (!(c.abs_smoothing_eps > 0.0)) {
        throw std::invalid_argument("config: abs_smoothing_eps must be positive");
    }
    const double d0 = (c.norm_q == 1) ? norm1(c.delta0) : norm(c.delta0);
    if (d0 < c.delta_min || d0 > c.delta_max) {
        throw std::invalid_argument("config: |delta0|_q must lie within [delta_min, delta_max]");
    }
}

namespace detail {

inline Vec3 parse_vec3(const std::string& text, const std::string& key) {
    std::istringstream ss(text);
    Vec3 v;
    char sep;
    if (!(ss >> v.x)) throw std::invalid_argument("config key '" + key + "': expected 3 numbers");
    ss >> std::ws;
    if (ss.peek() == ',') ss >> sep;
    if (!(ss >> v.y)) throw std::invalid_argument("config key '" + key + "': expected 3 numbers");
    ss >> std::ws;
    if (ss.peek() == ',') ss >> sep;
    if (!(ss >> v.z)) throw std::invalid_argument("config key '" + key + "': expected 3 numbers");
    return v;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

}  // namespace detail

/// Parses the flat key-value config format (one `key = value` per line, `#`
/// comments). Unknown keys are rejected. Keys mirror the ProblemConfig
/// fields; delta0/u_min/u_max take three whitespace- or comma-separated
/// numbers, n maps to the interval count.
inline ProblemConfig parse_config(std::istream& in, ProblemConfig base = ProblemConfig{}) {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = detail::trim(trimmed.substr(0, eq));
        const std::string val = detail::trim(trimmed.substr(eq + 1));
        try {
            if (key == "mu") base.mu = std::stod(val);
            else if (key == "t0") base.grid.t0 = std::stod(val);
            else if (key == "dt") base.grid.dt = std::stod(val);
            else if (key == "n") base.grid.n_intervals = std::stoi(val);
            else if (key == "delta_min") base.delta_min = std::stod(val);
            else if (key == "delta_max") base.delta_max = std::stod(val);
            else if (key == "delta0") base.delta0 = detail::parse_vec3(val, key);
            else if (key == "u_min") base.u_min = detail::parse_vec3(val, key);
            else if (key == "u_max") base.u_max = detail::parse_vec3(val, key);
            else if (key == "n_budget") base.n_budget = std::stoi(val);
            else if (key == "norm_q") base.norm_q = std::stoi(val);
            else if (key == "beta") base.beta = std::stod(val);
            else if (key == "abs_smoothing_eps") base.abs_smoothing_eps = std::stod(val);
            else if (key == "nondimensional_scaling") base.nondimensional_scaling = (val == "1" || val == "true" || val == "on");
            else throw std::invalid_argument("unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception&) {
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": bad value for '" + key + "'");
        }
    }
    return base;
}

inline ProblemConfig parse_config_file(const std::string& path, ProblemConfig base = ProblemConfig{}) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    return parse_config(in, std::move(base));
}

/// FNV-1a hash of the canonical config serialization; echoed into summary.json
/// so output sets can be traced back to their parameters.
inline std::string config_hash(const ProblemConfig& c) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "mu=%.17g;t0=%.17g;dt=%.17g;n=%d;dmin=%.17g;dmax=%.17g;"
                  "d0=%.17g,%.17g,%.17g;umin=%.17g,%.17g,%.17g;umax=%.17g,%.17g,%.17g;"
                  "nb=%d;q=%d;beta=%.17g;eps=%.17g;nds=%d",
                  c.mu, c.grid.t0, c.grid.dt, c.grid.n_intervals, c.delta_min, c.delta_max,
                  c.delta0.x, c.delta0.y, c.delta0.z, c.u_min.x, c.u_min.y, c.u_min.z, c.u_max.x,
                  c.u_max.y, c.u_max.z, c.n_budget, c.norm_q, c.beta, c.abs_smoothing_eps,
                  c.nondimensional_scaling ? 1 : 0);
    std::uint64_t h = 1469598103934665603ull;
    for (const char* p = buf; *p; ++p) {
        h ^= static_cast<unsigned char>(*p);
        h *= 1099511628211ull;
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

/// Chaser initial state: target start shifted by the configured offset, same velocity.
inline State chaser_initial_state(const ProblemConfig& config, const TargetEphemeris& target) {
    return State{target.r_bar.front() + config.delta0, target.v_bar.front()};
}

}  // namespace sotrack
