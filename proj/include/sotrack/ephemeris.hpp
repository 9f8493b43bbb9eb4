#pragma once

#include "sotrack/dynamics.hpp"
#include "sotrack/vec3.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace sotrack {

/// Time-stamped states of the primary (target) object on a uniform grid.
struct TargetEphemeris {
    std::vector<double> epochs;  // [s]
    std::vector<Vec3> r_bar;     // [km]
    std::vector<Vec3> v_bar;     // [km/s]

    std::size_t size() const { return epochs.size(); }

    /// The uniform grid implied by the epochs.
    TimeGrid grid() const {
        TimeGrid g;
        g.t0 = epochs.front();
        g.n_intervals = static_cast<int>(epochs.size()) - 1;
        g.dt = g.n_intervals > 0 ? (epochs.back() - epochs.front()) / g.n_intervals : 0.0;
        return g;
    }

    bool matches_grid(const TimeGrid& g, double rel_tol = 1e-9) const {
        if (static_cast<int>(epochs.size()) != g.node_count()) return false;
        const double scale = std::max(1.0, std::abs(g.dt) * g.n_intervals);
        for (std::size_t i = 0; i < epochs.size(); ++i) {
            if (std::abs(epochs[i] - g.time_at(static_cast<int>(i))) > rel_tol * scale) return false;
        }
        return true;
    }
};

enum class EphemerisErrorKind {
    MalformedRow,
    NonUniformSpacing,
    NonMonotoneTime,
    ZeroRadius,
    MissingHeader,
};

class EphemerisError : public std::runtime_error {
public:
    EphemerisError(EphemerisErrorKind kind, std::size_t row, const std::string& what)
        : std::runtime_error(what), kind_(kind), row_(row) {}
    EphemerisErrorKind kind() const { return kind_; }
    /// 1-based file row (the header is row 1).
    std::size_t row() const { return row_; }

private:
    EphemerisErrorKind kind_;
    std::size_t row_;
};

inline constexpr std::string_view kEphemerisHeader = "t_s,x_km,y_km,z_km,vx_kms,vy_kms,vz_kms";

namespace detail {

inline bool parse_double(std::string_view field, double& out) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (*(last - 1) == ' ' || *(last - 1) == '\t')) --last;
    auto res = std::from_chars(first, last, out);
    return res.ec == std::errc() && res.ptr == last;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

inline void write_csv_value(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
}

}  // namespace detail

/// Parses the ephemeris CSV schema (header + one row per epoch).
///
/// Validation failures carry the offending 1-based row number: wrong field
/// count or unparsable numbers, non-monotone epochs, spacing deviating more
/// than 1e-9 (relative) from uniform, and zero-radius positions each raise a
/// distinct EphemerisErrorKind.
inline TargetEphemeris load_ephemeris(std::istream& in) {
    TargetEphemeris eph;
    std::string line;
    std::size_t row = 0;

    if (!std::getline(in, line)) {
        throw EphemerisError(EphemerisErrorKind::MissingHeader, 1, "ephemeris: empty input");
    }
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kEphemerisHeader) {
        throw EphemerisError(EphemerisErrorKind::MissingHeader, row,
                             "ephemeris: expected header '" + std::string(kEphemerisHeader) + "'");
    }

    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = detail::split_csv(line);
        if (fields.size() != 7) {
            throw EphemerisError(EphemerisErrorKind::MalformedRow, row,
                                 "ephemeris row " + std::to_string(row) + ": expected 7 fields, got " +
                                     std::to_string(fields.size()));
        }
        double vals[7];
        for (int i = 0; i < 7; ++i) {
            if (!detail::parse_double(fields[i], vals[i])) {
                throw EphemerisError(EphemerisErrorKind::MalformedRow, row,
                                     "ephemeris row " + std::to_string(row) + ": field " +
                                         std::to_string(i + 1) + " is not a number");
            }
        }
        eph.epochs.push_back(vals[0]);
        eph.r_bar.push_back({vals[1], vals[2], vals[3]});
        eph.v_bar.push_back({vals[4], vals[5], vals[6]});

        const std::size_t n = eph.epochs.size();
        if (n >= 2 && !(eph.epochs[n - 1] > eph.epochs[n - 2])) {
            throw EphemerisError(EphemerisErrorKind::NonMonotoneTime, row,
                                 "ephemeris row " + std::to_string(row) + ": epochs must increase");
        }
        if (norm(eph.r_bar.back()) <= 0.0) {
            throw EphemerisError(EphemerisErrorKind::ZeroRadius, row,
                                 "ephemeris row " + std::to_string(row) + ": zero radius");
        }
    }

    if (eph.epochs.size() < 2) {
        throw EphemerisError(EphemerisErrorKind::MalformedRow, row,
                             "ephemeris: need at least 2 epochs");
    }

    const double dt0 = eph.epochs[1] - eph.epochs[0];
    const double scale = std::max(1.0, std::abs(eph.epochs.back() - eph.epochs.front()));
    for (std::size_t i = 2; i < eph.epochs.size(); ++i) {
        const double dt = eph.epochs[i] - eph.epochs[i - 1];
        if (std::abs(dt - dt0) > 1e-9 * scale) {
            throw EphemerisError(EphemerisErrorKind::NonUniformSpacing, i + 2,
                                 "ephemeris row " + std::to_string(i + 2) + ": non-uniform spacing (" +
                                     std::to_string(dt) + " vs " + std::to_string(dt0) + ")");
        }
    }
    return eph;
}

inline TargetEphemeris load_ephemeris_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw EphemerisError(EphemerisErrorKind::MalformedRow, 0, "cannot open ephemeris file: " + path);
    }
    return load_ephemeris(in);
}

/// Writes the ephemeris CSV with 17 significant digits (round-trip exact).
inline void save_ephemeris(const TargetEphemeris& eph, std::ostream& os) {
    os << kEphemerisHeader << '\n';
    for (std::size_t i = 0; i < eph.size(); ++i) {
        const double vals[7] = {eph.epochs[i], eph.r_bar[i].x, eph.r_bar[i].y, eph.r_bar[i].z,
                                eph.v_bar[i].x, eph.v_bar[i].y, eph.v_bar[i].z};
        for (int j = 0; j < 7; ++j) {
            if (j) os << ',';
            detail::write_csv_value(os, vals[j]);
        }
        os << '\n';
    }
}

/// Manufactures a target ephemeris by unthrusted propagation of an initial state.
inline TargetEphemeris generate_keplerian_target(const State& initial_state, const TimeGrid& grid,
                                                 double mu) {
    const std::vector<Vec3> zeros(grid.node_count(), Vec3{});
    const Trajectory traj = propagate(initial_state, zeros, grid, mu);
    TargetEphemeris eph;
    eph.epochs.reserve(traj.states.size());
    eph.r_bar.reserve(traj.states.size());
    eph.v_bar.reserve(traj.states.size());
    for (int i = 0; i < grid.node_count(); ++i) {
        eph.epochs.push_back(grid.time_at(i));
        eph.r_bar.push_back(traj.states[i].r);
        eph.v_bar.push_back(traj.states[i].v);
    }
    return eph;
}

/// Default primary object: 6878 km perigee, eccentricity 0.02, equatorial,
/// starting at perigee. Only the relative geometry matters downstream; this
/// supplies a concrete low-Earth orbit for it.
inline State default_target_initial_state(double mu = kEarthMu) {
    const double perigee = 6878.0;
    const double ecc = 0.02;
    const double v_perigee = std::sqrt(mu * (1.0 + ecc) / perigee);
    return State{{perigee, 0.0, 0.0}, {0.0, v_perigee, 0.0}};
}

inline TargetEphemeris default_target(const TimeGrid& grid, double mu = kEarthMu) {
    return generate_keplerian_target(default_target_initial_state(mu), grid, mu);
}

}  // namespace sotrack
