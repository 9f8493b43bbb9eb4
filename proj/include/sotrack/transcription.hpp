#pragma once

#include "sotrack/config.hpp"
#include "sotrack/dynamics.hpp"
#include "sotrack/ephemeris.hpp"
#include "sotrack/nlp.hpp"
#include "sotrack/vec3.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace sotrack {

/// Formulation variant.
///  - RNLP: binaries relaxed to [0,1], quadratic thrust objective.
///  - RNLP_T: RNLP tightened with the perspective epigraph (phi variables,
///    b*phi >= |u|^2 rows, objective sum(phi)/N).
///  - FIXED_BINARY: binaries frozen to given 0/1 values; envelope constraints
///    collapse into per-node thrust boxes and b/phi variables disappear.
enum class Mode { RNLP, RNLP_T, FIXED_BINARY };

inline const char* to_string(Mode m) {
    switch (m) {
        case Mode::RNLP: return "RNLP";
        case Mode::RNLP_T: return "RNLP-T";
        case Mode::FIXED_BINARY: return "FIXED_BINARY";
    }
    return "?";
}

/// Index bookkeeping for the decision vector. Block order:
///
///   [ r | v | u | per-interval stages | phi (RNLP_T) | b (relaxed) | slacks ]
///
/// r, v, u and the node-indexed scalars run over nodes 0..N; the stage block
/// holds 28 values per interval (k1..k4, kv1..kv4 componentwise, then
/// dtil1..dtil4). Every inequality row owns one slack variable at the tail.
///
/// Row order: equalities are the 6 initial-condition rows followed by 34 rows
/// per interval (3 position updates, 3 velocity updates, 12 position-stage
/// definitions, 12 velocity-stage definitions, 4 scaled-distance
/// definitions); equality count is 34N + 6. Inequality rows are the thrust
/// envelopes (6 per node: lower/upper per component), the activation budget
/// (1), the proximity band (2 per node: lower, upper), and in RNLP_T the
/// perspective rows (1 per node).
struct VariableLayout {
    int n_intervals = 0;
    Mode mode = Mode::RNLP;

    std::size_t r_offset = 0;
    std::size_t v_offset = 0;
    std::size_t u_offset = 0;
    std::size_t stage_offset = 0;
    std::size_t phi_offset = 0;    // valid only in RNLP_T
    std::size_t b_offset = 0;      // valid only in relaxed modes
    std::size_t slack_offset = 0;
    std::size_t total_dim = 0;

    std::size_t num_eq = 0;
    std::size_t num_ineq = 0;

    int nodes() const { return n_intervals + 1; }
    bool has_phi() const { return mode == Mode::RNLP_T; }
    bool has_binaries() const { return mode != Mode::FIXED_BINARY; }

    std::size_t r_index(int node, int c) const { return r_offset + 3 * node + c; }
    std::size_t v_index(int node, int c) const { return v_offset + 3 * node + c; }
    std::size_t u_index(int node, int c) const { return u_offset + 3 * node + c; }
    /// m is the stage number 1..4.
    std::size_t k_index(int interval, int m, int c) const {
        return stage_offset + 28 * interval + 3 * (m - 1) + c;
    }
    std::size_t kv_index(int interval, int m, int c) const {
        return stage_offset + 28 * interval + 12 + 3 * (m - 1) + c;
    }
    std::size_t dtil_index(int interval, int m) const {
        return stage_offset + 28 * interval + 24 + (m - 1);
    }
    std::size_t phi_index(int node) const { return phi_offset + node; }
    std::size_t b_index(int node) const { return b_offset + node; }
    std::size_t slack_index(std::size_t ineq_row) const { return slack_offset + ineq_row; }

    // Inequality row indices.
    std::size_t envelope_row(int node, int c, bool upper) const {
        return 6 * static_cast<std::size_t>(node) + 2 * c + (upper ? 1 : 0);
    }
    std::size_t budget_row() const { return 6 * static_cast<std::size_t>(nodes()); }
    std::size_t proximity_row(int node, bool upper) const {
        const std::size_t base = has_binaries() ? budget_row() + 1 : 0;
        return base + 2 * static_cast<std::size_t>(node) + (upper ? 1 : 0);
    }
    std::size_t perspective_row(int node) const {
        return proximity_row(nodes() - 1, true) + 1 + static_cast<std::size_t>(node);
    }

    // Row index of the first equality of interval i (position-update x row).
    std::size_t interval_eq_base(int interval) const { return 6 + 34 * static_cast<std::size_t>(interval); }
};

inline VariableLayout make_layout(int n_intervals, Mode mode) {
    VariableLayout L;
    L.n_intervals = n_intervals;
    L.mode = mode;
    const std::size_t nodes = n_intervals + 1;
    std::size_t at = 0;
    L.r_offset = at; at += 3 * nodes;
    L.v_offset = at; at += 3 * nodes;
    L.u_offset = at; at += 3 * nodes;
    L.stage_offset = at; at += 28 * static_cast<std::size_t>(n_intervals);
    if (mode == Mode::RNLP_T) { L.phi_offset = at; at += nodes; }
    if (mode != Mode::FIXED_BINARY) { L.b_offset = at; at += nodes; }

    L.num_eq = 34 * static_cast<std::size_t>(n_intervals) + 6;
    if (mode == Mode::FIXED_BINARY) {
        L.num_ineq = 2 * nodes;  // proximity only; envelopes become u boxes
    } else {
        L.num_ineq = 6 * nodes + 1 + 2 * nodes + (mode == Mode::RNLP_T ? nodes : 0);
    }
    L.slack_offset = at; at += L.num_ineq;
    L.total_dim = at;
    return L;
}

/// Perspective epigraph residual b*phi - |u|^2 (feasible when >= 0).
inline double perspective_residual(double b, double phi, const Vec3& u) {
    return b * phi - squared_norm(u);
}

/// Membership test for the convex hull of one node's on/off thrust set:
/// { b*phi >= unorm^2, b*umin_norm <= unorm <= b*umax_norm, 0 <= b <= 1,
///   phi >= 0 } with unorm treated as a scalar.
inline bool perspective_hull_contains(double unorm, double phi, double b, double umin_norm,
                                      double umax_norm, double tol = 0.0) {
    return b >= -tol && b <= 1.0 + tol && phi >= -tol &&
           b * phi - unorm * unorm >= -tol &&
           unorm >= b * umin_norm - tol && unorm <= b * umax_norm + tol;
}

/// The finite-dimensional optimization problem for one config/target/mode.
///
/// Immutable once built; all evaluations write into caller-provided buffers
/// and are safe to call concurrently.
class TranscribedProblem {
public:
    TranscribedProblem(ProblemConfig config, const TargetEphemeris& target, Mode mode,
                       std::optional<std::vector<int>> fixed_binaries = std::nullopt)
        : config_(std::move(config)), mode_(mode) {
        validate(config_);
        if (!target.matches_grid(config_.grid)) {
            throw std::invalid_argument("transcription: target ephemeris grid does not match config grid");
        }
        if ((mode == Mode::FIXED_BINARY) != fixed_binaries.has_value()) {
            throw std::invalid_argument(
                "transcription: fixed_binaries must be given exactly in FIXED_BINARY mode");
        }
        r_bar_ = target.r_bar;
        v_bar_ = target.v_bar;
        layout_ = make_layout(config_.grid.n_intervals, mode);

        if (fixed_binaries) {
            fixed_b_ = std::move(*fixed_binaries);
            if (fixed_b_.size() != static_cast<std::size_t>(layout_.nodes())) {
                throw std::invalid_argument("transcription: fixed_binaries length must be N+1");
            }
            int sum = 0;
            for (int b : fixed_b_) {
                if (b != 0 && b != 1) throw std::invalid_argument("transcription: fixed binaries must be 0/1");
                sum += b;
            }
            if (sum > config_.n_budget) {
                throw std::invalid_argument("transcription: fixed binaries exceed the activation budget");
            }
        }

        build_bounds();
        build_pattern();
    }

    const ProblemConfig& config() const { return config_; }
    Mode mode() const { return mode_; }
    const VariableLayout& layout() const { return layout_; }
    const std::vector<int>& fixed_binaries() const { return fixed_b_; }
    const std::vector<double>& x_lower() const { return x_lo_; }
    const std::vector<double>& x_upper() const { return x_hi_; }
    const std::vector<double>& ineq_lower() const { return ineq_lo_; }
    const std::vector<double>& ineq_upper() const { return ineq_hi_; }
    const JacobianPattern& jacobian_pattern() const { return pattern_; }
    const Vec3& target_r(int node) const { return r_bar_[node]; }
    const Vec3& target_v(int node) const { return v_bar_[node]; }

    double objective(std::span<const double> x) const {
        const int N = layout_.n_intervals;
        double sum = 0.0;
        if (mode_ == Mode::RNLP_T) {
            for (int i = 0; i <= N; ++i) sum += x[layout_.phi_index(i)];
        } else {
            for (int i = 0; i <= N; ++i) sum += squared_norm(get_u(x, i));
        }
        return sum / N;
    }

    void objective_gradient(std::span<const double> x, std::span<double> grad) const {
        std::fill(grad.begin(), grad.end(), 0.0);
        const int N = layout_.n_intervals;
        if (mode_ == Mode::RNLP_T) {
            for (int i = 0; i <= N; ++i) grad[layout_.phi_index(i)] = 1.0 / N;
        } else {
            for (int i = 0; i <= N; ++i) {
                for (int c = 0; c < 3; ++c) {
                    const std::size_t j = layout_.u_index(i, c);
                    grad[j] = 2.0 * x[j] / N;
                }
            }
        }
    }

    /// Equality residuals: initial conditions then the per-interval RK4 rows.
    void equality_residuals(std::span<const double> x, std::span<double> out) const {
        assert(out.size() == layout_.num_eq);
        const int N = layout_.n_intervals;
        const double h = config_.grid.dt;
        const double mu = config_.mu;

        const Vec3 r0 = get_r(x, 0);
        const Vec3 v0 = get_v(x, 0);
        const Vec3 r0_ref = r_bar_[0] + config_.delta0;
        out[0] = r0.x - r0_ref.x;
        out[1] = r0.y - r0_ref.y;
        out[2] = r0.z - r0_ref.z;
        out[3] = v0.x - v_bar_[0].x;
        out[4] = v0.y - v_bar_[0].y;
        out[5] = v0.z - v_bar_[0].z;

        for (int i = 0; i < N; ++i) {
            const Vec3 r = get_r(x, i);
            const Vec3 v = get_v(x, i);
            const Vec3 r_next = get_r(x, i + 1);
            const Vec3 v_next = get_v(x, i + 1);
            const Vec3 u_i = get_u(x, i);
            const Vec3 u_next = get_u(x, i + 1);
            const Vec3 u_mid = (u_i + u_next) * 0.5;
            Vec3 k[4], kv[4];
            double dtil[4];
            for (int m = 0; m < 4; ++m) {
                k[m] = get_k(x, i, m + 1);
                kv[m] = get_kv(x, i, m + 1);
                dtil[m] = x[layout_.dtil_index(i, m + 1)];
            }
            const Vec3 p2 = r + k[0] * (h / 2.0);
            const Vec3 p3 = r + k[1] * (h / 2.0);
            const Vec3 p4 = r + k[2] * h;

            std::size_t row = layout_.interval_eq_base(i);
            // Node updates.
            const Vec3 dr = r_next - (r + (k[0] + k[1] * 2.0 + k[2] * 2.0 + k[3]) * (h / 6.0));
            const Vec3 dv = v_next - (v + (kv[0] + kv[1] * 2.0 + kv[2] * 2.0 + kv[3]) * (h / 6.0));
            out[row++] = dr.x; out[row++] = dr.y; out[row++] = dr.z;
            out[row++] = dv.x; out[row++] = dv.y; out[row++] = dv.z;
            // Position stages.
            const Vec3 b1 = k[0] - v;
            const Vec3 b2 = k[1] - (v + kv[0] * (h / 2.0));
            const Vec3 b3 = k[2] - (v + kv[1] * (h / 2.0));
            const Vec3 b4 = k[3] - (v + kv[2] * h);
            for (const Vec3* b : {&b1, &b2, &b3, &b4}) {
                out[row++] = b->x; out[row++] = b->y; out[row++] = b->z;
            }
            // Velocity stages.
            const Vec3 c1 = kv[0] - (u_i - r * dtil[0]);
            const Vec3 c2 = kv[1] - (u_mid - p2 * dtil[1]);
            const Vec3 c3 = kv[2] - (u_mid - p3 * dtil[2]);
            const Vec3 c4 = kv[3] - (u_next - p4 * dtil[3]);
            for (const Vec3* c : {&c1, &c2, &c3, &c4}) {
                out[row++] = c->x; out[row++] = c->y; out[row++] = c->z;
            }
            // Scaled inverse cubic distances.
            out[row++] = dtil[0] - scaled_inverse_cube(r, mu);
            out[row++] = dtil[1] - scaled_inverse_cube(p2, mu);
            out[row++] = dtil[2] - scaled_inverse_cube(p3, mu);
            out[row++] = dtil[3] - scaled_inverse_cube(p4, mu);
        }
    }

    /// Inequality row values (without slacks); bounds via ineq_lower/upper.
    void inequality_values(std::span<const double> x, std::span<double> out) const {
        assert(out.size() == layout_.num_ineq);
        const int N = layout_.n_intervals;
        if (layout_.has_binaries()) {
            double bsum = 0.0;
            for (int i = 0; i <= N; ++i) {
                const double b = x[layout_.b_index(i)];
                bsum += b;
                for (int c = 0; c < 3; ++c) {
                    const double u = x[layout_.u_index(i, c)];
                    out[layout_.envelope_row(i, c, false)] = u - b * config_.u_min[c];
                    out[layout_.envelope_row(i, c, true)] = u - b * config_.u_max[c];
                }
            }
            out[layout_.budget_row()] = bsum;
        }
        for (int i = 0; i <= N; ++i) {
            const double d = proximity_value(x, i);
            out[layout_.proximity_row(i, false)] = d;
            out[layout_.proximity_row(i, true)] = d;
        }
        if (mode_ == Mode::RNLP_T) {
            for (int i = 0; i <= N; ++i) {
                out[layout_.perspective_row(i)] =
                    perspective_residual(x[layout_.b_index(i)], x[layout_.phi_index(i)], get_u(x, i));
            }
        }
    }

    /// Proximity functional at one node: |r - rbar|^2 for q = 2, smoothed L1
    /// sum(sqrt(d_c^2 + eps^2)) for q = 1.
    double proximity_value(std::span<const double> x, int node) const {
        const Vec3 d = get_r(x, node) - r_bar_[node];
        if (config_.norm_q == 2) return squared_norm(d);
        const double e2 = config_.abs_smoothing_eps * config_.abs_smoothing_eps;
        return std::sqrt(d.x * d.x + e2) + std::sqrt(d.y * d.y + e2) + std::sqrt(d.z * d.z + e2);
    }

    std::vector<double> proximity_values(std::span<const double> x) const {
        std::vector<double> vals(layout_.nodes());
        for (int i = 0; i < layout_.nodes(); ++i) vals[i] = proximity_value(x, i);
        return vals;
    }

    void jacobian_values(std::span<const double> x, std::span<double> vals) const {
        assert(vals.size() == pattern_.nnz());
        std::size_t at = 0;
        for_each_jacobian_entry(x, [&](std::size_t, std::size_t, double v) { vals[at++] = v; });
        assert(at == pattern_.nnz());
    }

    /// Warm start from a zero-control simulation: states and stages copied
    /// from the trajectory, u = 0, b = N_b/(N+1), phi = 1e-8, slacks clipped
    /// into their bounds. Dynamics rows vanish by construction.
    std::vector<double> init_from_sim(const Trajectory& traj) const {
        if (traj.states.size() != static_cast<std::size_t>(layout_.nodes())) {
            throw std::invalid_argument("init_from_sim: trajectory length mismatch");
        }
        const int N = layout_.n_intervals;
        std::vector<double> x(layout_.total_dim, 0.0);
        for (int i = 0; i <= N; ++i) {
            set_vec(x, layout_.r_index(i, 0), traj.states[i].r);
            set_vec(x, layout_.v_index(i, 0), traj.states[i].v);
        }
        const Vec3 zero{};
        for (int i = 0; i < N; ++i) {
            const auto [next, stg] = rk4_step(traj.states[i], zero, zero, config_.grid.dt, config_.mu);
            (void)next;
            for (int m = 1; m <= 4; ++m) {
                set_vec(x, layout_.k_index(i, m, 0), stg.k[m - 1]);
                set_vec(x, layout_.kv_index(i, m, 0), stg.kv[m - 1]);
                x[layout_.dtil_index(i, m)] = stg.dtil[m - 1];
            }
        }
        if (layout_.has_phi()) {
            for (int i = 0; i <= N; ++i) x[layout_.phi_index(i)] = 1e-8;
        }
        if (layout_.has_binaries()) {
            const double b0 = static_cast<double>(config_.n_budget) / layout_.nodes();
            for (int i = 0; i <= N; ++i) x[layout_.b_index(i)] = b0;
        }
        std::vector<double> ci(layout_.num_ineq);
        inequality_values(x, ci);
        for (std::size_t j = 0; j < layout_.num_ineq; ++j) {
            x[layout_.slack_index(j)] = std::clamp(ci[j], x_lo_[layout_.slack_index(j)],
                                                   x_hi_[layout_.slack_index(j)]);
        }
        return x;
    }

    /// Packs the problem behind the generic solver interface. The returned
    /// object references this problem; keep it alive for the solve.
    Nlp as_nlp() const {
        Nlp nlp;
        nlp.num_vars = layout_.total_dim;
        nlp.x_lo = x_lo_;
        nlp.x_hi = x_hi_;
        nlp.num_eq = layout_.num_eq;
        nlp.num_ineq = layout_.num_ineq;
        nlp.ineq_lo = ineq_lo_;
        nlp.ineq_hi = ineq_hi_;
        nlp.slack_offset = layout_.slack_offset;
        nlp.objective = [this](std::span<const double> x) { return objective(x); };
        nlp.objective_gradient = [this](std::span<const double> x, std::span<double> g) {
            objective_gradient(x, g);
        };
        nlp.equalities = [this](std::span<const double> x, std::span<double> out) {
            equality_residuals(x, out);
        };
        nlp.inequalities = [this](std::span<const double> x, std::span<double> out) {
            inequality_values(x, out);
        };
        nlp.jac_pattern = pattern_;
        nlp.jacobian = [this](std::span<const double> x, std::span<double> v) { jacobian_values(x, v); };
        nlp.x_scale = variable_scales();
        nlp.objective_scale = 1e6;  // thrust magnitudes sit near 1e-3 km/s^2 nominal
        if (mode_ != Mode::RNLP_T) {
            nlp.objective_diag = [this](std::span<double> d) {
                const int N = layout_.n_intervals;
                for (int i = 0; i <= N; ++i) {
                    for (int c = 0; c < 3; ++c) d[layout_.u_index(i, c)] = 2.0 / N;
                }
            };
        }
        return nlp;
    }

    /// Per-variable magnitude hints. With nondimensional_scaling the paper's
    /// nominal values (6378 km distance, 1e-3 km/s^2 acceleration) are used;
    /// otherwise all ones (the solver equilibrates rows on its own).
    std::vector<double> variable_scales() const {
        std::vector<double> s(layout_.total_dim, 1.0);
        if (!config_.nondimensional_scaling) return s;
        const double r_nom = 6378.0;
        const double a_nom = 1e-3;
        const double v_nom = std::sqrt(r_nom * a_nom);
        const double d_nom = a_nom / r_nom;
        const int N = layout_.n_intervals;
        for (int i = 0; i <= N; ++i) {
            for (int c = 0; c < 3; ++c) {
                s[layout_.r_index(i, c)] = r_nom;
                s[layout_.v_index(i, c)] = v_nom;
                s[layout_.u_index(i, c)] = a_nom;
            }
            if (layout_.has_phi()) s[layout_.phi_index(i)] = a_nom * a_nom;
        }
        for (int i = 0; i < N; ++i) {
            for (int m = 1; m <= 4; ++m) {
                for (int c = 0; c < 3; ++c) {
                    s[layout_.k_index(i, m, c)] = v_nom;
                    s[layout_.kv_index(i, m, c)] = a_nom;
                }
                s[layout_.dtil_index(i, m)] = d_nom;
            }
        }
        return s;
    }

    // Accessors into a decision vector.
    Vec3 get_r(std::span<const double> x, int node) const { return get_vec(x, layout_.r_index(node, 0)); }
    Vec3 get_v(std::span<const double> x, int node) const { return get_vec(x, layout_.v_index(node, 0)); }
    Vec3 get_u(std::span<const double> x, int node) const { return get_vec(x, layout_.u_index(node, 0)); }
    Vec3 get_k(std::span<const double> x, int interval, int m) const {
        return get_vec(x, layout_.k_index(interval, m, 0));
    }
    Vec3 get_kv(std::span<const double> x, int interval, int m) const {
        return get_vec(x, layout_.kv_index(interval, m, 0));
    }

private:
    static Vec3 get_vec(std::span<const double> x, std::size_t at) {
        return {x[at], x[at + 1], x[at + 2]};
    }
    static void set_vec(std::vector<double>& x, std::size_t at, const Vec3& v) {
        x[at] = v.x; x[at + 1] = v.y; x[at + 2] = v.z;
    }

    void build_bounds() {
        const int N = layout_.n_intervals;
        x_lo_.assign(layout_.total_dim, -kInfinity);
        x_hi_.assign(layout_.total_dim, kInfinity);
        for (int i = 0; i <= N; ++i) {
            for (int c = 0; c < 3; ++c) {
                double lo = config_.u_min[c];
                double hi = config_.u_max[c];
                if (mode_ == Mode::FIXED_BINARY) {
                    lo *= fixed_b_[i];
                    hi *= fixed_b_[i];
                }
                x_lo_[layout_.u_index(i, c)] = lo;
                x_hi_[layout_.u_index(i, c)] = hi;
            }
            if (layout_.has_phi()) x_lo_[layout_.phi_index(i)] = 0.0;
            if (layout_.has_binaries()) {
                x_lo_[layout_.b_index(i)] = 0.0;
                x_hi_[layout_.b_index(i)] = 1.0;
            }
        }
        for (int i = 0; i < N; ++i) {
            for (int m = 1; m <= 4; ++m) x_lo_[layout_.dtil_index(i, m)] = 1e-10;
        }

        ineq_lo_.assign(layout_.num_ineq, -kInfinity);
        ineq_hi_.assign(layout_.num_ineq, kInfinity);
        if (layout_.has_binaries()) {
            for (int i = 0; i <= N; ++i) {
                for (int c = 0; c < 3; ++c) {
                    ineq_lo_[layout_.envelope_row(i, c, false)] = 0.0;   // u - b*u_min >= 0
                    ineq_hi_[layout_.envelope_row(i, c, true)] = 0.0;    // u - b*u_max <= 0
                }
            }
            ineq_lo_[layout_.budget_row()] = 0.0;
            ineq_hi_[layout_.budget_row()] = config_.n_budget;
        }
        const bool q2 = config_.norm_q == 2;
        const double lo_bound = q2 ? config_.delta_min * config_.delta_min : config_.delta_min;
        const double hi_bound = q2 ? config_.delta_max * config_.delta_max
                                   : config_.delta_max + 3.0 * config_.abs_smoothing_eps;
        for (int i = 0; i <= N; ++i) {
            ineq_lo_[layout_.proximity_row(i, false)] = lo_bound;
            ineq_hi_[layout_.proximity_row(i, true)] = hi_bound;
        }
        if (mode_ == Mode::RNLP_T) {
            for (int i = 0; i <= N; ++i) ineq_lo_[layout_.perspective_row(i)] = 0.0;
        }

        // Slack boxes mirror the inequality bounds.
        for (std::size_t j = 0; j < layout_.num_ineq; ++j) {
            x_lo_[layout_.slack_index(j)] = ineq_lo_[j];
            x_hi_[layout_.slack_index(j)] = ineq_hi_[j];
        }
    }

    /// Emits every structural Jacobian nonzero in a fixed order. The emitter
    /// is called identically regardless of x, so one pass records the
    /// pattern and later passes fill values.
    template <class Emit>
    void for_each_jacobian_entry(std::span<const double> x, Emit&& emit) const {
        const int N = layout_.n_intervals;
        const double h = config_.grid.dt;
        const double mu = config_.mu;
        const VariableLayout& L = layout_;

        // Initial conditions: identity on r_0 and v_0.
        for (int c = 0; c < 3; ++c) emit(c, L.r_index(0, c), 1.0);
        for (int c = 0; c < 3; ++c) emit(3 + c, L.v_index(0, c), 1.0);

        for (int i = 0; i < N; ++i) {
            const Vec3 r = get_r(x, i);
            Vec3 k[4];
            double dtil[4];
            for (int m = 0; m < 4; ++m) {
                k[m] = get_k(x, i, m + 1);
                dtil[m] = x[L.dtil_index(i, m + 1)];
            }
            const Vec3 p[4] = {r, r + k[0] * (h / 2.0), r + k[1] * (h / 2.0), r + k[2] * h};
            const std::size_t base = L.interval_eq_base(i);

            // Node updates: r_{i+1} - r_i - h/6 (k1 + 2k2 + 2k3 + k4).
            for (int c = 0; c < 3; ++c) {
                const std::size_t row = base + c;
                emit(row, L.r_index(i + 1, c), 1.0);
                emit(row, L.r_index(i, c), -1.0);
                emit(row, L.k_index(i, 1, c), -h / 6.0);
                emit(row, L.k_index(i, 2, c), -h / 3.0);
                emit(row, L.k_index(i, 3, c), -h / 3.0);
                emit(row, L.k_index(i, 4, c), -h / 6.0);
            }
            for (int c = 0; c < 3; ++c) {
                const std::size_t row = base + 3 + c;
                emit(row, L.v_index(i + 1, c), 1.0);
                emit(row, L.v_index(i, c), -1.0);
                emit(row, L.kv_index(i, 1, c), -h / 6.0);
                emit(row, L.kv_index(i, 2, c), -h / 3.0);
                emit(row, L.kv_index(i, 3, c), -h / 3.0);
                emit(row, L.kv_index(i, 4, c), -h / 6.0);
            }
            // Position stages: k_m - v - coeff*kv_{m-1}.
            for (int m = 1; m <= 4; ++m) {
                const double coeff = (m == 1) ? 0.0 : (m == 4 ? h : h / 2.0);
                for (int c = 0; c < 3; ++c) {
                    const std::size_t row = base + 6 + 3 * (m - 1) + c;
                    emit(row, L.k_index(i, m, c), 1.0);
                    emit(row, L.v_index(i, c), -1.0);
                    if (m > 1) emit(row, L.kv_index(i, m - 1, c), -coeff);
                }
            }
            // Velocity stages: kv_m - u_stage + dtil_m * p_m.
            for (int m = 1; m <= 4; ++m) {
                const double kcoeff = (m == 2 || m == 3) ? h / 2.0 : h;  // dp_m/dk_{m-1}
                for (int c = 0; c < 3; ++c) {
                    const std::size_t row = base + 18 + 3 * (m - 1) + c;
                    emit(row, L.kv_index(i, m, c), 1.0);
                    if (m == 1) {
                        emit(row, L.u_index(i, c), -1.0);
                    } else if (m == 4) {
                        emit(row, L.u_index(i + 1, c), -1.0);
                    } else {
                        emit(row, L.u_index(i, c), -0.5);
                        emit(row, L.u_index(i + 1, c), -0.5);
                    }
                    emit(row, L.dtil_index(i, m), p[m - 1][c]);
                    emit(row, L.r_index(i, c), dtil[m - 1]);
                    if (m > 1) emit(row, L.k_index(i, m - 1, c), dtil[m - 1] * kcoeff);
                }
            }
            // dtil definitions: dtil_m - mu*|p_m|^-3.
            for (int m = 1; m <= 4; ++m) {
                const std::size_t row = base + 30 + (m - 1);
                const double pn2 = squared_norm(p[m - 1]);
                const double inv5 = 1.0 / (pn2 * pn2 * std::sqrt(pn2));
                const double pcoeff = (m == 2 || m == 3) ? h / 2.0 : h;
                emit(row, L.dtil_index(i, m), 1.0);
                for (int c = 0; c < 3; ++c) {
                    const double g = 3.0 * mu * p[m - 1][c] * inv5;
                    emit(row, L.r_index(i, c), g);
                    if (m > 1) emit(row, L.k_index(i, m - 1, c), g * pcoeff);
                }
            }
        }

        // Inequality rows follow the equalities.
        const std::size_t ineq_base = L.num_eq;
        if (L.has_binaries()) {
            for (int i = 0; i <= N; ++i) {
                for (int c = 0; c < 3; ++c) {
                    const std::size_t row_lo = ineq_base + L.envelope_row(i, c, false);
                    emit(row_lo, L.u_index(i, c), 1.0);
                    emit(row_lo, L.b_index(i), -config_.u_min[c]);
                    const std::size_t row_hi = ineq_base + L.envelope_row(i, c, true);
                    emit(row_hi, L.u_index(i, c), 1.0);
                    emit(row_hi, L.b_index(i), -config_.u_max[c]);
                }
            }
            for (int i = 0; i <= N; ++i) emit(ineq_base + L.budget_row(), L.b_index(i), 1.0);
        }
        const double e2 = config_.abs_smoothing_eps * config_.abs_smoothing_eps;
        for (int i = 0; i <= N; ++i) {
            const Vec3 d = get_r(x, i) - r_bar_[i];
            for (int side = 0; side < 2; ++side) {
                const std::size_t row = ineq_base + L.proximity_row(i, side == 1);
                for (int c = 0; c < 3; ++c) {
                    const double g = (config_.norm_q == 2) ? 2.0 * d[c]
                                                           : d[c] / std::sqrt(d[c] * d[c] + e2);
                    emit(row, L.r_index(i, c), g);
                }
            }
        }
        if (mode_ == Mode::RNLP_T) {
            for (int i = 0; i <= N; ++i) {
                const std::size_t row = ineq_base + L.perspective_row(i);
                emit(row, L.b_index(i), x[L.phi_index(i)]);
                emit(row, L.phi_index(i), x[L.b_index(i)]);
                for (int c = 0; c < 3; ++c) {
                    emit(row, L.u_index(i, c), -2.0 * x[L.u_index(i, c)]);
                }
            }
        }
    }

    void build_pattern() {
        const std::vector<double> dummy(layout_.total_dim, 1.0);
        pattern_.rows.clear();
        pattern_.cols.clear();
        for_each_jacobian_entry(dummy, [this](std::size_t r, std::size_t c, double) {
            pattern_.rows.push_back(r);
            pattern_.cols.push_back(c);
        });
    }

    ProblemConfig config_;
    Mode mode_;
    std::vector<Vec3> r_bar_, v_bar_;
    std::vector<int> fixed_b_;
    VariableLayout layout_;
    std::vector<double> x_lo_, x_hi_;
    std::vector<double> ineq_lo_, ineq_hi_;
    JacobianPattern pattern_;
};

}  // namespace sotrack
