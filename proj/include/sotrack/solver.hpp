#pragma once

#include "sotrack/nlp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace sotrack {

enum class SolveStatus { OPTIMAL_LOCAL, MAX_ITER, INFEASIBLE_STALL, ERROR };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::OPTIMAL_LOCAL: return "OPTIMAL_LOCAL";
        case SolveStatus::MAX_ITER: return "MAX_ITER";
        case SolveStatus::INFEASIBLE_STALL: return "INFEASIBLE_STALL";
        case SolveStatus::ERROR: return "ERROR";
    }
    return "?";
}

/// Augmented-Lagrangian solver parameters. The outer loop drives the
/// constraint violation to tol_feas; the bound-constrained inner
/// minimization runs a projected limited-memory quasi-Newton method with a
/// Gauss-Newton diagonal metric and Armijo backtracking.
struct SolverOptions {
    double tol_feas = 1e-6;
    double tol_stat = 1e-6;        // scaled by 1 + |f|
    double rho0 = 10.0;
    double rho_growth = 10.0;
    double feas_decrease = 0.25;   // required per-outer feasibility contraction
    int max_outer = 50;
    int max_inner = 500;           // inner iterations per outer step
    int quasi_newton_memory = 10;
    double armijo_c = 1e-4;
    double rho_max = 1e12;

    // Inner stationarity forcing sequence (projected-gradient norm in the
    // solver's working metric).
    double inner_tol0 = 1e-2;
    double inner_tol_shrink = 0.25;
    double inner_tol_min = 1e-9;

    // Deterministic diagonal row equilibration computed once from the
    // Jacobian at the start point. Column/objective scaling hints come from
    // the problem itself.
    bool equilibrate = true;

    /// Optional sink receiving one tab-separated line per outer iteration:
    /// outer, inner, f, feas, stat, rho.
    std::function<void(const std::string&)> log_sink;
};

struct SolveReport {
    SolveStatus status = SolveStatus::ERROR;
    double objective = 0.0;
    double feas_inf_norm = 0.0;
    double stat_inf_norm = 0.0;
    int outer_iters = 0;
    int inner_iters = 0;
    double wall_time_s = 0.0;
};

struct SolveResult {
    std::vector<double> x;            // size num_vars
    std::vector<double> multipliers;  // equality rows then inequality rows, natural units
    SolveReport report;
};

struct KktResiduals {
    double feas = 0.0;
    double stat = 0.0;
};

namespace detail {

inline double clamped(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

/// Shared KKT computation. `slacks` carries the inequality slack values; for
/// problems without a dedicated slack block pass the clipped inequality
/// values. Stationarity is the infinity norm of P_box(z - grad L) - z over
/// primal variables and slacks.
inline KktResiduals kkt_residuals_impl(const Nlp& p, std::span<const double> x,
                                       std::span<const double> slacks,
                                       std::span<const double> multipliers) {
    const std::size_t n = p.num_vars;
    std::vector<double> ce(p.num_eq), ci(p.num_ineq);
    if (p.num_eq) p.equalities(x, ce);
    if (p.num_ineq) p.inequalities(x, ci);

    double feas = 0.0;
    for (double v : ce) feas = std::max(feas, std::abs(v));
    for (std::size_t j = 0; j < p.num_ineq; ++j) {
        feas = std::max(feas, p.ineq_lo[j] - ci[j]);
        feas = std::max(feas, ci[j] - p.ineq_hi[j]);
    }
    for (std::size_t j = 0; j < n; ++j) {
        feas = std::max(feas, p.x_lo[j] - x[j]);
        feas = std::max(feas, x[j] - p.x_hi[j]);
    }
    feas = std::max(feas, 0.0);

    // grad L = grad f - J^T lambda over x; +lambda_I over slacks.
    std::vector<double> grad(n);
    p.objective_gradient(x, grad);
    std::vector<double> jv(p.jac_pattern.nnz());
    p.jacobian(x, jv);
    for (std::size_t t = 0; t < jv.size(); ++t) {
        grad[p.jac_pattern.cols[t]] -= multipliers[p.jac_pattern.rows[t]] * jv[t];
    }

    double stat = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (p.slack_offset && j >= *p.slack_offset && j < *p.slack_offset + p.num_ineq) {
            continue;  // handled below from `slacks`
        }
        const double step = clamped(x[j] - grad[j], p.x_lo[j], p.x_hi[j]) - x[j];
        stat = std::max(stat, std::abs(step));
    }
    for (std::size_t j = 0; j < p.num_ineq; ++j) {
        const double g = multipliers[p.num_eq + j];  // d/ds of f - lambda^T (c_I - s)
        const double s = slacks[j];
        const double step = clamped(s - g, p.ineq_lo[j], p.ineq_hi[j]) - s;
        stat = std::max(stat, std::abs(step));
    }
    return {feas, stat};
}

}  // namespace detail

/// Feasibility and stationarity at (x, multipliers) in natural units.
inline KktResiduals kkt_residuals(const Nlp& p, std::span<const double> x,
                                  std::span<const double> multipliers) {
    std::vector<double> slacks(p.num_ineq);
    if (p.num_ineq) {
        if (p.slack_offset) {
            for (std::size_t j = 0; j < p.num_ineq; ++j) slacks[j] = x[*p.slack_offset + j];
        } else {
            std::vector<double> ci(p.num_ineq);
            p.inequalities(x, ci);
            for (std::size_t j = 0; j < p.num_ineq; ++j) {
                slacks[j] = detail::clamped(ci[j], p.ineq_lo[j], p.ineq_hi[j]);
            }
        }
    }
    return detail::kkt_residuals_impl(p, x, slacks, multipliers);
}

namespace detail {

/// Working state of one augmented-Lagrangian solve.
///
/// Inequalities are handled as equalities c_I(x) - s = 0 with box-bounded
/// slacks, but the inner minimization is over x alone: for fixed x the
/// augmented Lagrangian is quadratic in s, so the optimal slack
/// s* = clip(c_I - lambda/(rho w), lo, hi) is substituted in closed form.
/// Rows whose slack sits strictly inside its box contribute neither gradient
/// nor curvature. A problem-owned slack block is carried along and refreshed
/// to s* for reporting.
class AugLagSolver {
public:
    AugLagSolver(const Nlp& p, const SolverOptions& opt) : p_(p), opt_(opt) {
        n_ = p.num_vars;
        m_eq_ = p.num_eq;
        m_in_ = p.num_ineq;
        m_ = m_eq_ + m_in_;
        nz_ = n_;
        slack_at_ = p.slack_offset ? *p.slack_offset : n_;
        nnz_ = p.jac_pattern.nnz();

        col_scale_.assign(nz_, 1.0);
        if (!p.x_scale.empty()) {
            for (std::size_t j = 0; j < n_; ++j) col_scale_[j] = p.x_scale[j];
        }
        row_scale_.assign(m_, 1.0);
        sigma_ = p.objective_scale > 0 ? p.objective_scale : 1.0;

        obj_diag_.assign(nz_, 0.0);
        if (p.objective_diag) {
            std::vector<double> d(n_, 0.0);
            p.objective_diag(d);
            for (std::size_t j = 0; j < n_; ++j) obj_diag_[j] = d[j];
        }

        zlo_.resize(nz_);
        zhi_.resize(nz_);
    }

    SolveResult run(std::span<const double> x0) {
        const auto t_start = std::chrono::steady_clock::now();
        SolveResult res;
        res.x.assign(x0.begin(), x0.end());
        res.multipliers.assign(m_, 0.0);
        SolveReport& rep = res.report;

        if (x0.size() != n_) {
            rep.status = SolveStatus::ERROR;
            return res;
        }

        std::vector<double> z(x0.begin(), x0.end());
        if (opt_.equilibrate) compute_row_scales(z);
        for (std::size_t j = 0; j < nz_; ++j) {
            if (is_slack(j)) {
                // Slack coordinates are derived quantities; freeze them for
                // the inner iteration and refresh analytically.
                zlo_[j] = -kInfinity;
                zhi_[j] = kInfinity;
                z[j] = 0.0;
                col_scale_[j] = 1.0;
                continue;
            }
            const double lo = bound_lo(j);
            const double hi = bound_hi(j);
            zlo_[j] = is_finite_bound(lo) ? lo / col_scale_[j] : -kInfinity;
            zhi_[j] = is_finite_bound(hi) ? hi / col_scale_[j] : kInfinity;
            z[j] = clamped(z[j], lo, hi) / col_scale_[j];
        }

        lambda_.assign(m_, 0.0);
        rho_ = opt_.rho0;

        double inner_tol = opt_.inner_tol0;
        double feas_best = kInfinity;
        int total_inner = 0;
        bool errored = false;

        std::vector<double> h(m_);
        for (int outer = 1; outer <= opt_.max_outer; ++outer) {
            rep.outer_iters = outer;
            const int used = inner_minimize(z, inner_tol, opt_.max_inner);
            if (used < 0) {
                errored = true;
                break;
            }
            total_inner += used;
            rep.inner_iters = total_inner;

            // Natural-units diagnostics at the inner solution.
            eval_scaled_constraints(z, h);
            const double feas = natural_feasibility();
            const double f = p_.objective(primal_view());

            if (!std::isfinite(f) || !std::isfinite(feas)) {
                errored = true;
                break;
            }

            // First-order multiplier update on sufficient feasibility
            // progress; otherwise raise the penalty and keep the estimates.
            const bool progress =
                feas <= std::max(opt_.feas_decrease * feas_best, opt_.tol_feas);
            if (progress) {
                for (std::size_t r = 0; r < m_; ++r) lambda_[r] -= rho_ * h[r];
                feas_best = std::min(feas_best, feas);
            } else {
                rho_ *= opt_.rho_growth;
            }

            to_natural_multipliers(res.multipliers);
            extract_solution(z, res.x);
            const KktResiduals kkt = kkt_residuals(p_, res.x, res.multipliers);
            rep.objective = f;
            rep.feas_inf_norm = kkt.feas;
            rep.stat_inf_norm = kkt.stat;

            if (opt_.log_sink) {
                char line[160];
                std::snprintf(line, sizeof line, "%d\t%d\t%.9e\t%.3e\t%.3e\t%.3e", outer, total_inner,
                              f, kkt.feas, kkt.stat, rho_);
                opt_.log_sink(line);
            }

            if (kkt.feas <= opt_.tol_feas && kkt.stat <= opt_.tol_stat * (1.0 + std::abs(f))) {
                rep.status = SolveStatus::OPTIMAL_LOCAL;
                rep.wall_time_s = elapsed(t_start);
                return res;
            }
            if (rho_ > opt_.rho_max) {
                rep.status = feas > opt_.tol_feas ? SolveStatus::INFEASIBLE_STALL
                                                  : SolveStatus::MAX_ITER;
                rep.wall_time_s = elapsed(t_start);
                return res;
            }
            if (progress) inner_tol = std::max(opt_.inner_tol_min, inner_tol * opt_.inner_tol_shrink);
        }

        to_natural_multipliers(res.multipliers);
        extract_solution(z, res.x);
        const KktResiduals kkt = kkt_residuals(p_, res.x, res.multipliers);
        rep.objective = p_.objective(std::span<const double>(res.x.data(), n_));
        rep.feas_inf_norm = kkt.feas;
        rep.stat_inf_norm = kkt.stat;
        rep.status = errored ? SolveStatus::ERROR : SolveStatus::MAX_ITER;
        rep.wall_time_s = elapsed(t_start);
        return res;
    }

private:
    std::size_t slack_index(std::size_t j) const { return slack_at_ + j; }

    bool is_slack(std::size_t j) const {
        return p_.slack_offset && j >= slack_at_ && j < slack_at_ + m_in_;
    }

    double bound_lo(std::size_t j) const { return p_.x_lo[j]; }
    double bound_hi(std::size_t j) const { return p_.x_hi[j]; }

    /// Natural-units solution with the slack block refreshed to the analytic
    /// optimum under the current multipliers.
    void extract_solution(std::span<const double> z, std::vector<double>& x_out) {
        unscale_into(z);
        x_out.assign(xbuf_.begin(), xbuf_.begin() + n_);
        if (m_in_ > 0) {
            ci_.resize(m_in_);
            p_.inequalities(std::span<const double>(x_out.data(), n_), ci_);
            for (std::size_t j = 0; j < m_in_; ++j) {
                const double w = row_scale_[m_eq_ + j];
                const double sstar = clamped(ci_[j] - lambda_[m_eq_ + j] / (rho_ * w),
                                             p_.ineq_lo[j], p_.ineq_hi[j]);
                if (p_.slack_offset) x_out[slack_index(j)] = sstar;
            }
        }
    }

    static double elapsed(std::chrono::steady_clock::time_point t0) {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    /// xbuf_ <- col_scale * z (natural units; first n_ entries feed callbacks).
    void unscale_into(std::span<const double> z) {
        xbuf_.resize(nz_);
        for (std::size_t j = 0; j < nz_; ++j) xbuf_[j] = z[j] * col_scale_[j];
    }

    std::span<const double> primal_view() const { return {xbuf_.data(), n_}; }

    /// Scaled constraint vector with slacks eliminated at their analytic
    /// optimum: h_j = w_j (c_j - s*_j), zero whenever the row is inactive.
    void eval_scaled_constraints(std::span<const double> z, std::span<double> h) {
        unscale_into(z);
        ce_.resize(m_eq_);
        ci_.resize(m_in_);
        if (m_eq_) p_.equalities(primal_view(), ce_);
        if (m_in_) p_.inequalities(primal_view(), ci_);
        for (std::size_t r = 0; r < m_eq_; ++r) h[r] = row_scale_[r] * ce_[r];
        for (std::size_t j = 0; j < m_in_; ++j) {
            const std::size_t r = m_eq_ + j;
            const double w = row_scale_[r];
            const double sstar =
                clamped(ci_[j] - lambda_[r] / (rho_ * w), p_.ineq_lo[j], p_.ineq_hi[j]);
            h[r] = w * (ci_[j] - sstar);
        }
    }

    double natural_feasibility() const {
        double feas = 0.0;
        for (std::size_t r = 0; r < m_eq_; ++r) feas = std::max(feas, std::abs(ce_[r]));
        for (std::size_t j = 0; j < m_in_; ++j) {
            feas = std::max(feas, p_.ineq_lo[j] - ci_[j]);
            feas = std::max(feas, ci_[j] - p_.ineq_hi[j]);
        }
        return std::max(feas, 0.0);
    }

    void to_natural_multipliers(std::vector<double>& out) const {
        out.resize(m_);
        for (std::size_t r = 0; r < m_; ++r) out[r] = lambda_[r] * row_scale_[r] / sigma_;
    }

    /// Row scale = 1 / (infinity norm of the column-scaled Jacobian row at
    /// the start point), clamped to [1e-8, 1e8]. Rows whose natural entries
    /// are tiny get boosted so every constraint participates in the penalty.
    void compute_row_scales(std::span<const double> z_natural) {
        std::vector<double> jv(nnz_);
        p_.jacobian(std::span<const double>(z_natural.data(), n_), jv);
        std::vector<double> rn(m_, 0.0);
        for (std::size_t t = 0; t < nnz_; ++t) {
            const std::size_t r = p_.jac_pattern.rows[t];
            const std::size_t c = p_.jac_pattern.cols[t];
            rn[r] = std::max(rn[r], std::abs(jv[t] * col_scale_[c]));
        }
        for (std::size_t r = 0; r < m_; ++r) {
            const double norm = rn[r] > 0.0 && std::isfinite(rn[r]) ? rn[r] : 1.0;
            row_scale_[r] = clamped(1.0 / norm, 1e-8, 1e8);
        }
    }

    double augmented_value(std::span<const double> z, std::span<double> h) {
        eval_scaled_constraints(z, h);
        double val = sigma_ * p_.objective(primal_view());
        for (std::size_t r = 0; r < m_; ++r) {
            val += h[r] * (0.5 * rho_ * h[r] - lambda_[r]);
        }
        return val;
    }

    /// Gradient of the augmented Lagrangian in scaled coordinates. Reuses the
    /// constraint values in `h` (from a matching augmented_value call).
    void augmented_gradient(std::span<const double> z, std::span<const double> h,
                            std::span<double> g) {
        unscale_into(z);
        gx_.assign(nz_, 0.0);
        p_.objective_gradient(primal_view(), std::span<double>(gx_.data(), n_));
        for (std::size_t j = 0; j < n_; ++j) gx_[j] *= sigma_;
        jv_.resize(nnz_);
        p_.jacobian(primal_view(), jv_);
        y_.resize(m_);
        for (std::size_t r = 0; r < m_; ++r) y_[r] = (lambda_[r] - rho_ * h[r]) * row_scale_[r];
        // Inactive inequality rows have h = lambda/rho exactly, so y vanishes
        // and they drop out of the gradient.
        for (std::size_t t = 0; t < nnz_; ++t) {
            gx_[p_.jac_pattern.cols[t]] -= y_[p_.jac_pattern.rows[t]] * jv_[t];
        }
        for (std::size_t j = 0; j < nz_; ++j) g[j] = gx_[j] * col_scale_[j];
    }

    /// Gauss-Newton diagonal of the augmented Lagrangian in the scaled
    /// metric: sigma * objective diagonal + rho * sum_r (w_r J_rj S_j)^2 over
    /// the equality rows and the currently active inequality rows (h != 0).
    /// Fixed for the duration of one inner solve.
    void compute_metric_diag(std::span<const double> z, std::span<const double> h,
                             std::vector<double>& diag) {
        unscale_into(z);
        diag.assign(nz_, 0.0);
        jv_.resize(nnz_);
        p_.jacobian(primal_view(), jv_);
        for (std::size_t t = 0; t < nnz_; ++t) {
            const std::size_t r = p_.jac_pattern.rows[t];
            if (r >= m_eq_ && h[r] == 0.0) continue;
            const double e = jv_[t] * row_scale_[r] * col_scale_[p_.jac_pattern.cols[t]];
            diag[p_.jac_pattern.cols[t]] += rho_ * e * e;
        }
        for (std::size_t j = 0; j < nz_; ++j) {
            diag[j] += sigma_ * obj_diag_[j] * col_scale_[j] * col_scale_[j];
        }
        double dmax = 0.0;
        for (double d : diag) dmax = std::max(dmax, d);
        const double floor = std::max(1e-12 * dmax, 1e-12);
        for (double& d : diag) d = std::max(d, floor);
    }

    void project(std::vector<double>& z) const {
        for (std::size_t j = 0; j < nz_; ++j) z[j] = clamped(z[j], zlo_[j], zhi_[j]);
    }

    double projected_gradient_norm(const std::vector<double>& z, const std::vector<double>& g) const {
        double v = 0.0;
        for (std::size_t j = 0; j < nz_; ++j) {
            v = std::max(v, std::abs(clamped(z[j] - g[j], zlo_[j], zhi_[j]) - z[j]));
        }
        return v;
    }

    /// Projected L-BFGS with a Gauss-Newton diagonal seed metric and Armijo
    /// backtracking. Returns inner iterations used, or -1 on a non-finite
    /// merit at the incumbent.
    int inner_minimize(std::vector<double>& z, double tol, int max_iter) {
        struct Pair {
            std::vector<double> s, y;
            double rho;
        };
        std::deque<Pair> mem;

        std::vector<double> h(m_), g(nz_), z_try(nz_), h_try(m_), g_new(nz_), d(nz_);
        project(z);
        double val = augmented_value(z, h);
        if (!std::isfinite(val)) return -1;
        augmented_gradient(z, h, g);
        compute_metric_diag(z, h, metric_);

        int it = 0;
        while (it < max_iter) {
            if (projected_gradient_norm(z, g) <= tol) break;
            ++it;

            // Two-loop recursion seeded with the diagonal metric.
            d = g;
            std::vector<double> alpha(mem.size());
            for (std::size_t idx = mem.size(); idx-- > 0;) {
                const Pair& pr = mem[idx];
                double a = 0.0;
                for (std::size_t j = 0; j < nz_; ++j) a += pr.s[j] * d[j];
                a *= pr.rho;
                alpha[idx] = a;
                for (std::size_t j = 0; j < nz_; ++j) d[j] -= a * pr.y[j];
            }
            double gamma = 1.0;
            if (!mem.empty()) {
                const Pair& last = mem.back();
                double sy = 0.0, yDy = 0.0;
                for (std::size_t j = 0; j < nz_; ++j) {
                    sy += last.s[j] * last.y[j];
                    yDy += last.y[j] * last.y[j] / metric_[j];
                }
                gamma = clamped(sy / std::max(yDy, 1e-300), 1e-8, 1e8);
            }
            for (std::size_t j = 0; j < nz_; ++j) d[j] *= gamma / metric_[j];
            for (std::size_t idx = 0; idx < mem.size(); ++idx) {
                const Pair& pr = mem[idx];
                double b = 0.0;
                for (std::size_t j = 0; j < nz_; ++j) b += pr.y[j] * d[j];
                b *= pr.rho;
                for (std::size_t j = 0; j < nz_; ++j) d[j] += (alpha[idx] - b) * pr.s[j];
            }
            for (std::size_t j = 0; j < nz_; ++j) d[j] = -d[j];

            double gd = 0.0;
            for (std::size_t j = 0; j < nz_; ++j) gd += g[j] * d[j];
            if (!(gd < 0.0)) {
                mem.clear();
                for (std::size_t j = 0; j < nz_; ++j) d[j] = -g[j] / metric_[j];
            }

            // Backtracking over the projected arc.
            double step = 1.0;
            bool accepted = false;
            double val_new = val;
            for (int ls = 0; ls < 60; ++ls) {
                for (std::size_t j = 0; j < nz_; ++j) z_try[j] = z[j] + step * d[j];
                project(z_try);
                double gdz = 0.0;
                for (std::size_t j = 0; j < nz_; ++j) gdz += g[j] * (z_try[j] - z[j]);
                if (gdz >= 0.0) {
                    // Projection removed all descent at this step size.
                    step *= 0.5;
                    continue;
                }
                const double v = augmented_value(z_try, h_try);
                if (std::isfinite(v) && v <= val + opt_.armijo_c * gdz) {
                    val_new = v;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) {
                if (!mem.empty()) {
                    mem.clear();
                    continue;  // retry from steepest descent
                }
                break;  // no progress possible at this tolerance
            }

            augmented_gradient(z_try, h_try, g_new);
            Pair pr;
            pr.s.resize(nz_);
            pr.y.resize(nz_);
            double sy = 0.0, ss = 0.0, yy = 0.0;
            for (std::size_t j = 0; j < nz_; ++j) {
                pr.s[j] = z_try[j] - z[j];
                pr.y[j] = g_new[j] - g[j];
                sy += pr.s[j] * pr.y[j];
                ss += pr.s[j] * pr.s[j];
                yy += pr.y[j] * pr.y[j];
            }
            if (sy > 1e-10 * std::sqrt(ss) * std::sqrt(yy)) {
                pr.rho = 1.0 / sy;
                mem.push_back(std::move(pr));
                if (static_cast<int>(mem.size()) > opt_.quasi_newton_memory) mem.pop_front();
            }
            z.swap(z_try);
            std::swap(h, h_try);
            g.swap(g_new);
            val = val_new;
        }
#ifdef SOTRACK_SOLVER_TRACE
        std::fprintf(stderr, "    [inner] it=%d pg=%.3e val=%.6e rho=%.1e tol=%.1e\n", it,
                     projected_gradient_norm(z, g), val, rho_, tol);
#endif
        return it;
    }

    const Nlp& p_;
    SolverOptions opt_;
    std::size_t n_ = 0, m_eq_ = 0, m_in_ = 0, m_ = 0, nz_ = 0, slack_at_ = 0, nnz_ = 0;
    double sigma_ = 1.0;
    double rho_ = 0.0;
    std::vector<double> col_scale_, row_scale_;
    std::vector<double> zlo_, zhi_;
    std::vector<double> lambda_;
    std::vector<double> obj_diag_;
    std::vector<double> metric_;
    // Scratch buffers (one solve owns its state exclusively).
    std::vector<double> xbuf_, ce_, ci_, gx_, jv_, y_;
};

}  // namespace detail

/// Minimizes the problem from x0. Deterministic: identical inputs produce
/// identical iterates, reports and log lines.
inline SolveResult solve(const Nlp& problem, std::span<const double> x0,
                         const SolverOptions& options = {}) {
    detail::AugLagSolver solver(problem, options);
    return solver.run(x0);
}

}  // namespace sotrack
