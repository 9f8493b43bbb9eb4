#pragma once

#include "sotrack/config.hpp"
#include "sotrack/dynamics.hpp"
#include "sotrack/ephemeris.hpp"
#include "sotrack/solver.hpp"
#include "sotrack/transcription.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sotrack {

/// Thrust plan: node controls plus activation levels (integral after rounding).
struct ControlSchedule {
    std::vector<Vec3> u;   // [km/s^2], N+1 entries
    std::vector<double> b; // [0,1], N+1 entries
};

/// One (t, distance) sample per node in the configured norm.
struct DistanceSeries {
    std::vector<double> t;
    std::vector<double> distance;
};

/// End-to-end result: relax, round, re-solve.
struct MissionPlan {
    Trajectory trajectory;
    ControlSchedule schedule;
    double relaxed_objective = 0.0;
    double final_objective = 0.0;
    double gap = 0.0;  // local gap: no global certificate is claimed
    double beta_used = 0.0;
    SolveReport relaxed_report;
    SolveReport fixed_report;
    double sim_time_s = 0.0;
    DistanceSeries distance_series;
    double feas_eq = 0.0;    // final-plan equality violation (inf norm)
    double feas_ineq = 0.0;  // final-plan inequality violation (inf norm)
};

enum class PipelineStage { Sim, Relaxed, Rounding, FixedBinary };

inline const char* to_string(PipelineStage s) {
    switch (s) {
        case PipelineStage::Sim: return "sim";
        case PipelineStage::Relaxed: return "relaxed";
        case PipelineStage::Rounding: return "rounding";
        case PipelineStage::FixedBinary: return "fixed_binary";
    }
    return "?";
}

struct PipelineResult {
    bool ok = false;
    PipelineStage failed_stage = PipelineStage::Sim;
    std::string message;
    std::optional<MissionPlan> plan;  // set on success
    SolveReport failed_report;        // report of the failing solve, if any
};

/// Distances between a trajectory and the target at every node, in the
/// configured norm (smoothed L1 for q = 1).
inline DistanceSeries distance_series(const Trajectory& traj, const TargetEphemeris& target,
                                      const ProblemConfig& config) {
    DistanceSeries ds;
    ds.t.reserve(traj.states.size());
    ds.distance.reserve(traj.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        ds.t.push_back(traj.grid.time_at(static_cast<int>(i)));
        ds.distance.push_back(config.distance(traj.states[i].r - target.r_bar[i]));
    }
    return ds;
}

/// Zero-thrust simulation from the configured initial offset.
inline std::pair<Trajectory, DistanceSeries> run_sim(const ProblemConfig& config,
                                                     const TargetEphemeris& target) {
    validate(config);
    if (!target.matches_grid(config.grid)) {
        throw std::invalid_argument("run_sim: target grid does not match config grid");
    }
    const State s0 = chaser_initial_state(config, target);
    const std::vector<Vec3> zeros(config.grid.node_count(), Vec3{});
    Trajectory traj = propagate(s0, zeros, config.grid, config.mu);
    DistanceSeries ds = distance_series(traj, target, config);
    return {std::move(traj), std::move(ds)};
}

/// Solver settings for the transcription NLPs. Stationarity forcing and
/// iteration budgets grow with the horizon; everything stays deterministic.
inline SolverOptions tracking_solver_options(const ProblemConfig& config) {
    SolverOptions opt;
    opt.rho0 = 100.0;
    opt.rho_growth = 10.0;
    opt.max_outer = 60;
    opt.max_inner = 40 * (config.grid.n_intervals + 1);
    opt.quasi_newton_memory = 20;
    return opt;
}

/// Solves the relaxed problem (RNLP-T when perspective is set, RNLP
/// otherwise) from the zero-thrust warm start.
inline std::pair<SolveResult, const char*> solve_relaxed_impl(
    const ProblemConfig& config, const TargetEphemeris& target, bool perspective,
    const SolverOptions& options) {
    TranscribedProblem problem(config, target, perspective ? Mode::RNLP_T : Mode::RNLP);
    const auto [traj, ds] = run_sim(config, target);
    (void)ds;
    const std::vector<double> x0 = problem.init_from_sim(traj);
    const Nlp nlp = problem.as_nlp();
    SolveResult res = solve(nlp, x0, options);
    return {std::move(res), to_string(problem.mode())};
}

inline SolveResult solve_relaxed(const ProblemConfig& config, const TargetEphemeris& target,
                                 bool perspective,
                                 std::optional<SolverOptions> options = std::nullopt) {
    const SolverOptions opt = options ? *options : tracking_solver_options(config);
    return solve_relaxed_impl(config, target, perspective, opt).first;
}

/// Threshold rounding with budget repair: b_i = 1 iff b*_i >= beta; if more
/// than n_budget nodes survive, keep the n_budget largest b* (ties to the
/// earliest node).
inline std::vector<int> round_binaries(const std::vector<double>& b_star, double beta,
                                       int n_budget) {
    const std::size_t n = b_star.size();
    std::vector<int> b(n, 0);
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < n; ++i) {
        if (b_star[i] >= beta) active.push_back(i);
    }
    if (static_cast<int>(active.size()) > n_budget) {
        std::stable_sort(active.begin(), active.end(),
                         [&](std::size_t a, std::size_t c) { return b_star[a] > b_star[c]; });
        active.resize(n_budget);
    }
    for (std::size_t i : active) b[i] = 1;
    return b;
}

namespace detail {

/// Maps a relaxed solution onto a fixed-binary warm start: shared blocks are
/// copied, controls are clipped into the per-node boxes and slacks refreshed.
inline std::vector<double> warm_start_fixed(const TranscribedProblem& fixed,
                                            const TranscribedProblem& relaxed,
                                            const std::vector<double>& x_relaxed) {
    const VariableLayout& Lf = fixed.layout();
    const VariableLayout& Lr = relaxed.layout();
    std::vector<double> x(Lf.total_dim, 0.0);
    const int N = Lf.n_intervals;
    for (int i = 0; i <= N; ++i) {
        for (int c = 0; c < 3; ++c) {
            x[Lf.r_index(i, c)] = x_relaxed[Lr.r_index(i, c)];
            x[Lf.v_index(i, c)] = x_relaxed[Lr.v_index(i, c)];
            const std::size_t uj = Lf.u_index(i, c);
            x[uj] = std::clamp(x_relaxed[Lr.u_index(i, c)], fixed.x_lower()[uj], fixed.x_upper()[uj]);
        }
    }
    for (int i = 0; i < N; ++i) {
        for (int m = 1; m <= 4; ++m) {
            for (int c = 0; c < 3; ++c) {
                x[Lf.k_index(i, m, c)] = x_relaxed[Lr.k_index(i, m, c)];
                x[Lf.kv_index(i, m, c)] = x_relaxed[Lr.kv_index(i, m, c)];
            }
            x[Lf.dtil_index(i, m)] = x_relaxed[Lr.dtil_index(i, m)];
        }
    }
    std::vector<double> ci(Lf.num_ineq);
    fixed.inequality_values(x, ci);
    for (std::size_t j = 0; j < Lf.num_ineq; ++j) {
        x[Lf.slack_index(j)] =
            std::clamp(ci[j], fixed.x_lower()[Lf.slack_index(j)], fixed.x_upper()[Lf.slack_index(j)]);
    }
    return x;
}

inline Trajectory trajectory_from_solution(const TranscribedProblem& p,
                                           const std::vector<double>& x) {
    Trajectory traj;
    traj.grid = p.config().grid;
    traj.states.reserve(p.layout().nodes());
    for (int i = 0; i < p.layout().nodes(); ++i) {
        traj.states.push_back(State{p.get_r(x, i), p.get_v(x, i)});
    }
    return traj;
}

}  // namespace detail

/// Algorithm: zero-thrust simulation, perspective-tightened relaxation from
/// the simulation warm start, threshold rounding with budget repair, then a
/// continuous re-solve with the binaries frozen. If the fixed-binary solve
/// fails, progressively lower cut-offs (0.4, 0.3, 0.2) admit more thrust
/// nodes before the pipeline reports failure.
inline PipelineResult run_pipeline(const ProblemConfig& config, const TargetEphemeris& target,
                                   std::optional<SolverOptions> options = std::nullopt) {
    PipelineResult result;
    const SolverOptions opt = options ? *options : tracking_solver_options(config);

    // Stage 1: simulation.
    Trajectory sim_traj;
    double sim_seconds = 0.0;
    try {
        const auto t0 = std::chrono::steady_clock::now();
        auto [traj, ds] = run_sim(config, target);
        sim_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        sim_traj = std::move(traj);
        (void)ds;
    } catch (const std::exception& e) {
        result.failed_stage = PipelineStage::Sim;
        result.message = e.what();
        return result;
    }

    // Stage 2: perspective-tightened relaxation.
    TranscribedProblem relaxed(config, target, Mode::RNLP_T);
    const std::vector<double> x0 = relaxed.init_from_sim(sim_traj);
    const Nlp relaxed_nlp = relaxed.as_nlp();
    SolveResult relaxed_res = solve(relaxed_nlp, x0, opt);
    if (relaxed_res.report.status != SolveStatus::OPTIMAL_LOCAL) {
        result.failed_stage = PipelineStage::Relaxed;
        result.message = std::string("relaxed solve ended with status ") +
                         to_string(relaxed_res.report.status);
        result.failed_report = relaxed_res.report;
        return result;
    }

    std::vector<double> b_star(relaxed.layout().nodes());
    for (int i = 0; i < relaxed.layout().nodes(); ++i) {
        b_star[i] = relaxed_res.x[relaxed.layout().b_index(i)];
    }

    // Stages 3-4: rounding with a beta fall-back ladder, then the fixed NLP.
    std::vector<double> betas{config.beta};
    for (double fallback : {0.4, 0.3, 0.2}) {
        if (fallback < config.beta) betas.push_back(fallback);
    }

    SolveReport last_fixed_report;
    for (double beta : betas) {
        const std::vector<int> b_fixed = round_binaries(b_star, beta, config.n_budget);
        TranscribedProblem fixed(config, target, Mode::FIXED_BINARY, b_fixed);
        const std::vector<double> xw = detail::warm_start_fixed(fixed, relaxed, relaxed_res.x);
        const Nlp fixed_nlp = fixed.as_nlp();
        SolveResult fixed_res = solve(fixed_nlp, xw, opt);
        last_fixed_report = fixed_res.report;
        if (fixed_res.report.status != SolveStatus::OPTIMAL_LOCAL) continue;

        MissionPlan plan;
        plan.trajectory = detail::trajectory_from_solution(fixed, fixed_res.x);
        plan.schedule.u.resize(fixed.layout().nodes());
        plan.schedule.b.assign(b_fixed.begin(), b_fixed.end());
        for (int i = 0; i < fixed.layout().nodes(); ++i) {
            plan.schedule.u[i] = fixed.get_u(fixed_res.x, i);
        }
        plan.relaxed_objective = relaxed_res.report.objective;
        plan.final_objective = fixed_res.report.objective;
        plan.gap = (plan.final_objective - plan.relaxed_objective) /
                   std::max(1.0, std::abs(plan.final_objective));
        plan.beta_used = beta;
        plan.relaxed_report = relaxed_res.report;
        plan.fixed_report = fixed_res.report;
        plan.sim_time_s = sim_seconds;
        plan.distance_series = distance_series(plan.trajectory, target, config);

        // Final-plan residuals, reported for the record.
        std::vector<double> ce(fixed.layout().num_eq), ci(fixed.layout().num_ineq);
        fixed.equality_residuals(fixed_res.x, ce);
        fixed.inequality_values(fixed_res.x, ci);
        for (double v : ce) plan.feas_eq = std::max(plan.feas_eq, std::abs(v));
        for (std::size_t j = 0; j < ci.size(); ++j) {
            plan.feas_ineq = std::max(plan.feas_ineq, fixed.ineq_lower()[j] - ci[j]);
            plan.feas_ineq = std::max(plan.feas_ineq, ci[j] - fixed.ineq_upper()[j]);
        }
        plan.feas_ineq = std::max(plan.feas_ineq, 0.0);

        result.ok = true;
        result.plan = std::move(plan);
        return result;
    }

    result.failed_stage = PipelineStage::FixedBinary;
    result.message = "fixed-binary solve failed for every beta in the fall-back ladder";
    result.failed_report = last_fixed_report;
    return result;
}

}  // namespace sotrack
