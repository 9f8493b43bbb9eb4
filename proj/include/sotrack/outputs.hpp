#pragma once

#include "sotrack/config.hpp"
#include "sotrack/ephemeris.hpp"
#include "sotrack/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

namespace sotrack {

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open output file: " + path.string());
    return os;
}

inline void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
    os << kEphemerisHeader << '\n';
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const State& s = traj.states[i];
        const double vals[7] = {traj.grid.time_at(static_cast<int>(i)),
                                s.r.x, s.r.y, s.r.z, s.v.x, s.v.y, s.v.z};
        for (int j = 0; j < 7; ++j) {
            if (j) os << ',';
            write_csv_value(os, vals[j]);
        }
        os << '\n';
    }
}

inline void write_control_csv(const TimeGrid& grid, const ControlSchedule& schedule,
                              std::ostream& os) {
    os << "t_s,ux_kms2,uy_kms2,uz_kms2,b\n";
    for (std::size_t i = 0; i < schedule.u.size(); ++i) {
        const double vals[5] = {grid.time_at(static_cast<int>(i)), schedule.u[i].x,
                                schedule.u[i].y, schedule.u[i].z, schedule.b[i]};
        for (int j = 0; j < 5; ++j) {
            if (j) os << ',';
            write_csv_value(os, vals[j]);
        }
        os << '\n';
    }
}

inline void write_distance_csv(const DistanceSeries& ds, int norm_q, std::ostream& os) {
    os << "t_s,distance_km,norm_q\n";
    for (std::size_t i = 0; i < ds.t.size(); ++i) {
        write_csv_value(os, ds.t[i]);
        os << ',';
        write_csv_value(os, ds.distance[i]);
        os << ',' << norm_q << '\n';
    }
}

inline void echo_config(nlohmann::ordered_json& j, const ProblemConfig& c) {
    j["config_hash"] = config_hash(c);
    j["config_mu"] = c.mu;
    j["config_t0"] = c.grid.t0;
    j["config_dt"] = c.grid.dt;
    j["config_n"] = c.grid.n_intervals;
    j["config_delta_min"] = c.delta_min;
    j["config_delta_max"] = c.delta_max;
    j["config_delta0"] = {c.delta0.x, c.delta0.y, c.delta0.z};
    j["config_u_min"] = {c.u_min.x, c.u_min.y, c.u_min.z};
    j["config_u_max"] = {c.u_max.x, c.u_max.y, c.u_max.z};
    j["config_n_budget"] = c.n_budget;
    j["config_norm_q"] = c.norm_q;
    j["config_beta"] = c.beta;
    j["config_abs_smoothing_eps"] = c.abs_smoothing_eps;
    j["config_nondimensional_scaling"] = c.nondimensional_scaling;
}

}  // namespace detail

/// Persists a completed plan: trajectory.csv, control.csv, distance.csv and
/// summary.json under out_dir. Identical plans produce identical bytes.
inline void write_outputs(const MissionPlan& plan, const ProblemConfig& config,
                          const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    {
        auto os = detail::open_output(out_dir / "trajectory.csv");
        detail::write_trajectory_csv(plan.trajectory, os);
    }
    {
        auto os = detail::open_output(out_dir / "control.csv");
        detail::write_control_csv(plan.trajectory.grid, plan.schedule, os);
    }
    {
        auto os = detail::open_output(out_dir / "distance.csv");
        detail::write_distance_csv(plan.distance_series, config.norm_q, os);
    }

    nlohmann::ordered_json j;
    detail::echo_config(j, config);
    j["relaxed_objective"] = plan.relaxed_objective;
    j["final_objective"] = plan.final_objective;
    j["gap"] = plan.gap;
    j["gap_kind"] = "local";  // relaxation solved locally; not a global bound
    j["beta_used"] = plan.beta_used;
    j["feas_eq"] = plan.feas_eq;
    j["feas_ineq"] = plan.feas_ineq;
    j["status_relaxed"] = to_string(plan.relaxed_report.status);
    j["status_fixed"] = to_string(plan.fixed_report.status);
    j["relaxed_outer_iters"] = plan.relaxed_report.outer_iters;
    j["relaxed_inner_iters"] = plan.relaxed_report.inner_iters;
    j["fixed_outer_iters"] = plan.fixed_report.outer_iters;
    j["fixed_inner_iters"] = plan.fixed_report.inner_iters;
    j["time_sim_s"] = plan.sim_time_s;
    j["time_relaxed_s"] = plan.relaxed_report.wall_time_s;
    j["time_fixed_s"] = plan.fixed_report.wall_time_s;
    j["distance_min_km"] = *std::min_element(plan.distance_series.distance.begin(),
                                             plan.distance_series.distance.end());
    j["distance_max_km"] = *std::max_element(plan.distance_series.distance.begin(),
                                             plan.distance_series.distance.end());

    auto os = detail::open_output(out_dir / "summary.json");
    os << j.dump(2) << '\n';
}

/// Persists a simulation-only run (no schedule): trajectory.csv,
/// distance.csv and a reduced summary.json.
inline void write_sim_outputs(const Trajectory& traj, const DistanceSeries& ds,
                              const ProblemConfig& config, const std::filesystem::path& out_dir,
                              double sim_time_s) {
    std::filesystem::create_directories(out_dir);
    {
        auto os = detail::open_output(out_dir / "trajectory.csv");
        detail::write_trajectory_csv(traj, os);
    }
    {
        auto os = detail::open_output(out_dir / "distance.csv");
        detail::write_distance_csv(ds, config.norm_q, os);
    }
    nlohmann::ordered_json j;
    detail::echo_config(j, config);
    j["mode"] = "sim";
    j["time_sim_s"] = sim_time_s;
    const double dmin = *std::min_element(ds.distance.begin(), ds.distance.end());
    const double dmax = *std::max_element(ds.distance.begin(), ds.distance.end());
    j["distance_min_km"] = dmin;
    j["distance_max_km"] = dmax;
    j["band_violated"] = dmin < config.delta_min || dmax > config.delta_max;
    auto os = detail::open_output(out_dir / "summary.json");
    os << j.dump(2) << '\n';
}

/// Persists a relaxed-solve run: control.csv carries the fractional
/// activations, trajectory/distance come from the relaxed states.
inline void write_relaxed_outputs(const TranscribedProblem& problem, const SolveResult& res,
                                  const TargetEphemeris& target,
                                  const std::filesystem::path& out_dir) {
    const ProblemConfig& config = problem.config();
    std::filesystem::create_directories(out_dir);
    Trajectory traj = detail::trajectory_from_solution(problem, res.x);
    const DistanceSeries ds = distance_series(traj, target, config);
    {
        auto os = detail::open_output(out_dir / "trajectory.csv");
        detail::write_trajectory_csv(traj, os);
    }
    {
        auto os = detail::open_output(out_dir / "distance.csv");
        detail::write_distance_csv(ds, config.norm_q, os);
    }
    {
        ControlSchedule schedule;
        schedule.u.resize(problem.layout().nodes());
        schedule.b.resize(problem.layout().nodes());
        for (int i = 0; i < problem.layout().nodes(); ++i) {
            schedule.u[i] = problem.get_u(res.x, i);
            schedule.b[i] = res.x[problem.layout().b_index(i)];
        }
        auto os = detail::open_output(out_dir / "control.csv");
        detail::write_control_csv(traj.grid, schedule, os);
    }
    nlohmann::ordered_json j;
    detail::echo_config(j, config);
    j["mode"] = problem.mode() == Mode::RNLP_T ? "relax" : "relax-no-persp";
    j["relaxed_objective"] = res.report.objective;
    j["status_relaxed"] = to_string(res.report.status);
    j["relaxed_outer_iters"] = res.report.outer_iters;
    j["relaxed_inner_iters"] = res.report.inner_iters;
    j["time_relaxed_s"] = res.report.wall_time_s;
    j["feas_inf_norm"] = res.report.feas_inf_norm;
    j["stat_inf_norm"] = res.report.stat_inf_norm;
    auto os = detail::open_output(out_dir / "summary.json");
    os << j.dump(2) << '\n';
}

}  // namespace sotrack
