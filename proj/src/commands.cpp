#include "dreach/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "dreach/control_synthesis.hpp"
#include "dreach/errors.hpp"
#include "dreach/field_io.hpp"
#include "dreach/sa_pipeline.hpp"
#include "json.hpp"

namespace dreach {

namespace fs = std::filesystem;

namespace {

using Json = nlohmann::ordered_json;

template <typename F>
int guarded(const char* command, std::ostream& log, F&& body) {
    try {
        body();
        return exit_code::ok;
    } catch (const ConfigError& e) {
        log << command << ": config error: " << e.what() << '\n';
        return exit_code::config_error;
    } catch (const DomainError& e) {
        log << command << ": config error: " << e.what() << '\n';
        return exit_code::config_error;
    } catch (const MissingArtifact& e) {
        log << command << ": missing artifact: " << e.what() << '\n';
        return exit_code::missing_artifact;
    } catch (const std::exception& e) {
        log << command << ": solver failure: " << e.what() << '\n';
        return exit_code::solver_failure;
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

Json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifact(path.string() + " not found; run the corresponding solve first");
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw MissingArtifact(path.string() + " is unreadable: " + e.what());
    }
}

ScalarField load_artifact(const fs::path& path) {
    if (!fs::exists(path)) throw MissingArtifact(path.string() + " not found; run the corresponding solve first");
    return load_field(path);
}

void record_timing(const fs::path& out, const char* command, double seconds) {
    Json j = Json::object();
    std::ifstream in(out / artifact::timing);
    if (in) {
        try {
            j = Json::parse(in);
        } catch (const Json::exception&) {
            j = Json::object();
        }
    }
    j[command] = {{"wall_seconds", seconds}};
    write_json(out / artifact::timing, j);
}

std::size_t count_negative(const ScalarField& f) {
    std::size_t n = 0;
    for (double v : f.values()) n += v < 0.0;
    return n;
}

// Writes final field, snapshots and metadata of one reach-avoid solve.
Json write_solve(const fs::path& out, const SolveResult& r, const char* value_file, const char* snapshot_dir,
                 double gamma) {
    save_field(out / value_file, r.final_field);
    fs::remove_all(out / snapshot_dir);
    fs::create_directories(out / snapshot_dir);
    Json snaps = Json::array();
    for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
        std::ostringstream name;
        name << "snapshot_" << std::setw(4) << std::setfill('0') << k << ".bin";
        save_field(out / snapshot_dir / name.str(), r.snapshots[k].field);
        snaps.push_back({{"file", std::string(snapshot_dir) + "/" + name.str()},
                         {"time_to_go", r.snapshots[k].time_to_go}});
    }
    return {{"value_file", value_file},
            {"gamma", gamma},
            {"converged", r.converged},
            {"horizon", r.horizon},
            {"iterations", r.iterations},
            {"negative_nodes", count_negative(r.final_field)},
            {"snapshots", snaps},
            {"residual_history", r.residual_history}};
}

Json write_rclvf(const fs::path& out, const RclvfResult& r) {
    save_field(out / artifact::rclvf_raw, r.field);
    save_field(out / artifact::rclvf_shifted, r.shifted_field);
    std::size_t srcis_nodes = 0;
    for (char m : r.srcis_mask) srcis_nodes += m != 0;
    const Json meta = {{"raw_file", artifact::rclvf_raw},
                       {"shifted_file", artifact::rclvf_shifted},
                       {"point", r.p},
                       {"dims", r.dims},
                       {"gamma_clvf", r.gamma_clvf},
                       {"v_min", r.v_min},
                       {"big_m", r.big_m},
                       {"level_tol", r.level_tol},
                       {"cap", r.cap},
                       {"capped_nodes", r.capped},
                       {"srcis_nodes", srcis_nodes},
                       {"inner_set_nodes", count_negative(r.shifted_field)}};
    write_json(out / artifact::rclvf_meta, meta);
    return meta;
}

struct Setup {
    Grid grid;
    DynamicsSpec dyn;
    ScalarField ell, c;
};

Setup prepare(const ExperimentConfig& cfg, const fs::path& out) {
    validate(cfg);
    Grid grid = make_grid(cfg.grid);
    DynamicsSpec dyn = make_dynamics(cfg.system);
    ScalarField ell = sample_to_field(build_surface(cfg.target), grid);
    ScalarField c = sample_to_field(build_surface(cfg.constraint), grid);
    fs::create_directories(out);
    write_text(out / artifact::config, serialize_config(cfg));
    return {std::move(grid), std::move(dyn), std::move(ell), std::move(c)};
}

SolverConfig snapshot_solver(const ExperimentConfig& cfg) {
    SolverConfig s = cfg.solver;
    s.keep_snapshots = true;
    return s;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const StabilizeSpec& need_stabilize(const ExperimentConfig& cfg) {
    if (!cfg.stabilize) throw ConfigError("stabilize: section required for this command");
    return *cfg.stabilize;
}

void report_rclvf(std::ostream& log, const char* command, const RclvfResult& r) {
    log << command << ": v_min " << r.v_min << ", M " << r.big_m << ", " << count_negative(r.shifted_field)
        << " nodes in the inner set, " << r.capped << " capped\n";
}

void report_solve(std::ostream& log, const char* command, const SolveResult& r) {
    if (r.converged) {
        log << command << ": converged at time-to-go " << r.horizon << " after " << r.iterations << " steps\n";
    } else {
        log << command << ": not converged; stopped at time-to-go " << r.horizon
            << " (finite-horizon under-approximation)\n";
    }
}

}  // namespace

std::vector<Snapshot> load_snapshots(const fs::path& dir, const char* meta_file) {
    const Json meta = read_json(dir / meta_file);
    std::vector<Snapshot> out;
    for (const auto& s : meta.at("snapshots")) {
        out.push_back({s.at("time_to_go").get<double>(), load_artifact(dir / s.at("file").get<std::string>())});
    }
    if (out.empty()) throw MissingArtifact((dir / meta_file).string() + " lists no snapshots");
    return out;
}

RclvfResult load_rclvf(const fs::path& dir) {
    const Json meta = read_json(dir / artifact::rclvf_meta);
    RclvfResult r;
    r.field = load_artifact(dir / artifact::rclvf_raw);
    r.shifted_field = load_artifact(dir / artifact::rclvf_shifted);
    r.p = meta.at("point").get<std::vector<double>>();
    r.dims = meta.at("dims").get<std::vector<std::size_t>>();
    r.gamma_clvf = meta.at("gamma_clvf").get<double>();
    r.v_min = meta.at("v_min").get<double>();
    r.big_m = meta.at("big_m").get<double>();
    r.level_tol = meta.at("level_tol").get<double>();
    r.cap = meta.at("cap").get<double>();
    r.capped = meta.at("capped_nodes").get<std::size_t>();
    return r;
}

int cmd_solve_ra(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log) {
    return guarded("solve-ra", log, [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const Setup s = prepare(cfg, out);
        const SolveResult r = solve(s.ell, s.c, s.dyn, snapshot_solver(cfg));
        Json meta = write_solve(out, r, artifact::ra_value, artifact::ra_snapshots, cfg.solver.gamma);
        meta["lipschitz_condition"] = lipschitz_condition_holds(s.dyn, cfg.solver.gamma);
        write_json(out / artifact::ra_meta, meta);
        record_timing(out, "solve-ra", seconds_since(t0));
        report_solve(log, "solve-ra", r);
    });
}

int cmd_solve_rclvf(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log) {
    return guarded("solve-rclvf", log, [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto& stab = need_stabilize(cfg);
        const Setup s = prepare(cfg, out);
        const RclvfResult r = build_rclvf(s.dyn, s.ell, stab, cfg.solver);
        write_rclvf(out, r);
        record_timing(out, "solve-rclvf", seconds_since(t0));
        report_rclvf(log, "solve-rclvf", r);
    });
}

int cmd_solve_sa(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log) {
    return guarded("solve-sa", log, [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto& stab = need_stabilize(cfg);
        const Setup s = prepare(cfg, out);
        const SaResult r = solve_sa(s.dyn, s.ell, s.c, stab, snapshot_solver(cfg));
        write_rclvf(out, r.rclvf);
        Json meta = write_solve(out, r.ra, artifact::sa_value, artifact::sa_snapshots, cfg.solver.gamma);
        meta["rclvf_meta"] = artifact::rclvf_meta;
        write_json(out / artifact::sa_meta, meta);
        record_timing(out, "solve-sa", seconds_since(t0));
        report_rclvf(log, "solve-sa", r.rclvf);
        report_solve(log, "solve-sa", r.ra);
        log << "solve-sa: " << count_negative(r.sa_field) << " nodes in the stabilize-avoid set\n";
    });
}

int cmd_simulate(const ExperimentConfig& cfg, const fs::path& out, std::ostream& log) {
    return guarded("simulate", log, [&] {
        validate(cfg);
        const Grid grid = make_grid(cfg.grid);
        const DynamicsSpec dyn = make_dynamics(cfg.system);
        const bool sa = cfg.rollout.mode == RolloutMode::sa;
        const auto snapshots = load_snapshots(out, sa ? artifact::sa_meta : artifact::ra_meta);
        std::optional<RclvfResult> rclvf;
        if (sa) rclvf = load_rclvf(out);
        if (!(snapshots.front().field.grid() == grid) || (rclvf && !(rclvf->field.grid() == grid))) {
            throw GridMismatch("stored fields were computed on a different grid than the config describes");
        }
        const auto ell = build_surface(cfg.target);
        const auto c = build_surface(cfg.constraint);

        RolloutSpec spec;
        spec.mode = cfg.rollout.mode;
        spec.disturbance = cfg.rollout.disturbance;
        spec.dt = cfg.rollout.dt;
        spec.t_end = cfg.rollout.t_end;
        if (cfg.rollout.x0.empty()) log << "simulate: no initial states configured\n";

        Json runs = Json::array();
        for (std::size_t i = 0; i < cfg.rollout.x0.size(); ++i) {
            const auto tr = rollout(cfg.rollout.x0[i], spec, snapshots, rclvf ? &*rclvf : nullptr, dyn);
            const std::string name = "trajectory_" + std::string(to_string(spec.mode)) + "_" + std::to_string(i) + ".csv";
            std::ostringstream csv;
            write_trajectory_csv(csv, tr);
            write_text(out / name, csv.str());

            double min_ell = INFINITY, max_c = -INFINITY;
            Json switch_time = nullptr;
            for (std::size_t k = 0; k < tr.states.size(); ++k) {
                min_ell = std::min(min_ell, ell(tr.states[k]));
                max_c = std::max(max_c, c(tr.states[k]));
                if (switch_time.is_null() && tr.modes[k] == Phase::stabilize_phase) switch_time = tr.times[k];
            }
            Json run = {{"file", name},
                        {"x0", cfg.rollout.x0[i]},
                        {"final_state", tr.states.back()},
                        {"min_target", min_ell},
                        {"max_constraint", max_c},
                        {"reached_target", min_ell < 0.0},
                        {"safe", max_c < 0.0},
                        {"switch_time", switch_time},
                        {"clamped", tr.clamped},
                        {"fallback_steps", tr.fallbacks},
                        {"outside_domain", tr.outside_domain}};
            if (rclvf) run["final_distance_to_srcis"] = distance_to_srcis(*rclvf, tr.states.back());
            if (tr.clamped) log << "simulate: trajectory " << i << " left the grid; values were clamped\n";
            if (tr.fallbacks) log << "simulate: trajectory " << i << " used the largest-horizon fallback\n";
            runs.push_back(run);
        }
        write_json(out / artifact::simulate_meta, {{"mode", to_string(spec.mode)},
                                                   {"disturbance", to_string(spec.disturbance.kind)},
                                                   {"seed", spec.disturbance.seed},
                                                   {"dt", spec.dt},
                                                   {"t_end", spec.t_end},
                                                   {"trajectories", runs}});
        log << "simulate: wrote " << runs.size() << " trajectories\n";
    });
}

int cmd_export(const fs::path& field_file, const std::string& format, const fs::path& out_file, std::ostream& log) {
    return guarded("export", log, [&] {
        if (format != "csv") throw ConfigError("format: '" + format + "' is not supported (csv)");
        const ScalarField f = load_artifact(field_file);
        std::ostringstream csv;
        write_field_csv(csv, f);
        if (out_file.has_parent_path()) fs::create_directories(out_file.parent_path());
        write_text(out_file, csv.str());
    });
}

int run_command(const std::string& command, const fs::path& config_path, const std::optional<fs::path>& out,
                const std::optional<fs::path>& field, std::ostream& log) {
    if (command == "export" && field) {
        fs::path target = *field;
        target.replace_extension(".csv");
        if (out) target = *out;
        return cmd_export(*field, "csv", target, log);
    }
    ExperimentConfig cfg;
    const int status = guarded(command.c_str(), log, [&] { cfg = load_config(config_path); });
    if (status != exit_code::ok) return status;
    const fs::path dir = out ? *out : fs::path(cfg.output_dir);
    if (command == "solve-ra") return cmd_solve_ra(cfg, dir, log);
    if (command == "solve-rclvf") return cmd_solve_rclvf(cfg, dir, log);
    if (command == "solve-sa") return cmd_solve_sa(cfg, dir, log);
    if (command == "simulate") return cmd_simulate(cfg, dir, log);
    if (command == "export") {
        if (!fs::is_directory(dir)) {
            log << "export: missing artifact: output directory " << dir.string() << " does not exist\n";
            return exit_code::missing_artifact;
        }
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".bin") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        if (files.empty()) {
            log << "export: missing artifact: no field files in " << dir.string() << '\n';
            return exit_code::missing_artifact;
        }
        for (const auto& f : files) {
            fs::path target = f;
            target.replace_extension(".csv");
            if (const int rc = cmd_export(f, "csv", target, log); rc != exit_code::ok) return rc;
        }
        log << "export: wrote " << files.size() << " csv files\n";
        return exit_code::ok;
    }
    log << "unknown command '" << command << "'\n";
    return exit_code::config_error;
}

}  // namespace dreach
