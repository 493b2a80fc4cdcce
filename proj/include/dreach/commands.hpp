#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dreach/experiment.hpp"
#include "dreach/level_set.hpp"
#include "dreach/rclvf.hpp"

namespace dreach {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 1;
inline constexpr int solver_failure = 2;
inline constexpr int missing_artifact = 3;
}  // namespace exit_code

// Files written into the output directory.
namespace artifact {
inline constexpr const char* config = "config.json";
inline constexpr const char* timing = "timing.json";
inline constexpr const char* ra_value = "ra_value.bin";
inline constexpr const char* ra_meta = "ra_meta.json";
inline constexpr const char* ra_snapshots = "ra_snapshots";
inline constexpr const char* rclvf_raw = "rclvf_raw.bin";
inline constexpr const char* rclvf_shifted = "rclvf_shifted.bin";
inline constexpr const char* rclvf_meta = "rclvf_meta.json";
inline constexpr const char* sa_value = "sa_value.bin";
inline constexpr const char* sa_meta = "sa_meta.json";
inline constexpr const char* sa_snapshots = "sa_snapshots";
inline constexpr const char* simulate_meta = "simulate_meta.json";
}  // namespace artifact

// Each command returns an exit code and never throws; failures are reported
// on `log`.
int cmd_solve_ra(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log);
int cmd_solve_rclvf(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log);
int cmd_solve_sa(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log);

/// Rolls out every configured x0 with the stored controllers of
/// rollout.mode, writing trajectory_<mode>_<i>.csv and a summary.
int cmd_simulate(const ExperimentConfig& cfg, const std::filesystem::path& out, std::ostream& log);

/// Binary field to headerless CSV (coordinates then value per node).
int cmd_export(const std::filesystem::path& field_file, const std::string& format,
               const std::filesystem::path& out_file, std::ostream& log);

/// Loads the config and dispatches. `out` overrides output_dir. For
/// "export", `field` selects one file; without it every top-level .bin in
/// the output directory is converted next to itself.
int run_command(const std::string& command, const std::filesystem::path& config_path,
                const std::optional<std::filesystem::path>& out, const std::optional<std::filesystem::path>& field,
                std::ostream& log);

/// Snapshots listed in a solve's metadata file. Throws MissingArtifact.
std::vector<Snapshot> load_snapshots(const std::filesystem::path& dir, const char* meta_file);

/// Raw and shifted R-CLVF fields plus their metadata. Throws MissingArtifact.
RclvfResult load_rclvf(const std::filesystem::path& dir);

}  // namespace dreach
