#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "agora/config.hpp"

namespace agora::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPartialFailure = 1;
inline constexpr int kExitConfigError = 2;

struct Options {
    std::optional<std::filesystem::path> out;  // overrides output_root
    int parallelism = 1;
    bool permutation_sweep = false;
    std::optional<double> tau;
    bool no_announce_closing = false;
    bool gender_awareness = false;
    std::optional<LeveneCenter> levene_center;
    std::optional<Grouping> grouping;
};

struct CmdResult {
    int exit_code = kExitOk;
    std::vector<std::filesystem::path> experiment_dirs;
};

/// Interviews every configured persona, judges alignment, writes the matrix
/// CSV under the output root and a summary to `out`.
CmdResult cmd_validate_personas(const std::filesystem::path& config_path, const Options& options,
                                std::ostream& out);

/// Executes all debate runs (all roster permutations under
/// --permutation-sweep), persisting transcripts as they happen.
CmdResult cmd_run(const std::filesystem::path& config_path, const Options& options,
                  std::ostream& out);

/// Scores the persisted transcripts of an experiment with the configured
/// judge and writes the attitude series.
CmdResult cmd_score(const std::filesystem::path& experiment_dir,
                    const std::filesystem::path& config_path, const Options& options,
                    std::ostream& out);

/// Writes the analysis report, CSV tables and SVG charts for each experiment
/// directory; with several directories, additionally compares them
/// (ANOVA + Levene).
CmdResult cmd_analyze(const std::vector<std::filesystem::path>& experiment_dirs,
                      const Options& options, std::ostream& out);

/// Prints a health report per configured backend.
CmdResult cmd_healthcheck(const std::filesystem::path& config_path, std::ostream& out);

}  // namespace agora::cli
