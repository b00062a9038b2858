#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "agora/cli.hpp"
#include "agora/version.hpp"

namespace {

void add_common_flags(CLI::App* cmd, agora::cli::Options& options, std::string& levene_center,
                      std::string& grouping) {
    cmd->add_option("--parallelism", options.parallelism, "Worker pool size for runs/scoring")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--tau", options.tau, "Echo-chamber slope threshold (score/round)");
    cmd->add_flag("--no-announce-closing", options.no_announce_closing,
                  "Replace the closing statement with an ordinary round prompt");
    cmd->add_flag("--gender-awareness", options.gender_awareness,
                  "Tell every agent the names and genders of all participants");
    cmd->add_option("--levene-center", levene_center, "Levene centering: mean|median")
        ->check(CLI::IsMember({"mean", "median"}));
    cmd->add_option("--grouping", grouping, "Comparison grouping: pooled|round-means")
        ->check(CLI::IsMember({"pooled", "round-means"}));
}

void finalize_options(agora::cli::Options& options, const std::string& levene_center,
                      const std::string& grouping, const std::string& out) {
    if (!out.empty()) options.out = out;
    if (!levene_center.empty())
        options.levene_center = levene_center == "mean" ? agora::LeveneCenter::Mean
                                                        : agora::LeveneCenter::Median;
    if (!grouping.empty())
        options.grouping = grouping == "pooled" ? agora::Grouping::Pooled
                                                : agora::Grouping::ByRoundMeans;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-agent political debate simulation and bias analysis"};
    app.set_version_flag("--version", agora::kVersion);
    app.require_subcommand(1);

    agora::cli::Options options;
    std::string config_path;
    std::string out_dir;
    std::string levene_center;
    std::string grouping;
    std::string experiment_dir;
    std::vector<std::string> analyze_dirs;

    auto* run = app.add_subcommand("run", "Execute the configured debate experiment");
    run->add_option("--config", config_path, "Experiment config file")->required();
    run->add_option("--out", out_dir, "Output root (overrides the config)");
    run->add_flag("--permutation-sweep", options.permutation_sweep,
                  "Run every speaking-order permutation as its own experiment");
    add_common_flags(run, options, levene_center, grouping);

    auto* score = app.add_subcommand("score", "Score persisted transcripts with the judge");
    score->add_option("experiment", experiment_dir, "Experiment directory")->required();
    score->add_option("--config", config_path, "Experiment config file")->required();
    add_common_flags(score, options, levene_center, grouping);

    auto* analyze = app.add_subcommand("analyze", "Write reports, CSV tables and charts");
    analyze->add_option("experiments", analyze_dirs, "Experiment directories")->required();
    add_common_flags(analyze, options, levene_center, grouping);

    auto* validate = app.add_subcommand("validate-personas",
                                        "Interview personas and judge their alignment");
    validate->add_option("--config", config_path, "Experiment config file")->required();
    validate->add_option("--out", out_dir, "Output root (overrides the config)");
    add_common_flags(validate, options, levene_center, grouping);

    auto* health = app.add_subcommand("healthcheck", "Probe every configured backend");
    health->add_option("--config", config_path, "Experiment config file")->required();

    CLI11_PARSE(app, argc, argv);
    finalize_options(options, levene_center, grouping, out_dir);

    agora::cli::CmdResult result;
    if (run->parsed()) result = agora::cli::cmd_run(config_path, options, std::cout);
    else if (score->parsed())
        result = agora::cli::cmd_score(experiment_dir, config_path, options, std::cout);
    else if (analyze->parsed()) {
        std::vector<std::filesystem::path> dirs(analyze_dirs.begin(), analyze_dirs.end());
        result = agora::cli::cmd_analyze(dirs, options, std::cout);
    } else if (validate->parsed())
        result = agora::cli::cmd_validate_personas(config_path, options, std::cout);
    else if (health->parsed()) result = agora::cli::cmd_healthcheck(config_path, std::cout);

    return result.exit_code;
}
