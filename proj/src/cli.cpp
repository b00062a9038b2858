#include "agora/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>

#include "agora/chart.hpp"
#include "agora/runstore.hpp"
#include "agora/version.hpp"

namespace agora::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Shortest round-trip formatting, identical to the JSON reports, so CSV
// cells never drift from the persisted values.
std::string num(double value) { return json(value).dump(); }

void apply_overrides(ExperimentConfig& config, const Options& options) {
    if (options.out) config.output_root = *options.out;
    if (options.no_announce_closing) config.protocol.announce_closing = false;
    if (options.gender_awareness) config.protocol.gender_awareness = true;
    if (options.tau) config.analysis.tau = *options.tau;
    if (options.grouping) config.analysis.grouping = *options.grouping;
    if (options.levene_center) config.analysis.levene_center = *options.levene_center;
}

struct AgentInfo {
    std::string id;
    std::string name;
    Leaning leaning = Leaning::Neutral;
};

std::vector<AgentInfo> agents_from_manifest(const RunManifest& manifest) {
    std::map<std::string, AgentInfo> by_id;
    if (manifest.config_snapshot.contains("personas"))
        for (const auto& entry : manifest.config_snapshot.at("personas")) {
            AgentInfo info;
            info.id = entry.value("id", "");
            info.leaning = leaning_from_string(entry.value("leaning", "neutral"));
            info.name = entry.value("name", default_agent_name(info.leaning));
            by_id[info.id] = std::move(info);
        }
    std::vector<AgentInfo> agents;
    for (const auto& id : manifest.roster_order) {
        auto it = by_id.find(id);
        if (it != by_id.end()) agents.push_back(it->second);
        else agents.push_back(AgentInfo{id, id, Leaning::Neutral});
    }
    return agents;
}

Scenario scenario_from_manifest(const RunManifest& manifest) {
    const json& s = manifest.config_snapshot.at("scenario");
    return Scenario{s.value("topic", ""), s.value("scenario_text", ""),
                    s.value("debate_question", ""), s.value("evaluation_prompt", "")};
}

AnalysisConfig analysis_from_manifest(const RunManifest& manifest, const Options& options) {
    AnalysisConfig analysis;
    if (manifest.config_snapshot.contains("analysis")) {
        const json& a = manifest.config_snapshot.at("analysis");
        analysis.tau = a.value("tau", 0.05);
        analysis.grouping =
            a.value("grouping", "pooled") == "pooled" ? Grouping::Pooled : Grouping::ByRoundMeans;
        analysis.levene_center = a.value("levene_center", "mean") == "mean"
                                     ? LeveneCenter::Mean
                                     : LeveneCenter::Median;
        analysis.regression_domain = a.value("regression_domain", "all-phases") == "all-phases"
                                         ? RegressionDomain::AllPhases
                                         : RegressionDomain::RoundsOnly;
    }
    if (options.tau) analysis.tau = *options.tau;
    if (options.grouping) analysis.grouping = *options.grouping;
    if (options.levene_center) analysis.levene_center = *options.levene_center;
    return analysis;
}

json test_result_to_json(const TestResult& result) {
    return json{{"statistic", result.statistic},
                {"df1", result.df1},
                {"df2", result.df2},
                {"p_value", result.p_value},
                {"significant", result.significant}};
}

std::string phase_csv_label(const PhaseRef& phase) { return phase_label(phase); }

// Builds the per-experiment analysis report plus its CSV/SVG exports.
void analyze_one(Experiment& experiment, const LoadedExperiment& loaded,
                 const AnalysisConfig& analysis, std::ostream& out) {
    const auto agents = agents_from_manifest(loaded.manifest);
    const AttitudeSeries& series = *loaded.series;

    json agents_report = json::object();
    std::vector<Trajectory> trajectories;
    std::vector<ChartSeries> chart_series;
    std::vector<std::string> opinionated;

    std::ostringstream trajectories_csv;
    trajectories_csv << "agent,phase,position,mean,q1,median,q3,min,max,n\n";
    std::ostringstream reversion_csv;
    reversion_csv << "agent,run,reversion_ratio\n";

    for (const auto& agent : agents) {
        json agent_report{{"name", agent.name}, {"leaning", to_string(agent.leaning)}};
        if (agent.leaning != Leaning::Neutral) opinionated.push_back(agent.id);

        try {
            Trajectory traj = trajectory(series, agent.id);
            json phases = json::array();
            for (const auto& phase : traj.phases) {
                phases.push_back({{"phase", phase_csv_label(phase.phase)},
                                  {"position", phase.position},
                                  {"mean", phase.mean},
                                  {"q1", phase.q1},
                                  {"median", phase.median},
                                  {"q3", phase.q3},
                                  {"min", phase.min},
                                  {"max", phase.max},
                                  {"n", phase.n}});
                trajectories_csv << agent.id << ',' << phase_csv_label(phase.phase) << ','
                                 << phase.position << ',' << num(phase.mean) << ','
                                 << num(phase.q1) << ',' << num(phase.median) << ','
                                 << num(phase.q3) << ',' << num(phase.min) << ','
                                 << num(phase.max) << ',' << phase.n << '\n';
            }
            agent_report["trajectory"] = std::move(phases);

            std::vector<double> means;
            for (const auto& phase : traj.phases) {
                if (analysis.regression_domain == RegressionDomain::RoundsOnly &&
                    phase.phase.phase != Phase::Round)
                    continue;
                means.push_back(phase.mean);
            }
            if (means.size() >= 2) agent_report["slope"] = linear_gradient(means);

            trajectories.push_back(std::move(traj));
            chart_series.push_back(ChartSeries{trajectories.back(), agent.leaning,
                                               agent.name + " (" +
                                                   to_string(agent.leaning) + ")"});
        } catch (const NoData&) {
            agent_report["trajectory"] = json::array();
        }

        json per_run = json::object();
        for (int run_id : series.run_ids())
            if (auto value = run_reversion(series, agent.id, run_id)) {
                per_run[std::to_string(run_id)] = *value;
                reversion_csv << agent.id << ',' << run_id << ',' << num(*value) << '\n';
            }
        json reversion{{"per_run", std::move(per_run)}};
        try {
            reversion["mean"] = mean_reversion(series, agent.id);
        } catch (const NoData&) {
            reversion["mean"] = nullptr;
        }
        agent_report["reversion"] = std::move(reversion);

        int gaps = 0;
        for (const auto& entry : series.entries)
            if (entry.agent_id == agent.id && !entry.score) ++gaps;
        agent_report["gaps"] = gaps;
        agents_report[agent.id] = std::move(agent_report);
    }

    json echo_report;
    try {
        const EchoChamberVerdict verdict =
            detect_echo_chamber(trajectories, opinionated, analysis.tau,
                                analysis.regression_domain);
        json verdict_agents = json::array();
        for (const auto& echo : verdict.agents)
            verdict_agents.push_back({{"agent", echo.agent_id},
                                      {"slope", echo.slope},
                                      {"mean", echo.mean},
                                      {"direction", to_string(echo.direction)}});
        echo_report = json{{"tau", verdict.tau},
                           {"opinionated", opinionated},
                           {"agents", std::move(verdict_agents)},
                           {"chamber_formed", verdict.chamber_formed}};
    } catch (const Error& e) {
        echo_report = json{{"tau", analysis.tau}, {"error", e.what()}};
    }

    const json report{
        {"fingerprint", loaded.manifest.fingerprint},
        {"metadata",
         {{"tool_version", kVersion},
          {"tau", analysis.tau},
          {"grouping", to_string(analysis.grouping)},
          {"levene_center", to_string(analysis.levene_center)},
          {"regression_domain", to_string(analysis.regression_domain)},
          {"quartile_method", "linear interpolation between closest ranks"},
          {"reversion_guard", "ratio is 0 when the middle-round mean equals the opening score"},
          {"middle_rounds", "statements strictly between the first and final scored statements"},
          {"gaps", series.gap_count()}}},
        {"agents", std::move(agents_report)},
        {"echo_chamber", std::move(echo_report)}};
    experiment.write_report(report);

    std::ostringstream scores_csv;
    scores_csv << "run,phase,round,agent,score,attempts,failure\n";
    for (const auto& entry : series.entries) {
        scores_csv << entry.run_id << ',' << phase_csv_label(entry.phase) << ','
                   << entry.phase.round << ',' << entry.agent_id << ',';
        if (entry.score) scores_csv << *entry.score;
        scores_csv << ',' << entry.attempts << ',' << entry.failure << '\n';
    }
    experiment.write_export("scores.csv", scores_csv.str());
    experiment.write_export("trajectories.csv", trajectories_csv.str());
    experiment.write_export("reversion.csv", reversion_csv.str());

    const Scenario scenario = scenario_from_manifest(loaded.manifest);
    experiment.write_chart("trajectories.svg",
                           render_trajectory_chart(chart_series, series.rounds,
                                                   "Attitude trajectories: " + scenario.topic));
    out << "analyzed " << loaded.manifest.experiment_id << ": " << trajectories.size()
        << " trajectories, " << series.gap_count() << " gaps\n";
}

}  // namespace

CmdResult cmd_run(const fs::path& config_path, const Options& options, std::ostream& out) {
    ExperimentConfig config;
    try {
        config = ExperimentConfig::parse_file(config_path);
        apply_overrides(config, options);
    } catch (const ConfigError& e) {
        out << "config error: " << e.what() << "\n";
        return CmdResult{kExitConfigError, {}};
    }

    CmdResult result;
    bool any_failed = false;
    bool any_succeeded = false;
    try {
        const auto runtime = config.instantiate();
        std::vector<std::vector<AgentSlot>> orders;
        if (options.permutation_sweep) orders = speaking_orders(runtime.roster);
        else orders = {runtime.roster};

        // Validate every effective debate config before any directory is
        // created.
        std::vector<DebateConfig> debates;
        for (const auto& order : orders) {
            DebateConfig debate = config.to_debate_config(runtime);
            debate.roster = order;
            debate.validate();
            debates.push_back(std::move(debate));
        }

        for (const auto& debate : debates) {
            const std::string fingerprint = config_fingerprint(debate);
            json snapshot = config.canonical_snapshot();
            json roster_ids = json::array();
            for (const auto& slot : debate.roster) roster_ids.push_back(slot.agent_id);
            snapshot["effective_order"] = roster_ids;

            std::vector<std::string> roster_order;
            for (const auto& slot : debate.roster) roster_order.push_back(slot.agent_id);
            Experiment experiment =
                Experiment::create(fingerprint, snapshot, roster_order, config.output_root);
            out << "experiment " << experiment.manifest().experiment_id << " -> "
                << experiment.dir().string() << "\n";

            std::mutex out_mutex;
            const auto sink = [&experiment](const Statement& statement) {
                experiment.append_statement(statement);
            };
            const auto observer = [&](const RunResult& run) {
                if (run.ok()) {
                    experiment.mark_run(run.run_id, RunStatus{true, ""});
                    std::lock_guard lock(out_mutex);
                    char line[64];
                    std::snprintf(line, sizeof line, "  run %02d: complete (%zu statements)\n",
                                  run.run_id, run.transcript->statements.size());
                    out << line;
                } else {
                    experiment.mark_run(run.run_id,
                                        RunStatus{false, run.failure->phase + ": " +
                                                             run.failure->message});
                    std::lock_guard lock(out_mutex);
                    out << "  run " << std::setw(2) << std::setfill('0') << run.run_id
                        << ": failed at " << run.failure->phase << ": "
                        << run.failure->message << "\n";
                }
            };

            const auto runs = run_debate(debate, sink, options.parallelism, observer);
            experiment.seal();
            for (const auto& run : runs) {
                if (run.ok()) any_succeeded = true;
                else any_failed = true;
            }
            result.experiment_dirs.push_back(experiment.dir());
        }
    } catch (const Error& e) {
        out << "error: " << e.what() << "\n";
        return CmdResult{kExitPartialFailure, result.experiment_dirs};
    }
    (void)any_succeeded;
    result.exit_code = any_failed ? kExitPartialFailure : kExitOk;
    return result;
}

CmdResult cmd_score(const fs::path& experiment_dir, const fs::path& config_path,
                    const Options& options, std::ostream& out) {
    ExperimentConfig config;
    try {
        config = ExperimentConfig::parse_file(config_path);
        apply_overrides(config, options);
    } catch (const ConfigError& e) {
        out << "config error: " << e.what() << "\n";
        return CmdResult{kExitConfigError, {}};
    }

    try {
        Experiment experiment =
            Experiment::open(experiment_dir.parent_path(), experiment_dir.filename().string());
        const LoadedExperiment loaded = experiment.load();
        if (loaded.transcripts.empty())
            throw NotFound("experiment has no transcripts to score");

        const Scenario scenario = scenario_from_manifest(loaded.manifest);
        auto judge_it = config.backends.find(config.judge.backend);
        if (judge_it == config.backends.end())
            throw ConfigError("judge.backend: unknown backend \"" + config.judge.backend + "\"");
        Backend judge_backend(judge_it->second);

        ScoreOptions score_options;
        score_options.parallelism = options.parallelism;
        if (config.judge.few_shots == "default") {
            score_options.few_shots = few_shots_for_topic(scenario.topic);
        } else {
            auto sets = load_few_shots(config.judge.few_shots);
            auto it = sets.find(scenario.topic);
            if (it == sets.end()) it = sets.find("*");
            if (it == sets.end())
                throw ConfigError("judge.few_shots: no examples for topic \"" + scenario.topic +
                                  "\"");
            score_options.few_shots = it->second;
        }

        AttitudeSeries series;
        for (const auto& transcript : loaded.transcripts) {
            AttitudeSeries scored =
                score_transcript(transcript, scenario, judge_backend, score_options);
            series.rounds = std::max(series.rounds, scored.rounds);
            for (auto& entry : scored.entries) series.entries.push_back(std::move(entry));
        }
        experiment.write_series(series);

        const int total = static_cast<int>(series.entries.size());
        const int gaps = series.gap_count();
        out << "scored " << (total - gaps) << "/" << total << " statements (" << gaps
            << " gaps)\n";
        const int exit_code = total - gaps == 0 ? kExitPartialFailure : kExitOk;
        return CmdResult{exit_code, {experiment_dir}};
    } catch (const Error& e) {
        out << "error: " << e.what() << "\n";
        return CmdResult{kExitPartialFailure, {}};
    }
}

CmdResult cmd_analyze(const std::vector<fs::path>& experiment_dirs, const Options& options,
                      std::ostream& out) {
    if (experiment_dirs.empty()) {
        out << "error: no experiment directories given\n";
        return CmdResult{kExitPartialFailure, {}};
    }

    struct LoadedDir {
        fs::path dir;
        std::unique_ptr<Experiment> experiment;
        LoadedExperiment loaded;
    };
    std::vector<LoadedDir> dirs;
    try {
        for (const auto& dir : experiment_dirs) {
            auto experiment = std::make_unique<Experiment>(
                Experiment::open(dir.parent_path(), dir.filename().string()));
            LoadedExperiment loaded = experiment->load();
            if (!loaded.series)
                throw NotFound("experiment " + dir.string() + " has no scores; run `score` first");
            dirs.push_back(LoadedDir{dir, std::move(experiment), std::move(loaded)});
        }

        for (auto& entry : dirs) {
            const AnalysisConfig analysis =
                analysis_from_manifest(entry.loaded.manifest, options);
            analyze_one(*entry.experiment, entry.loaded, analysis, out);
        }

        if (dirs.size() > 1) {
            const AnalysisConfig analysis =
                analysis_from_manifest(dirs.front().loaded.manifest, options);
            json comparisons = json::array();
            std::ostringstream comparisons_csv;
            comparisons_csv << "experiment_a,experiment_b,grouping,anova_f,anova_p,"
                               "anova_significant,levene_w,levene_p,levene_significant\n";
            for (std::size_t i = 0; i < dirs.size(); ++i) {
                for (std::size_t j = i + 1; j < dirs.size(); ++j) {
                    const std::string id_a = dirs[i].loaded.manifest.experiment_id;
                    const std::string id_b = dirs[j].loaded.manifest.experiment_id;
                    json comparison{{"experiments", {id_a, id_b}},
                                    {"grouping", to_string(analysis.grouping)}};
                    try {
                        const ComparisonResult tests = compare_experiments(
                            *dirs[i].loaded.series, *dirs[j].loaded.series, analysis.grouping,
                            analysis.levene_center);
                        comparison["anova"] = test_result_to_json(tests.anova);
                        comparison["levene"] = test_result_to_json(tests.levene);
                        comparisons_csv
                            << id_a << ',' << id_b << ',' << to_string(analysis.grouping) << ','
                            << num(tests.anova.statistic) << ',' << num(tests.anova.p_value)
                            << ',' << (tests.anova.significant ? 1 : 0) << ','
                            << num(tests.levene.statistic) << ',' << num(tests.levene.p_value)
                            << ',' << (tests.levene.significant ? 1 : 0) << '\n';
                        out << "compare " << id_a << " vs " << id_b
                            << ": ANOVA p=" << num(tests.anova.p_value)
                            << (tests.anova.significant ? " (significant)" : "")
                            << ", Levene p=" << num(tests.levene.p_value)
                            << (tests.levene.significant ? " (significant)" : "") << "\n";
                    } catch (const DegenerateInput& e) {
                        comparison["degenerate"] = e.what();
                        out << "compare " << id_a << " vs " << id_b << ": degenerate ("
                            << e.what() << ")\n";
                    }
                    comparisons.push_back(std::move(comparison));
                }
            }
            // Comparison artifacts live in the first directory's reports.
            const fs::path report_path =
                dirs.front().dir / "reports" / "comparisons.json";
            std::ofstream report(report_path, std::ios::trunc);
            report << comparisons.dump(2) << "\n";
            dirs.front().experiment->write_export("comparisons.csv", comparisons_csv.str());
        }
    } catch (const Error& e) {
        out << "error: " << e.what() << "\n";
        return CmdResult{kExitPartialFailure, {}};
    }

    CmdResult result;
    result.exit_code = kExitOk;
    for (const auto& entry : dirs) result.experiment_dirs.push_back(entry.dir);
    return result;
}

CmdResult cmd_validate_personas(const fs::path& config_path, const Options& options,
                                std::ostream& out) {
    ExperimentConfig config;
    try {
        config = ExperimentConfig::parse_file(config_path);
        apply_overrides(config, options);
    } catch (const ConfigError& e) {
        out << "config error: " << e.what() << "\n";
        return CmdResult{kExitConfigError, {}};
    }

    try {
        const auto runtime = config.instantiate();
        auto judge_it = runtime.backends.find(config.judge.backend);
        if (judge_it == runtime.backends.end())
            throw ConfigError("judge.backend: unknown backend \"" + config.judge.backend + "\"");
        Backend& judge_backend = *judge_it->second;

        std::vector<InterviewRecord> records;
        for (const auto& slot : runtime.roster) {
            auto interview =
                run_validation_interview(slot.persona, *slot.backend, default_battery());
            for (auto& record : interview)
                records.push_back(judge_alignment(std::move(record), judge_backend));
        }

        const AlignmentStats stats = alignment_matrix(records);
        std::error_code ec;
        fs::create_directories(config.output_root, ec);
        if (ec) throw StorageUnavailable("cannot create " + config.output_root.string());
        const fs::path csv_path = config.output_root / "alignment.csv";
        std::ofstream csv(csv_path, std::ios::trunc);
        csv << stats.to_csv();

        out << "interviewed " << runtime.roster.size() << " personas, " << records.size()
            << " answers\n";
        for (const auto& [model, row] : stats.cells)
            for (const auto& [variant, cell] : row) {
                out << "  " << model << " / " << variant << ": ";
                if (cell.aligned + cell.not_aligned > 0)
                    out << num(cell.fraction() * 100.0) << "% aligned";
                else out << "no judged answers";
                if (cell.indeterminate > 0) out << " (" << cell.indeterminate << " indeterminate)";
                out << "\n";
            }
        out << "alignment matrix -> " << csv_path.string() << "\n";
        return CmdResult{kExitOk, {config.output_root}};
    } catch (const Error& e) {
        out << "error: " << e.what() << "\n";
        return CmdResult{kExitPartialFailure, {}};
    }
}

CmdResult cmd_healthcheck(const fs::path& config_path, std::ostream& out) {
    ExperimentConfig config;
    try {
        config = ExperimentConfig::parse_file(config_path);
    } catch (const ConfigError& e) {
        out << "config error: " << e.what() << "\n";
        return CmdResult{kExitConfigError, {}};
    }

    bool all_reachable = true;
    for (const auto& [name, spec] : config.backends) {
        const Backend backend(spec);
        const HealthReport report = backend.healthcheck();
        out << name << ": " << (report.reachable ? "reachable" : "unreachable");
        if (report.model_available.has_value())
            out << ", model " << (*report.model_available ? "available" : "missing");
        if (!report.detail.empty() && report.detail != "ok") out << " (" << report.detail << ")";
        out << "\n";
        if (!report.reachable) all_reachable = false;
    }
    return CmdResult{all_reachable ? kExitOk : kExitPartialFailure, {}};
}

}  // namespace agora::cli
