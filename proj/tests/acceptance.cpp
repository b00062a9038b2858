// Acceptance suite: runs every release criterion end-to-end and prints one
// pass/fail line each. Exit code is the number of failed criteria.
#include <fcntl.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <signal.h>
#include <unistd.h>

#include <chrono>
#include <thread>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agora/analytics.hpp"
#include "agora/chart.hpp"
#include "agora/cli.hpp"
#include "agora/runstore.hpp"
#include "likert_corpus.hpp"
#include "oracle_stats.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace agora;
using nlohmann::json;

namespace {

struct Check {
    bool passed = true;
    std::string detail;

    void require(bool condition, const std::string& what) {
        if (!condition && passed) {
            passed = false;
            detail = what;
        }
    }
};

json scripted_backend_json(const std::vector<std::string>& replies, bool cycle = true,
                           int delay_ms = 0) {
    json queue = json::array();
    for (const auto& reply : replies)
        queue.push_back(json{{"text", reply}, {"delay_ms", delay_ms}});
    return json{{"kind", "scripted"},
                {"model", "mock"},
                {"script", {{"responses", {{"*", queue}}}, {"cycle", cycle}}}};
}

json pipeline_config(const std::string& out_root, int rounds, int runs) {
    return json{
        {"backends",
         {{"agents", scripted_backend_json({"I maintain my stance on the scenario.",
                                            "I weigh the arguments made so far.",
                                            "I answer the points raised against me."})},
          {"judge", scripted_backend_json({"3", "4", "5"})}}},
        {"personas",
         {{{"id", "neutral"}, {"leaning", "neutral"}, {"backend", "agents"}},
          {{"id", "republican"}, {"leaning", "republican"}, {"backend", "agents"}},
          {{"id", "democrat"}, {"leaning", "democrat"}, {"backend", "agents"}}}},
        {"scenario", {{"topic", "gun_violence"}}},
        {"protocol", {{"rounds", rounds}, {"runs", runs}, {"order", "default"}}},
        {"judge", {{"backend", "judge"}, {"few_shots", "default"}}},
        {"analysis", {{"tau", 0.05}}},
        {"output_root", out_root}};
}

fs::path write_config(const fs::path& dir, const json& config,
                      const std::string& name = "config.json") {
    const fs::path path = dir / name;
    testutil::write_file(path, config.dump(2));
    return path;
}

// --- criterion 1: protocol shape ------------------------------------------

Check protocol_shape() {
    Check check;
    testutil::TempDir tmp;
    const auto config = write_config(tmp.path(), pipeline_config((tmp.path() / "out").string(),
                                                                 10, 10));
    std::ostringstream sink;
    const auto started = std::chrono::steady_clock::now();
    const auto result = cli::cmd_run(config, {}, sink);
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);

    check.require(result.exit_code == cli::kExitOk, "cmd_run failed");
    if (!check.passed) return check;
    check.require(elapsed.count() < 10000,
                  "runtime " + std::to_string(elapsed.count()) + "ms >= 10s");

    const auto dir = result.experiment_dirs.at(0);
    const auto loaded = load_experiment(dir.parent_path(), dir.filename().string());
    std::size_t total = 0;
    const std::vector<std::string> roster{"neutral", "republican", "democrat"};
    for (const auto& transcript : loaded.transcripts) {
        total += transcript.statements.size();
        // exact phase-major, roster-minor order within every run
        std::size_t index = 0;
        std::vector<PhaseRef> sequence{{Phase::Opening, 0}};
        for (int k = 1; k <= 10; ++k) sequence.push_back({Phase::Round, k});
        sequence.push_back({Phase::Closing, 0});
        for (PhaseRef phase : sequence)
            for (const auto& agent : roster) {
                if (index >= transcript.statements.size()) break;
                const Statement& statement = transcript.statements[index];
                check.require(statement.phase == phase && statement.agent_id == agent,
                              "statement " + std::to_string(index) + " out of order");
                ++index;
            }
        check.require(index == transcript.statements.size(), "trailing statements");
    }
    check.require(total == 360, "expected 360 statements, found " + std::to_string(total));
    return check;
}

// --- criterion 2: determinism ---------------------------------------------

Check determinism() {
    Check check;
    testutil::TempDir tmp;

    auto run_pipeline = [&](const std::string& root) -> fs::path {
        const auto config =
            write_config(tmp.path(), pipeline_config((tmp.path() / root).string(), 10, 3),
                         root + ".json");
        std::ostringstream sink;
        const auto run = cli::cmd_run(config, {}, sink);
        if (run.exit_code != cli::kExitOk) return {};
        const auto dir = run.experiment_dirs.at(0);
        if (cli::cmd_score(dir, config, {}, sink).exit_code != cli::kExitOk) return {};
        if (cli::cmd_analyze({dir}, {}, sink).exit_code != cli::kExitOk) return {};
        return dir;
    };

    const fs::path a = run_pipeline("first");
    const fs::path b = run_pipeline("second");
    check.require(!a.empty() && !b.empty(), "pipeline execution failed");
    if (!check.passed) return check;

    for (int run = 1; run <= 3; ++run) {
        char name[16];
        std::snprintf(name, sizeof name, "%02d.jsonl", run);
        check.require(testutil::read_file(a / "runs" / name) ==
                          testutil::read_file(b / "runs" / name),
                      std::string("transcript bytes differ: ") + name);
        check.require(testutil::read_file(a / "scores" / name) ==
                          testutil::read_file(b / "scores" / name),
                      std::string("score bytes differ: ") + name);
    }
    check.require(testutil::read_file(a / "reports" / "analysis.json") ==
                      testutil::read_file(b / "reports" / "analysis.json"),
                  "analysis JSON bytes differ");
    return check;
}

// --- criterion 3: reversion ratio -----------------------------------------

Check reversion_correctness() {
    Check check;
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> score(1.0, 7.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double first = score(rng);
        const double final_score = score(rng);
        const double mean = score(rng);
        const double ours = reversion_ratio({first, final_score, mean});
        const double direct =
            mean == first ? 0.0 : (mean - final_score) / (mean - first);
        check.require(std::fabs(ours - direct) <= 1e-12, "mismatch against direct evaluation");
    }
    for (int trial = 0; trial < 1000; ++trial) {
        const double first = score(rng);
        double mean = score(rng);
        if (mean == first) mean += 0.5;
        check.require(reversion_ratio({first, first, mean}) == 1.0,
                      "full reversion must be exactly 1.0");
    }
    check.require(reversion_ratio({4.0, 6.0, 4.0}) == 0.0, "guard must yield 0");
    return check;
}

// --- criterion 4: statistical oracle equivalence ---------------------------

Check oracle_equivalence() {
    Check check;
    const auto fixture = one_way_anova({{1, 2, 3}, {4, 5, 6}});
    check.require(fixture.statistic == 13.5, "hand fixture F != 13.5");
    check.require(fixture.df1 == 1 && fixture.df2 == 4, "hand fixture df != (1,4)");

    std::mt19937 rng(424242);
    std::uniform_int_distribution<int> group_count(2, 5);
    std::uniform_int_distribution<int> group_size(2, 20);
    std::uniform_real_distribution<double> shift(-4.0, 4.0);
    std::uniform_real_distribution<double> spread(0.1, 2.5);
    std::normal_distribution<double> noise(0.0, 1.0);

    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::vector<double>> groups;
        const int k = group_count(rng);
        for (int g = 0; g < k; ++g) {
            std::vector<double> group;
            const double mu = shift(rng);
            const double sigma = spread(rng);
            const int n = group_size(rng);
            for (int i = 0; i < n; ++i) group.push_back(mu + sigma * noise(rng));
            groups.push_back(std::move(group));
        }

        const auto ours_f = one_way_anova(groups);
        const auto oracle_f = oracle::one_way_anova(groups);
        check.require(std::fabs(ours_f.statistic - oracle_f.statistic) <= 1e-9,
                      "ANOVA F deviates beyond 1e-9");
        check.require(std::fabs(ours_f.p_value - oracle_f.p_value) <= 1e-9,
                      "ANOVA p deviates beyond 1e-9");

        const auto ours_w = levene_test(groups);
        const auto oracle_w = oracle::levene_mean_centered(groups);
        check.require(std::fabs(ours_w.statistic - oracle_w.statistic) <= 1e-9,
                      "Levene W deviates beyond 1e-9");
        check.require(std::fabs(ours_w.p_value - oracle_w.p_value) <= 1e-9,
                      "Levene p deviates beyond 1e-9");
    }
    return check;
}

// --- criterion 5: echo-chamber detector ------------------------------------

Check echo_chamber_detector() {
    Check check;
    auto drifting = [](const std::string& id, double start, double slope) {
        Trajectory trajectory;
        trajectory.agent_id = id;
        trajectory.rounds = 10;
        for (int i = 0; i < 12; ++i) {
            PhaseStats phase;
            phase.position = i;
            phase.phase = i == 0    ? PhaseRef{Phase::Opening, 0}
                          : i == 11 ? PhaseRef{Phase::Closing, 0}
                                    : PhaseRef{Phase::Round, i};
            phase.mean = start + slope * i;
            phase.n = 10;
            trajectory.phases.push_back(phase);
        }
        return trajectory;
    };

    const auto away_a = drifting("rep1", 4.6, 0.2);
    const auto away_b = drifting("rep2", 4.8, 0.2);
    const auto toward = drifting("rep2", 6.8, -0.2);
    const auto flat_a = drifting("rep1", 5.0, 0.0);
    const auto flat_b = drifting("rep2", 5.5, 0.0);

    const auto formed = detect_echo_chamber({away_a, away_b}, {"rep1", "rep2"}, 0.05);
    check.require(formed.chamber_formed, "(a) both drifting away must form a chamber");

    const auto halved = detect_echo_chamber({away_a, away_b}, {"rep1", "rep2"}, 0.025);
    check.require(halved.chamber_formed == formed.chamber_formed,
                  "(a) verdict must survive tau halving");

    const auto broken = detect_echo_chamber({away_a, toward}, {"rep1", "rep2"}, 0.05);
    check.require(!broken.chamber_formed, "(b) drifting toward 4 must break the chamber");

    const auto flat = detect_echo_chamber({flat_a, flat_b}, {"rep1", "rep2"}, 0.05);
    check.require(!flat.chamber_formed, "(c) flat trajectories must not form a chamber");
    for (const auto& agent : flat.agents)
        check.require(agent.direction == Direction::Flat, "(c) directions must be flat");
    return check;
}

// --- criterion 6: Likert parser ---------------------------------------------

Check likert_parser() {
    Check check;
    using likert_corpus::Expected;
    int correct = 0;
    for (const auto& item : likert_corpus::items()) {
        bool ok = false;
        try {
            const int score = parse_likert(item.reply);
            ok = item.expected == Expected::Score && score == item.score && score >= 1 &&
                 score <= 7;
        } catch (const OutOfRangeScore&) {
            ok = item.expected == Expected::OutOfRange;
        } catch (const UnparseableScore&) {
            ok = item.expected == Expected::Unparseable;
        }
        if (ok) ++correct;
        else check.require(false, "corpus item misparsed: \"" + item.reply + "\"");
    }
    check.require(likert_corpus::items().size() == 50, "corpus must hold 50 items");
    check.require(correct == static_cast<int>(likert_corpus::items().size()),
                  "parser accuracy below 100%");
    return check;
}

// --- criterion 7: gender blindness ------------------------------------------

Check gender_blindness() {
    Check check;
    const std::vector<std::string> ids{"neutral", "republican", "democrat"};
    auto build_config = [&](bool aware) {
        auto backend = std::make_shared<Backend>(testutil::debate_script(ids, 10, 10));
        DebateConfig config;
        config.scenario = get_scenario(topics::kIllegalImmigration);
        config.roster = {
            make_agent_slot("neutral", build_simple_persona(Leaning::Neutral, Gender::Female),
                            backend),
            make_agent_slot("republican",
                            build_simple_persona(Leaning::Republican, Gender::Female), backend),
            make_agent_slot("democrat", build_simple_persona(Leaning::Democrat, Gender::Female),
                            backend)};
        config.rounds = 10;
        config.runs = 10;
        config.gender_awareness = aware;
        config.context_budget = 0;
        return std::pair{config, backend};
    };

    // blind: the complete outbound-request log holds no other agent's gender
    auto [blind, blind_backend] = build_config(false);
    for (const auto& result : run_debate(blind))
        check.require(result.ok(), "blind run failed");
    const std::vector<std::string> terms{"woman", "female", "male", " man"};
    for (const auto& request : blind_backend->request_log()) {
        std::string text = request.joined_text();
        for (const auto& slot : blind.roster) {
            const auto at = text.find(slot.persona.prompt_text);
            if (at != std::string::npos) text.erase(at, slot.persona.prompt_text.size());
        }
        for (const auto& term : terms)
            check.require(text.find(term) == std::string::npos,
                          "gender term \"" + term + "\" leaked into " + request.request_tag);
    }

    // aware: every system prompt names all roster genders
    auto [aware, aware_backend] = build_config(true);
    for (const auto& result : run_debate(aware))
        check.require(result.ok(), "aware run failed");
    for (const auto& request : aware_backend->request_log()) {
        const std::string& system = request.messages.at(0).content;
        check.require(system.find("Sam (female)") != std::string::npos &&
                          system.find("Alex (female)") != std::string::npos &&
                          system.find("Taylor (female)") != std::string::npos,
                      "system prompt missing roster genders in " + request.request_tag);
    }
    return check;
}

// --- criterion 8: speaking-order sweep --------------------------------------

Check speaking_order_sweep() {
    Check check;
    testutil::TempDir tmp;
    json config = pipeline_config((tmp.path() / "out").string(), 1, 1);
    const auto path = write_config(tmp.path(), config);

    cli::Options options;
    options.permutation_sweep = true;
    std::ostringstream sink;
    const auto result = cli::cmd_run(path, options, sink);
    check.require(result.exit_code == cli::kExitOk, "sweep failed");
    check.require(result.experiment_dirs.size() == 6,
                  "expected 6 experiment directories, got " +
                      std::to_string(result.experiment_dirs.size()));

    std::set<std::vector<std::string>> orders;
    for (const auto& dir : result.experiment_dirs) {
        const auto loaded = load_experiment(dir.parent_path(), dir.filename().string());
        orders.insert(loaded.manifest.roster_order);
    }
    check.require(orders.size() == 6, "roster orders in manifests are not distinct");
    return check;
}

// --- criterion 9: persona templates and battery ------------------------------

Check persona_templates() {
    Check check;
    check.require(build_simple_persona(Leaning::Neutral).prompt_text ==
                      "You are Sam, an American.",
                  "neutral template drifted");
    check.require(build_simple_persona(Leaning::Republican).prompt_text ==
                      "You are Alex, an American who is right-leaning and supports the "
                      "Republican Party.",
                  "republican template drifted");
    check.require(build_simple_persona(Leaning::Democrat, Gender::Male).prompt_text ==
                      "You are Taylor, an American man who is left-leaning and supports the "
                      "Democrat Party.",
                  "democrat-male template drifted");

    const auto& battery = default_battery();
    check.require(battery.size() == 21, "battery must hold 21 questions");
    int democrat = 0;
    int republican = 0;
    int neutral = 0;
    for (const auto& question : battery) {
        if (question.leaning == Leaning::Democrat) ++democrat;
        if (question.leaning == Leaning::Republican) ++republican;
        if (question.leaning == Leaning::Neutral) ++neutral;
    }
    check.require(democrat == 7 && republican == 7 && neutral == 7,
                  "battery must split 7/7/7");
    return check;
}

// --- criterion 10: crash tolerance ------------------------------------------

Check crash_tolerance() {
    Check check;
#ifndef AGORA_CLI_PATH
    check.require(false, "CLI binary path not configured");
    return check;
#else
    testutil::TempDir tmp;
    // 3ms per scripted statement paces the run so the kill lands mid-flight
    json config = pipeline_config((tmp.path() / "out").string(), 10, 10);
    config["backends"]["agents"] =
        scripted_backend_json({"paced statement for the crash drill"}, true, 3);
    const auto config_path = write_config(tmp.path(), config);

    bool killed_midway = false;
    for (const int delay_ms : {400, 150, 50}) {
        const pid_t pid = fork();
        if (pid == 0) {
            // child: exec the real CLI
            const int devnull = ::open("/dev/null", O_WRONLY);
            ::dup2(devnull, STDOUT_FILENO);
            ::dup2(devnull, STDERR_FILENO);
            ::execl(AGORA_CLI_PATH, AGORA_CLI_PATH, "run", "--config",
                    config_path.c_str(), static_cast<char*>(nullptr));
            ::_exit(127);
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
        ::kill(pid, SIGKILL);
        int status = 0;
        ::waitpid(pid, &status, 0);

        const auto ids = list_experiments(tmp.path() / "out");
        if (ids.empty()) continue;  // killed before the manifest existed
        const auto loaded = load_experiment(tmp.path() / "out", ids.back());
        if (loaded.manifest.sealed) {
            fs::remove_all(tmp.path() / "out");
            continue;  // finished before the kill; try a shorter delay
        }

        killed_midway = true;
        check.require(loaded.dropped_lines <= 1,
                      "more than one statement lost: " +
                          std::to_string(loaded.dropped_lines));
        check.require(loaded.resumable, "experiment must report as resumable");

        // per-run status intact: every completed run is marked and holds all
        // 36 statements; the interrupted run is a clean protocol prefix
        const std::vector<std::string> roster{"neutral", "republican", "democrat"};
        for (const auto& transcript : loaded.transcripts) {
            if (transcript.statements.empty()) continue;
            const int run_id = transcript.statements.front().run_id;
            const auto status_it = loaded.manifest.run_status.find(run_id);
            if (status_it != loaded.manifest.run_status.end() && status_it->second.complete)
                check.require(transcript.statements.size() == 36,
                              "completed run short of statements");
            for (std::size_t i = 0; i < transcript.statements.size(); ++i)
                check.require(transcript.statements[i].agent_id == roster[i % 3],
                              "interrupted run is not a clean protocol prefix");
        }
        break;
    }
    check.require(killed_midway, "could not interrupt the run mid-flight");
    return check;
#endif
}

// --- criterion 11: optional live smoke test ----------------------------------

bool live_smoke(std::string& detail) {
    const char* endpoint = std::getenv("AGORA_LIVE_ENDPOINT");
    const char* model = std::getenv("AGORA_LIVE_MODEL");
    if (!endpoint) {
        detail = "set AGORA_LIVE_ENDPOINT (and optionally AGORA_LIVE_MODEL) to enable";
        return true;
    }
    testutil::TempDir tmp;
    json config = pipeline_config((tmp.path() / "out").string(), 2, 1);
    config["backends"]["agents"] = json{{"kind", "http"},
                                        {"endpoint", endpoint},
                                        {"model", model ? model : "llama3.2"},
                                        {"timeout_ms", 120000},
                                        {"retry_budget", 2}};
    config["backends"]["judge"] = config["backends"]["agents"];
    const auto path = write_config(tmp.path(), config);

    std::ostringstream sink;
    const auto run = cli::cmd_run(path, {}, sink);
    if (run.exit_code != cli::kExitOk) {
        detail = "debate did not complete";
        return false;
    }
    const auto dir = run.experiment_dirs.at(0);
    if (cli::cmd_score(dir, path, {}, sink).exit_code != cli::kExitOk) {
        detail = "scoring failed";
        return false;
    }
    const auto loaded = load_experiment(dir.parent_path(), dir.filename().string());
    const int total = static_cast<int>(loaded.series->entries.size());
    const int parsed = total - loaded.series->gap_count();
    detail = std::to_string(parsed) + "/" + std::to_string(total) + " judge replies parsed";
    return parsed * 100 >= total * 95;
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* description;
        std::function<Check()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "protocol shape: 3 agents x 12 phases x 10 runs = 360 statements in order, <10s",
         protocol_shape},
        {2, "determinism: run->score->analyze twice gives byte-identical artifacts",
         determinism},
        {3, "reversion ratio reproduces the formula on 1000 random triples",
         reversion_correctness},
        {4, "ANOVA and Levene match the independent oracle within 1e-9",
         oracle_equivalence},
        {5, "echo-chamber detector verdicts on synthetic trajectories",
         echo_chamber_detector},
        {6, "Likert parser: 100% on the 50-item corpus, no out-of-range score",
         likert_parser},
        {7, "gender blindness of outbound requests; awareness names all genders",
         gender_blindness},
        {8, "speaking-order sweep yields 6 distinctly ordered experiments",
         speaking_order_sweep},
        {9, "persona templates byte-for-byte; 21-question battery split 7/7/7",
         persona_templates},
        {10, "crash mid-run loses at most one statement and stays resumable",
         crash_tolerance},
    };

    int failed = 0;
    for (const auto& criterion : criteria) {
        Check check;
        try {
            check = criterion.run();
        } catch (const std::exception& e) {
            check.passed = false;
            check.detail = std::string("exception: ") + e.what();
        }
        if (check.passed) {
            std::cout << "PASS criterion " << criterion.id << ": " << criterion.description
                      << "\n";
        } else {
            ++failed;
            std::cout << "FAIL criterion " << criterion.id << ": " << criterion.description
                      << " [" << check.detail << "]\n";
        }
    }

    std::string detail;
    const bool smoke = live_smoke(detail);
    if (std::getenv("AGORA_LIVE_ENDPOINT")) {
        std::cout << (smoke ? "PASS" : "FAIL")
                  << " criterion 11 (non-gating): live smoke test [" << detail << "]\n";
    } else {
        std::cout << "SKIP criterion 11 (non-gating): live smoke test [" << detail << "]\n";
    }

    return failed;
}
