#include <doctest.h>

#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agora/cli.hpp"
#include "agora/runstore.hpp"
#include "test_util.hpp"

using namespace agora;
using nlohmann::json;

namespace {

json scripted_backend_json(const std::string& reply) {
    return json{{"kind", "scripted"},
                {"model", "mock"},
                {"script", {{"responses", {{"*", {reply}}}}, {"cycle", true}}}};
}

json base_config(const std::string& out_root) {
    return json{
        {"backends",
         {{"agents", scripted_backend_json("I hold my position on the scenario.")},
          {"judge", scripted_backend_json("4")}}},
        {"personas",
         {{{"id", "neutral"}, {"leaning", "neutral"}, {"backend", "agents"}},
          {{"id", "republican"}, {"leaning", "republican"}, {"backend", "agents"}},
          {{"id", "democrat"}, {"leaning", "democrat"}, {"backend", "agents"}}}},
        {"scenario", {{"topic", "climate_change"}}},
        {"protocol", {{"rounds", 10}, {"runs", 1}, {"order", "default"}}},
        {"judge", {{"backend", "judge"}, {"few_shots", "default"}}},
        {"analysis", {{"tau", 0.05}}},
        {"output_root", out_root}};
}

std::filesystem::path write_config(const testutil::TempDir& tmp, const json& config,
                                   const std::string& name = "config.json") {
    const auto path = tmp.path() / name;
    testutil::write_file(path, config.dump(2));
    return path;
}

}  // namespace

TEST_CASE("cmd_run produces a 36-line transcript for a scripted 3-agent config") {
    testutil::TempDir tmp;
    const auto config = write_config(tmp, base_config((tmp.path() / "out").string()));

    std::ostringstream out;
    const auto result = cli::cmd_run(config, {}, out);
    CHECK(result.exit_code == cli::kExitOk);
    REQUIRE(result.experiment_dirs.size() == 1);
    CHECK(testutil::count_lines(result.experiment_dirs[0] / "runs" / "01.jsonl") == 36);
    CHECK(out.str().find("run 01: complete (36 statements)") != std::string::npos);

    const LoadedExperiment loaded = load_experiment(
        result.experiment_dirs[0].parent_path(), result.experiment_dirs[0].filename().string());
    CHECK(loaded.manifest.sealed);
    CHECK(loaded.manifest.roster_order ==
          std::vector<std::string>{"neutral", "republican", "democrat"});
}

TEST_CASE("invalid configs are rejected before any side effect") {
    testutil::TempDir tmp;
    json config = base_config((tmp.path() / "out").string());
    config["personas"][0]["backend"] = "missing";
    const auto path = write_config(tmp, config);

    std::ostringstream out;
    const auto result = cli::cmd_run(path, {}, out);
    CHECK(result.exit_code == cli::kExitConfigError);
    CHECK(out.str().find("personas[0].backend") != std::string::npos);
    CHECK_FALSE(std::filesystem::exists(tmp.path() / "out"));
}

TEST_CASE("config parsing reports offending key paths") {
    testutil::TempDir tmp;

    json no_scenario = base_config("out");
    no_scenario.erase("scenario");
    CHECK_THROWS_WITH_AS(ExperimentConfig::parse_file(write_config(tmp, no_scenario, "a.json")),
                         doctest::Contains("scenario"), ConfigError);

    json bad_topic = base_config("out");
    bad_topic["scenario"]["topic"] = "astrology";
    CHECK_THROWS_WITH_AS(ExperimentConfig::parse_file(write_config(tmp, bad_topic, "b.json")),
                         doctest::Contains("scenario.topic"), ConfigError);

    json bad_judge = base_config("out");
    bad_judge["judge"]["backend"] = "nobody";
    CHECK_THROWS_WITH_AS(ExperimentConfig::parse_file(write_config(tmp, bad_judge, "c.json")),
                         doctest::Contains("judge.backend"), ConfigError);
}

TEST_CASE("fingerprints ignore config-file key order") {
    testutil::TempDir tmp;
    const json config = base_config("out");

    // same content, different top-level key order
    json reordered = json::object();
    reordered["output_root"] = config["output_root"];
    reordered["judge"] = config["judge"];
    reordered["scenario"] = config["scenario"];
    reordered["backends"] = config["backends"];
    reordered["personas"] = config["personas"];
    reordered["protocol"] = config["protocol"];
    reordered["analysis"] = config["analysis"];

    const auto a = ExperimentConfig::parse_file(write_config(tmp, config, "a.json"));
    const auto b = ExperimentConfig::parse_file(write_config(tmp, reordered, "b.json"));
    CHECK(a.canonical_snapshot() == b.canonical_snapshot());

    const auto runtime_a = a.instantiate();
    const auto runtime_b = b.instantiate();
    CHECK(config_fingerprint(a.to_debate_config(runtime_a)) ==
          config_fingerprint(b.to_debate_config(runtime_b)));
}

TEST_CASE("score then analyze complete the pipeline deterministically") {
    testutil::TempDir tmp;
    const auto config = write_config(tmp, base_config((tmp.path() / "out").string()));

    std::ostringstream out;
    const auto run = cli::cmd_run(config, {}, out);
    REQUIRE(run.exit_code == cli::kExitOk);
    const auto dir = run.experiment_dirs[0];

    const auto score = cli::cmd_score(dir, config, {}, out);
    CHECK(score.exit_code == cli::kExitOk);
    CHECK(out.str().find("scored 36/36 statements (0 gaps)") != std::string::npos);
    const std::string scores_once = testutil::read_file(dir / "scores" / "01.jsonl");
    CHECK(testutil::count_lines(dir / "scores" / "01.jsonl") == 36);

    // re-scoring is idempotent
    const auto rescore = cli::cmd_score(dir, config, {}, out);
    CHECK(rescore.exit_code == cli::kExitOk);
    CHECK(testutil::read_file(dir / "scores" / "01.jsonl") == scores_once);

    const auto analyze = cli::cmd_analyze({dir}, {}, out);
    CHECK(analyze.exit_code == cli::kExitOk);
    CHECK(std::filesystem::exists(dir / "reports" / "analysis.json"));
    CHECK(std::filesystem::exists(dir / "exports" / "trajectories.csv"));
    CHECK(std::filesystem::exists(dir / "exports" / "reversion.csv"));
    CHECK(std::filesystem::exists(dir / "exports" / "scores.csv"));
    CHECK(std::filesystem::exists(dir / "charts" / "trajectories.svg"));

    const json report = json::parse(testutil::read_file(dir / "reports" / "analysis.json"));
    CHECK(report.contains("agents"));
    CHECK(report["agents"].contains("neutral"));
    CHECK(report["agents"]["neutral"]["trajectory"].size() == 12);
    CHECK(report.contains("echo_chamber"));
    CHECK(report["echo_chamber"]["opinionated"].size() == 2);
    // all-4 judge: flat directions, no chamber
    CHECK(report["echo_chamber"]["chamber_formed"] == false);
    const std::string svg = testutil::read_file(dir / "charts" / "trajectories.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
}

TEST_CASE("scoring a directory without transcripts fails cleanly") {
    testutil::TempDir tmp;
    const auto config = write_config(tmp, base_config((tmp.path() / "out").string()));
    std::ostringstream out;
    const auto result = cli::cmd_score(tmp.path() / "out" / "nothing-here", config, {}, out);
    CHECK(result.exit_code == cli::kExitPartialFailure);
    CHECK(out.str().find("error") != std::string::npos);
}

TEST_CASE("analyzing without scores points at the missing stage") {
    testutil::TempDir tmp;
    const auto config = write_config(tmp, base_config((tmp.path() / "out").string()));
    std::ostringstream out;
    const auto run = cli::cmd_run(config, {}, out);
    const auto analyze = cli::cmd_analyze({run.experiment_dirs[0]}, {}, out);
    CHECK(analyze.exit_code == cli::kExitPartialFailure);
    CHECK(out.str().find("no scores") != std::string::npos);
}

TEST_CASE("permutation sweep creates six distinctly ordered experiments") {
    testutil::TempDir tmp;
    json config = base_config((tmp.path() / "out").string());
    config["protocol"]["rounds"] = 1;
    const auto path = write_config(tmp, config);

    cli::Options options;
    options.permutation_sweep = true;
    std::ostringstream out;
    const auto result = cli::cmd_run(path, options, out);
    CHECK(result.exit_code == cli::kExitOk);
    REQUIRE(result.experiment_dirs.size() == 6);

    std::set<std::vector<std::string>> orders;
    std::set<std::string> fingerprints;
    for (const auto& dir : result.experiment_dirs) {
        const auto loaded = load_experiment(dir.parent_path(), dir.filename().string());
        orders.insert(loaded.manifest.roster_order);
        fingerprints.insert(loaded.manifest.fingerprint);
        CHECK(testutil::count_lines(dir / "runs" / "01.jsonl") == 9);
    }
    CHECK(orders.size() == 6);
    CHECK(fingerprints.size() == 6);
}

TEST_CASE("comparisons of two identical experiments are not significant") {
    testutil::TempDir tmp;
    // judge cycles 3,4,5 so the scores carry variance
    json config = base_config((tmp.path() / "out").string());
    config["backends"]["judge"]["script"]["responses"]["*"] = {"3", "4", "5"};
    config["protocol"]["rounds"] = 3;
    const auto path = write_config(tmp, config);

    std::ostringstream out;
    const auto first = cli::cmd_run(path, {}, out);
    const auto second = cli::cmd_run(path, {}, out);
    REQUIRE(first.exit_code == cli::kExitOk);
    REQUIRE(second.exit_code == cli::kExitOk);
    const auto dir_a = first.experiment_dirs[0];
    const auto dir_b = second.experiment_dirs[0];
    REQUIRE(cli::cmd_score(dir_a, path, {}, out).exit_code == cli::kExitOk);
    REQUIRE(cli::cmd_score(dir_b, path, {}, out).exit_code == cli::kExitOk);

    const auto analyze = cli::cmd_analyze({dir_a, dir_b}, {}, out);
    CHECK(analyze.exit_code == cli::kExitOk);
    const auto comparisons =
        json::parse(testutil::read_file(dir_a / "reports" / "comparisons.json"));
    REQUIRE(comparisons.size() == 1);
    CHECK(comparisons[0]["anova"]["significant"] == false);
    CHECK(comparisons[0]["levene"]["significant"] == false);
    CHECK(comparisons[0]["anova"]["p_value"].get<double>() == doctest::Approx(1.0));
    CHECK(std::filesystem::exists(dir_a / "exports" / "comparisons.csv"));
}

TEST_CASE("validate-personas writes the alignment matrix") {
    testutil::TempDir tmp;
    json config = base_config((tmp.path() / "out").string());
    config["backends"]["judge"] = scripted_backend_json("Aligned");
    const auto path = write_config(tmp, config);

    std::ostringstream out;
    const auto result = cli::cmd_validate_personas(path, {}, out);
    CHECK(result.exit_code == cli::kExitOk);
    const auto csv_path = tmp.path() / "out" / "alignment.csv";
    REQUIRE(std::filesystem::exists(csv_path));
    const std::string csv = testutil::read_file(csv_path);
    CHECK(csv.find("model") != std::string::npos);
    CHECK(csv.find("100") != std::string::npos);  // all cells fully aligned
    CHECK(out.str().find("100.0% aligned") != std::string::npos);
    CHECK(out.str().find("63 answers") != std::string::npos);  // 3 personas x 21
}

TEST_CASE("gender awareness flows from flags into prompts and manifests") {
    testutil::TempDir tmp;
    json config = base_config((tmp.path() / "out").string());
    config["protocol"]["rounds"] = 1;
    for (auto& persona : config["personas"]) persona["gender"] = "female";
    const auto path = write_config(tmp, config);

    cli::Options options;
    options.gender_awareness = true;
    std::ostringstream out;
    const auto result = cli::cmd_run(path, options, out);
    REQUIRE(result.exit_code == cli::kExitOk);
    const auto loaded = load_experiment(result.experiment_dirs[0].parent_path(),
                                        result.experiment_dirs[0].filename().string());
    CHECK(loaded.manifest.config_snapshot["protocol"]["gender_awareness"] == true);
}

TEST_CASE("healthcheck covers every configured backend") {
    testutil::TempDir tmp;
    const auto path = write_config(tmp, base_config((tmp.path() / "out").string()));
    std::ostringstream out;
    const auto result = cli::cmd_healthcheck(path, out);
    CHECK(result.exit_code == cli::kExitOk);
    CHECK(out.str().find("agents: reachable") != std::string::npos);
    CHECK(out.str().find("judge: reachable") != std::string::npos);
}

TEST_CASE("failed runs surface per-run and keep the exit code nonzero") {
    testutil::TempDir tmp;
    json config = base_config((tmp.path() / "out").string());
    // only enough script for part of run 1: agents backend without cycle
    config["backends"]["agents"] = json{
        {"kind", "scripted"},
        {"model", "mock"},
        {"script",
         {{"responses", {{"*", {"only one statement available"}}}}, {"cycle", false}}}};
    config["protocol"]["runs"] = 2;
    const auto path = write_config(tmp, config);

    std::ostringstream out;
    const auto result = cli::cmd_run(path, {}, out);
    CHECK(result.exit_code == cli::kExitPartialFailure);
    CHECK(out.str().find("failed at") != std::string::npos);

    const auto loaded = load_experiment(result.experiment_dirs[0].parent_path(),
                                        result.experiment_dirs[0].filename().string());
    CHECK_FALSE(loaded.manifest.run_status.at(1).complete);
    CHECK_FALSE(loaded.manifest.run_status.at(2).complete);
}
