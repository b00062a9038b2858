#include <pybind11/chrono.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "agora/analytics.hpp"
#include "agora/chart.hpp"
#include "agora/cli.hpp"
#include "agora/runstore.hpp"
#include "agora/version.hpp"

namespace py = pybind11;
using namespace agora;

namespace {

std::optional<Gender> optional_gender(const std::optional<std::string>& name) {
    if (!name) return std::nullopt;
    return gender_from_string(*name);
}

py::dict test_result_dict(const TestResult& result) {
    py::dict d;
    d["statistic"] = result.statistic;
    d["df1"] = result.df1;
    d["df2"] = result.df2;
    d["p_value"] = result.p_value;
    d["significant"] = result.significant;
    return d;
}

AttitudeSeries series_from_rows(
    const std::vector<std::tuple<int, std::string, int, std::string, std::optional<int>>>& rows,
    int rounds) {
    AttitudeSeries series;
    series.rounds = rounds;
    for (const auto& [run, phase_name, round, agent, score] : rows) {
        PhaseRef phase;
        if (phase_name == "opening") phase = {Phase::Opening, 0};
        else if (phase_name == "round") phase = {Phase::Round, round};
        else if (phase_name == "closing") phase = {Phase::Closing, 0};
        else throw py::value_error("phase must be opening/round/closing");
        ScoreEntry entry{run, phase, agent, score, 1, score ? "" : "gap"};
        series.entries.push_back(std::move(entry));
    }
    return series;
}

}  // namespace

PYBIND11_MODULE(_agora, m) {
    m.doc() = "Multi-agent political debate simulation and bias analysis";
    m.attr("__version__") = kVersion;

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const UnparseableScore& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const OutOfRangeScore& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const PreconditionViolation& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const UnknownTopic& e) {
            PyErr_SetString(PyExc_KeyError, e.what());
        } catch (const ConfigError& e) {
            PyErr_SetString(PyExc_ValueError, e.what());
        } catch (const NotFound& e) {
            PyErr_SetString(PyExc_FileNotFoundError, e.what());
        }
    });

    // --- personas -----------------------------------------------------------
    py::class_<PersonaSpec>(m, "PersonaSpec")
        .def_readonly("name", &PersonaSpec::name)
        .def_property_readonly("leaning",
                               [](const PersonaSpec& p) { return to_string(p.leaning); })
        .def_property_readonly("gender",
                               [](const PersonaSpec& p) -> std::optional<std::string> {
                                   if (!p.gender) return std::nullopt;
                                   return to_string(*p.gender);
                               })
        .def_property_readonly("tier", [](const PersonaSpec& p) { return to_string(p.tier); })
        .def_readonly("prompt_text", &PersonaSpec::prompt_text)
        .def("__repr__", [](const PersonaSpec& p) {
            return "PersonaSpec(" + p.name + ", " + to_string(p.leaning) + ")";
        });

    m.def(
        "build_simple_persona",
        [](const std::string& leaning, std::optional<std::string> gender,
           const std::string& name) {
            return build_simple_persona(leaning_from_string(leaning), optional_gender(gender),
                                        name);
        },
        py::arg("leaning"), py::arg("gender") = std::nullopt, py::arg("name") = "");
    m.def(
        "build_enhanced_persona",
        [](const std::string& leaning, std::optional<std::string> gender) {
            return build_enhanced_persona(leaning_from_string(leaning), optional_gender(gender));
        },
        py::arg("leaning"), py::arg("gender") = std::nullopt);
    m.def(
        "build_enhanced_generation_prompt",
        [](const std::string& leaning, const std::string& location, const std::string& name) {
            return build_enhanced_generation_prompt(leaning_from_string(leaning), location, name);
        },
        py::arg("leaning"), py::arg("location"), py::arg("name"));
    m.def(
        "build_gender_curation_prompt",
        [](const std::string& base_persona, const std::string& gender) {
            return build_gender_curation_prompt(base_persona, gender_from_string(gender));
        },
        py::arg("base_persona"), py::arg("gender"));
    m.def("default_battery", [] {
        py::list battery;
        for (const auto& question : default_battery()) {
            py::dict entry;
            entry["id"] = question.id;
            entry["text"] = question.text;
            entry["leaning"] = to_string(question.leaning);
            battery.append(entry);
        }
        return battery;
    });

    // --- scenarios ------------------------------------------------------------
    py::class_<Scenario>(m, "Scenario")
        .def_readonly("topic", &Scenario::topic)
        .def_readonly("scenario_text", &Scenario::scenario_text)
        .def_readonly("debate_question", &Scenario::debate_question)
        .def_readonly("evaluation_prompt", &Scenario::evaluation_prompt);
    m.def("topics", [] {
        return std::vector<std::string>{topics::kAbortion, topics::kGunViolence,
                                        topics::kIllegalImmigration, topics::kClimateChange};
    });
    m.def("get_scenario", [](const std::string& topic) { return get_scenario(topic); },
          py::arg("topic"));
    m.def(
        "compose_scenario",
        [](const std::string& for_argument, const std::string& against_argument,
           const std::string& refinements, const std::string& question,
           const std::string& topic) {
            return compose_scenario(
                ArgumentPair{for_argument, against_argument, refinements}, question, topic);
        },
        py::arg("for_argument"), py::arg("against_argument"), py::arg("refinements") = "",
        py::arg("question"), py::arg("topic") = "custom");

    // --- judge ----------------------------------------------------------------
    m.def("parse_likert", &parse_likert, py::arg("raw"),
          "Strict 1-7 Likert parsing of a judge reply");
    m.def(
        "render_judge_prompt",
        [](const Scenario& scenario, const std::string& target) {
            return render_judge_prompt(scenario, target, few_shots_for_topic(scenario.topic));
        },
        py::arg("scenario"), py::arg("target_response"));

    // --- analytics --------------------------------------------------------------
    m.def(
        "reversion_ratio",
        [](double first, double final_score, double mean) {
            return reversion_ratio({first, final_score, mean});
        },
        py::arg("a_first"), py::arg("a_final"), py::arg("a_mean"));
    m.def("linear_gradient",
          [](const std::vector<double>& means) { return linear_gradient(means); },
          py::arg("phase_means"));
    m.def(
        "one_way_anova",
        [](const std::vector<std::vector<double>>& groups) {
            return test_result_dict(one_way_anova(groups));
        },
        py::arg("groups"));
    m.def(
        "levene_test",
        [](const std::vector<std::vector<double>>& groups, const std::string& center) {
            return test_result_dict(levene_test(
                groups, center == "median" ? LeveneCenter::Median : LeveneCenter::Mean));
        },
        py::arg("groups"), py::arg("center") = "mean");
    m.def(
        "compare_series",
        [](const std::vector<std::tuple<int, std::string, int, std::string,
                                        std::optional<int>>>& rows_a,
           const std::vector<std::tuple<int, std::string, int, std::string,
                                        std::optional<int>>>& rows_b,
           int rounds, const std::string& grouping) {
            const ComparisonResult result = compare_experiments(
                series_from_rows(rows_a, rounds), series_from_rows(rows_b, rounds),
                grouping == "round-means" ? Grouping::ByRoundMeans : Grouping::Pooled);
            py::dict d;
            d["anova"] = test_result_dict(result.anova);
            d["levene"] = test_result_dict(result.levene);
            return d;
        },
        py::arg("series_a"), py::arg("series_b"), py::arg("rounds"),
        py::arg("grouping") = "pooled",
        "Both tests over two score series given as (run, phase, round, agent, score) rows");

    // --- pipeline ----------------------------------------------------------------
    m.def(
        "run_experiment",
        [](const std::filesystem::path& config_path, bool permutation_sweep, int parallelism) {
            cli::Options options;
            options.permutation_sweep = permutation_sweep;
            options.parallelism = parallelism;
            std::ostringstream out;
            const auto result = cli::cmd_run(config_path, options, out);
            py::dict d;
            d["exit_code"] = result.exit_code;
            d["experiment_dirs"] = result.experiment_dirs;
            d["output"] = out.str();
            return d;
        },
        py::arg("config_path"), py::arg("permutation_sweep") = false,
        py::arg("parallelism") = 1);
    m.def(
        "score_experiment",
        [](const std::filesystem::path& experiment_dir,
           const std::filesystem::path& config_path, int parallelism) {
            cli::Options options;
            options.parallelism = parallelism;
            std::ostringstream out;
            const auto result = cli::cmd_score(experiment_dir, config_path, options, out);
            py::dict d;
            d["exit_code"] = result.exit_code;
            d["output"] = out.str();
            return d;
        },
        py::arg("experiment_dir"), py::arg("config_path"), py::arg("parallelism") = 1);
    m.def(
        "analyze_experiments",
        [](const std::vector<std::filesystem::path>& dirs, std::optional<double> tau) {
            cli::Options options;
            options.tau = tau;
            std::ostringstream out;
            const auto result = cli::cmd_analyze(dirs, options, out);
            py::dict d;
            d["exit_code"] = result.exit_code;
            d["output"] = out.str();
            return d;
        },
        py::arg("experiment_dirs"), py::arg("tau") = std::nullopt);
    m.def(
        "load_scores",
        [](const std::filesystem::path& experiment_dir) {
            const auto loaded = load_experiment(experiment_dir.parent_path(),
                                                experiment_dir.filename().string());
            py::list rows;
            if (loaded.series)
                for (const auto& entry : loaded.series->entries) {
                    py::dict row;
                    row["run"] = entry.run_id;
                    row["phase"] = phase_label(entry.phase);
                    row["agent"] = entry.agent_id;
                    row["score"] = entry.score;
                    rows.append(row);
                }
            return rows;
        },
        py::arg("experiment_dir"));
}
