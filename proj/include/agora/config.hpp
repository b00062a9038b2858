#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "agora/analytics.hpp"
#include "agora/backend.hpp"
#include "agora/debate.hpp"

namespace agora {

enum class OrderMode { Default, Permutation, Explicit };

struct AgentConfig {
    std::string id;
    std::string name;  // empty = canonical name for the leaning
    Leaning leaning = Leaning::Neutral;
    std::optional<Gender> gender;
    PersonaTier tier = PersonaTier::Simple;
    std::string backend;  // key into the backends section
};

struct ProtocolConfig {
    int rounds = 10;
    int runs = 10;
    OrderMode order_mode = OrderMode::Default;
    int permutation_index = 0;
    std::vector<std::string> explicit_order;
    bool announce_closing = true;
    bool gender_awareness = false;
    long seed = 0;
    int context_budget = 8192;
};

struct JudgeConfig {
    std::string backend;
    std::string few_shots = "default";  // set id or path to a few-shot file
};

struct AnalysisConfig {
    double tau = 0.05;
    Grouping grouping = Grouping::Pooled;
    LeveneCenter levene_center = LeveneCenter::Mean;
    RegressionDomain regression_domain = RegressionDomain::AllPhases;
};

/// Parsed experiment config file. Validation errors carry the offending key
/// path; nothing touches the filesystem until a config parses cleanly.
struct ExperimentConfig {
    std::map<std::string, BackendSpec> backends;
    std::vector<AgentConfig> personas;
    std::string scenario_topic;
    std::optional<Scenario> custom_scenario;  // inline scenario overrides the topic lookup
    ProtocolConfig protocol;
    JudgeConfig judge;
    AnalysisConfig analysis;
    std::filesystem::path output_root = "out";

    static ExperimentConfig parse_file(const std::filesystem::path& path);
    static ExperimentConfig parse_json(const nlohmann::json& j,
                                       const std::filesystem::path& base_dir);

    /// Canonical snapshot: sorted keys, resolved defaults. The fingerprint
    /// hashes this, so config-file key order never matters.
    nlohmann::json canonical_snapshot() const;

    Scenario resolve_scenario() const;
    std::vector<FewShot> resolve_few_shots() const;

    /// Builds runtime backends plus the roster in configured speaking order.
    /// Every agent maps onto the shared Backend instance of its backend key.
    struct Runtime {
        std::map<std::string, std::shared_ptr<Backend>> backends;
        std::vector<AgentSlot> roster;
    };
    Runtime instantiate() const;

    DebateConfig to_debate_config(const Runtime& runtime) const;
};

}  // namespace agora
