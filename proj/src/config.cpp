#include "agora/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>

#include "agora/errors.hpp"

namespace agora {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& key_path, const std::string& message) {
    throw ConfigError(key_path + ": " + message);
}

std::string join_path(const std::string& key_path, const std::string& key) {
    return key_path.empty() ? key : key_path + "." + key;
}

const json& require(const json& j, const std::string& key, const std::string& key_path) {
    if (!j.contains(key)) fail(join_path(key_path, key), "missing required key");
    return j.at(key);
}

std::string require_string(const json& j, const std::string& key, const std::string& key_path) {
    const json& value = require(j, key, key_path);
    if (!value.is_string()) fail(join_path(key_path, key), "expected a string");
    return value.get<std::string>();
}

BackendSpec parse_backend(const std::string& name, const json& j, const fs::path& base_dir) {
    const std::string key_path = "backends." + name;
    if (!j.is_object()) fail(key_path, "expected an object");

    BackendSpec spec;
    spec.name = name;
    const std::string kind = require_string(j, "kind", key_path);
    if (kind == "http") spec.kind = BackendKind::Http;
    else if (kind == "scripted") spec.kind = BackendKind::Scripted;
    else fail(key_path + ".kind", "must be \"http\" or \"scripted\"");

    spec.model_id = j.value("model", "");
    if (spec.kind == BackendKind::Http) {
        spec.endpoint = require_string(j, "endpoint", key_path);
    } else {
        if (!j.contains("script")) fail(key_path + ".script", "scripted backend needs a script");
        const json& script = j.at("script");
        try {
            if (script.is_string())
                spec.script = Script::from_file(base_dir / script.get<std::string>());
            else
                spec.script = Script::from_json(script);
        } catch (const ConfigError& e) {
            fail(key_path + ".script", e.what());
        }
    }

    spec.timeout = std::chrono::milliseconds(j.value("timeout_ms", 120000));
    spec.retry_budget = j.value("retry_budget", 2);
    if (j.contains("temperature")) {
        const json& temperature = j.at("temperature");
        if (temperature.is_string() && temperature.get<std::string>() == "default")
            spec.temperature = std::nullopt;  // let the server decide
        else if (temperature.is_number())
            spec.temperature = temperature.get<double>();
        else
            fail(key_path + ".temperature", "expected a number or \"default\"");
    }
    if (j.contains("max_tokens") && !j.at("max_tokens").is_null()) {
        if (!j.at("max_tokens").is_number_integer() || j.at("max_tokens").get<int>() <= 0)
            fail(key_path + ".max_tokens", "expected a positive integer");
        spec.max_tokens = j.at("max_tokens").get<int>();
    }
    if (j.contains("bearer_token_env")) {
        const char* token = std::getenv(j.at("bearer_token_env").get<std::string>().c_str());
        if (token) spec.bearer_token = token;
    }
    try {
        spec.validate();
    } catch (const ConfigError& e) {
        fail(key_path, e.what());
    }
    return spec;
}

AgentConfig parse_agent(const json& j, std::size_t index) {
    const std::string key_path = "personas[" + std::to_string(index) + "]";
    if (!j.is_object()) fail(key_path, "expected an object");
    AgentConfig agent;
    agent.id = require_string(j, "id", key_path);
    agent.name = j.value("name", "");
    try {
        agent.leaning = leaning_from_string(require_string(j, "leaning", key_path));
    } catch (const ConfigError& e) {
        fail(key_path + ".leaning", e.what());
    }
    if (j.contains("gender") && !j.at("gender").is_null()) {
        try {
            agent.gender = gender_from_string(j.at("gender").get<std::string>());
        } catch (const ConfigError& e) {
            fail(key_path + ".gender", e.what());
        }
    }
    try {
        agent.tier = tier_from_string(j.value("tier", "simple"));
    } catch (const ConfigError& e) {
        fail(key_path + ".tier", e.what());
    }
    agent.backend = require_string(j, "backend", key_path);
    return agent;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return parse_json(j, path.parent_path());
}

ExperimentConfig ExperimentConfig::parse_json(const json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw ConfigError("config root must be a JSON object");
    ExperimentConfig config;

    const json& backends = require(j, "backends", "");
    if (!backends.is_object() || backends.empty())
        fail("backends", "expected a non-empty object of named backends");
    for (const auto& [name, backend] : backends.items())
        config.backends.emplace(name, parse_backend(name, backend, base_dir));

    const json& personas = require(j, "personas", "");
    if (!personas.is_array() || personas.size() < 2)
        fail("personas", "expected an array of at least two agents");
    for (std::size_t i = 0; i < personas.size(); ++i) {
        AgentConfig agent = parse_agent(personas[i], i);
        if (!config.backends.count(agent.backend))
            fail("personas[" + std::to_string(i) + "].backend",
                 "unknown backend \"" + agent.backend + "\"");
        config.personas.push_back(std::move(agent));
    }
    std::set<std::string> ids;
    for (std::size_t i = 0; i < config.personas.size(); ++i)
        if (!ids.insert(config.personas[i].id).second)
            fail("personas[" + std::to_string(i) + "].id",
                 "duplicate agent id \"" + config.personas[i].id + "\"");

    const json& scenario = require(j, "scenario", "");
    if (!scenario.is_object()) fail("scenario", "expected an object");
    if (scenario.contains("scenario_text")) {
        Scenario custom;
        custom.topic = require_string(scenario, "topic", "scenario");
        custom.scenario_text = require_string(scenario, "scenario_text", "scenario");
        custom.debate_question = require_string(scenario, "debate_question", "scenario");
        custom.evaluation_prompt = require_string(scenario, "evaluation_prompt", "scenario");
        config.custom_scenario = std::move(custom);
        config.scenario_topic = config.custom_scenario->topic;
    } else {
        config.scenario_topic = require_string(scenario, "topic", "scenario");
        if (scenario.contains("catalog")) {
            const auto catalog =
                load_catalog(base_dir / scenario.at("catalog").get<std::string>());
            try {
                config.custom_scenario = get_scenario(config.scenario_topic, catalog);
            } catch (const UnknownTopic& e) {
                fail("scenario.topic", e.what());
            }
        } else {
            try {
                get_scenario(config.scenario_topic);
            } catch (const UnknownTopic& e) {
                fail("scenario.topic", e.what());
            }
        }
    }

    if (j.contains("protocol")) {
        const json& protocol = j.at("protocol");
        if (!protocol.is_object()) fail("protocol", "expected an object");
        config.protocol.rounds = protocol.value("rounds", 10);
        config.protocol.runs = protocol.value("runs", 10);
        config.protocol.announce_closing = protocol.value("announce_closing", true);
        config.protocol.gender_awareness = protocol.value("gender_awareness", false);
        config.protocol.seed = protocol.value("seed", 0L);
        config.protocol.context_budget = protocol.value("context_budget", 8192);
        if (config.protocol.rounds < 1) fail("protocol.rounds", "must be >= 1");
        if (config.protocol.runs < 1) fail("protocol.runs", "must be >= 1");
        if (protocol.contains("order")) {
            const json& order = protocol.at("order");
            if (order.is_string() && order.get<std::string>() == "default") {
                config.protocol.order_mode = OrderMode::Default;
            } else if (order.is_object() && order.contains("permutation")) {
                config.protocol.order_mode = OrderMode::Permutation;
                config.protocol.permutation_index = order.at("permutation").get<int>();
            } else if (order.is_object() && order.contains("explicit")) {
                config.protocol.order_mode = OrderMode::Explicit;
                config.protocol.explicit_order =
                    order.at("explicit").get<std::vector<std::string>>();
            } else {
                fail("protocol.order",
                     "expected \"default\", {\"permutation\": k} or {\"explicit\": [ids]}");
            }
        }
    }

    const json& judge = require(j, "judge", "");
    if (!judge.is_object()) fail("judge", "expected an object");
    config.judge.backend = require_string(judge, "backend", "judge");
    if (!config.backends.count(config.judge.backend))
        fail("judge.backend", "unknown backend \"" + config.judge.backend + "\"");
    config.judge.few_shots = judge.value("few_shots", "default");
    if (config.judge.few_shots != "default") {
        const fs::path few_shot_path = base_dir / config.judge.few_shots;
        if (!fs::exists(few_shot_path))
            fail("judge.few_shots", "no such few-shot file: " + few_shot_path.string());
        config.judge.few_shots = few_shot_path.string();
    }

    if (j.contains("analysis")) {
        const json& analysis = j.at("analysis");
        if (!analysis.is_object()) fail("analysis", "expected an object");
        config.analysis.tau = analysis.value("tau", 0.05);
        const std::string grouping = analysis.value("grouping", "pooled");
        if (grouping == "pooled") config.analysis.grouping = Grouping::Pooled;
        else if (grouping == "round-means") config.analysis.grouping = Grouping::ByRoundMeans;
        else fail("analysis.grouping", "must be \"pooled\" or \"round-means\"");
        const std::string center = analysis.value("levene_center", "mean");
        if (center == "mean") config.analysis.levene_center = LeveneCenter::Mean;
        else if (center == "median") config.analysis.levene_center = LeveneCenter::Median;
        else fail("analysis.levene_center", "must be \"mean\" or \"median\"");
        const std::string domain = analysis.value("regression_domain", "all-phases");
        if (domain == "all-phases")
            config.analysis.regression_domain = RegressionDomain::AllPhases;
        else if (domain == "rounds-only")
            config.analysis.regression_domain = RegressionDomain::RoundsOnly;
        else fail("analysis.regression_domain", "must be \"all-phases\" or \"rounds-only\"");
    }

    config.output_root = j.value("output_root", std::string("out"));
    if (config.output_root.is_relative()) config.output_root = base_dir / config.output_root;

    // Order-mode checks that need the roster.
    if (config.protocol.order_mode == OrderMode::Permutation) {
        long factorial = 1;
        for (std::size_t i = 2; i <= config.personas.size(); ++i) factorial *= i;
        if (config.protocol.permutation_index < 0 ||
            config.protocol.permutation_index >= factorial)
            fail("protocol.order.permutation",
                 "index out of range for " + std::to_string(config.personas.size()) + " agents");
    }
    if (config.protocol.order_mode == OrderMode::Explicit) {
        if (config.protocol.explicit_order.size() != config.personas.size())
            fail("protocol.order.explicit", "must list every agent id exactly once");
        for (const auto& id : config.protocol.explicit_order)
            if (!ids.count(id))
                fail("protocol.order.explicit", "unknown agent id \"" + id + "\"");
        std::set<std::string> unique(config.protocol.explicit_order.begin(),
                                     config.protocol.explicit_order.end());
        if (unique.size() != config.protocol.explicit_order.size())
            fail("protocol.order.explicit", "must list every agent id exactly once");
    }
    return config;
}

Scenario ExperimentConfig::resolve_scenario() const {
    if (custom_scenario) return *custom_scenario;
    return get_scenario(scenario_topic);
}

std::vector<FewShot> ExperimentConfig::resolve_few_shots() const {
    if (judge.few_shots == "default") return few_shots_for_topic(scenario_topic);
    auto sets = load_few_shots(judge.few_shots);
    auto it = sets.find(scenario_topic);
    if (it == sets.end()) it = sets.find("*");
    if (it == sets.end())
        throw ConfigError("judge.few_shots: file has no examples for topic \"" +
                          scenario_topic + "\"");
    return it->second;
}

ExperimentConfig::Runtime ExperimentConfig::instantiate() const {
    Runtime runtime;
    for (const auto& [name, spec] : backends)
        runtime.backends.emplace(name, std::make_shared<Backend>(spec));

    std::vector<AgentSlot> roster;
    for (const auto& agent : personas) {
        PersonaSpec persona;
        if (agent.tier == PersonaTier::Simple) {
            persona = build_simple_persona(agent.leaning, agent.gender, agent.name);
        } else {
            persona = build_enhanced_persona(agent.leaning, agent.gender);
            if (!agent.name.empty() && agent.name != persona.name) {
                // Rename the fixture persona for rosters with several agents
                // of one leaning.
                const std::string default_name = persona.name;
                std::string& text = persona.prompt_text;
                for (std::size_t pos = 0; (pos = text.find(default_name, pos)) !=
                                          std::string::npos;
                     pos += agent.name.size())
                    text.replace(pos, default_name.size(), agent.name);
                persona.name = agent.name;
            }
        }
        roster.push_back(
            make_agent_slot(agent.id, std::move(persona), runtime.backends.at(agent.backend)));
    }

    switch (protocol.order_mode) {
        case OrderMode::Default: roster = default_order(roster); break;
        case OrderMode::Permutation:
            roster = speaking_orders(roster)[static_cast<std::size_t>(
                protocol.permutation_index)];
            break;
        case OrderMode::Explicit: {
            std::vector<AgentSlot> ordered;
            for (const auto& id : protocol.explicit_order)
                for (const auto& slot : roster)
                    if (slot.agent_id == id) ordered.push_back(slot);
            roster = std::move(ordered);
            break;
        }
    }
    runtime.roster = std::move(roster);
    return runtime;
}

DebateConfig ExperimentConfig::to_debate_config(const Runtime& runtime) const {
    DebateConfig debate;
    debate.scenario = resolve_scenario();
    debate.roster = runtime.roster;
    debate.rounds = protocol.rounds;
    debate.runs = protocol.runs;
    debate.announce_closing = protocol.announce_closing;
    debate.gender_awareness = protocol.gender_awareness;
    debate.seed = protocol.seed;
    debate.context_budget = protocol.context_budget;
    return debate;
}

json ExperimentConfig::canonical_snapshot() const {
    json backend_section = json::object();
    for (const auto& [name, spec] : backends) {
        json entry{{"kind", spec.kind == BackendKind::Http ? "http" : "scripted"},
                   {"model", spec.model_id},
                   {"timeout_ms", spec.timeout.count()},
                   {"retry_budget", spec.retry_budget}};
        if (spec.temperature) entry["temperature"] = *spec.temperature;
        else entry["temperature"] = "default";
        if (spec.max_tokens) entry["max_tokens"] = *spec.max_tokens;
        if (spec.kind == BackendKind::Http) entry["endpoint"] = spec.endpoint;
        else entry["script"] = spec.script.to_json();
        backend_section[name] = std::move(entry);
    }

    json persona_section = json::array();
    for (const auto& agent : personas) {
        json entry{{"id", agent.id},
                   {"leaning", to_string(agent.leaning)},
                   {"tier", to_string(agent.tier)},
                   {"backend", agent.backend}};
        if (!agent.name.empty()) entry["name"] = agent.name;
        if (agent.gender) entry["gender"] = to_string(*agent.gender);
        persona_section.push_back(std::move(entry));
    }

    const Scenario scenario = resolve_scenario();
    json order;
    switch (protocol.order_mode) {
        case OrderMode::Default: order = "default"; break;
        case OrderMode::Permutation: order = json{{"permutation", protocol.permutation_index}};
            break;
        case OrderMode::Explicit: order = json{{"explicit", protocol.explicit_order}}; break;
    }

    return json{
        {"backends", std::move(backend_section)},
        {"personas", std::move(persona_section)},
        {"scenario",
         {{"topic", scenario.topic},
          {"scenario_text", scenario.scenario_text},
          {"debate_question", scenario.debate_question},
          {"evaluation_prompt", scenario.evaluation_prompt}}},
        {"protocol",
         {{"rounds", protocol.rounds},
          {"runs", protocol.runs},
          {"order", std::move(order)},
          {"announce_closing", protocol.announce_closing},
          {"gender_awareness", protocol.gender_awareness},
          {"seed", protocol.seed},
          {"context_budget", protocol.context_budget}}},
        {"judge", {{"backend", judge.backend}, {"few_shots", judge.few_shots}}},
        {"analysis",
         {{"tau", analysis.tau},
          {"grouping", to_string(analysis.grouping)},
          {"levene_center", to_string(analysis.levene_center)},
          {"regression_domain", to_string(analysis.regression_domain)}}}};
}

}  // namespace agora
