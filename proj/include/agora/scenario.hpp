#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace agora {

namespace topics {
inline constexpr const char* kAbortion = "abortion";
inline constexpr const char* kGunViolence = "gun_violence";
inline constexpr const char* kIllegalImmigration = "illegal_immigration";
inline constexpr const char* kClimateChange = "climate_change";
}  // namespace topics

/// One debate topic: the framing text agents argue over, the question they
/// debate, and the prompt the judge scores attitudes against.
struct Scenario {
    std::string topic;
    std::string scenario_text;
    std::string debate_question;
    std::string evaluation_prompt;
};

/// Raw material for composing a new scenario: a for argument, an against
/// argument, and optional refinements applied on top.
struct ArgumentPair {
    std::string for_argument;
    std::string against_argument;
    std::string refinements;
};

/// The four shipped topics.
const std::vector<Scenario>& builtin_catalog();

/// Looks a topic up in the built-in catalog. Throws UnknownTopic.
Scenario get_scenario(const std::string& topic);
Scenario get_scenario(const std::string& topic, const std::vector<Scenario>& catalog);

/// Catalog file: JSON array of objects with topic, scenario_text,
/// debate_question, evaluation_prompt. Users add topics by appending entries.
std::vector<Scenario> load_catalog(const std::filesystem::path& path);

/// Deterministic template assembly of a scenario draft from an argument pair.
/// Refinement lines of the form "old => new" rewrite phrases inside the
/// arguments; other non-empty lines are appended as extra framing. No model
/// call is involved: equal inputs yield equal outputs.
Scenario compose_scenario(const ArgumentPair& args, const std::string& question,
                          const std::string& topic = "custom");

}  // namespace agora
