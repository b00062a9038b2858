#include "agora/scenario.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agora/errors.hpp"

namespace agora {

using nlohmann::json;

const std::vector<Scenario>& builtin_catalog() {
    static const std::vector<Scenario> catalog{
        {topics::kAbortion,
         "In the context of ongoing discussions about reproductive rights, there has been "
         "growing concern over the procedure known as partial birth abortion, with some "
         "advocating for its ban to protect unborn children. Meanwhile, others argue that "
         "women should have the ultimate authority to make decisions regarding their own "
         "bodies and health care.",
         "Should partial birth abortions be banned to protect unborn children?",
         "How strongly do they agree that partial birth abortions should be banned?"},
        {topics::kGunViolence,
         "After a rise in violent crime and mass shootings, lawmakers are under pressure to "
         "find solutions that balance public safety with constitutional rights. One argues "
         "that tighter restrictions prevent guns from falling into the wrong hands, while the "
         "other warns that such measures infringe people’s individual rights and limit "
         "self-defense capabilities.",
         "Should there be stricter gun ownership laws?",
         "How strongly do they agree that the U.S. should adopt strict gun control laws?"},
        {topics::kIllegalImmigration,
         "A company is caught hiring undocumented workers at lower wages while refusing to "
         "hire legal residents for the same jobs. Some argue that hiring illegal immigrants "
         "fills essential jobs that Americans refuse to take, contributing to economic growth "
         "and lower costs for consumers. The opposing participant counters that this practice "
         "undermines American workers by creating unfair competition.",
         "Do immigrants take jobs from American-born workers?",
         "How strongly do they agree that immigrants are taking jobs from Americans?"},
        {topics::kClimateChange,
         "A major international corporation is considering opening a large manufacturing "
         "plant in your city. The plant will create thousands of jobs and boost economic "
         "growth. However, it will also increase carbon emissions and destroy local habitats.",
         "Should the city go ahead with building the manufacturing plant?",
         "How strongly do they agree that the plant should not be built due to its "
         "environmental damage and climate impact?"},
    };
    return catalog;
}

Scenario get_scenario(const std::string& topic, const std::vector<Scenario>& catalog) {
    for (const auto& scenario : catalog)
        if (scenario.topic == topic) return scenario;
    throw UnknownTopic("unknown debate topic: " + topic);
}

Scenario get_scenario(const std::string& topic) { return get_scenario(topic, builtin_catalog()); }

std::vector<Scenario> load_catalog(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario catalog: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("scenario catalog " + path.string() + ": " + e.what());
    }
    if (!j.is_array()) throw ConfigError("scenario catalog must be a JSON array");
    std::vector<Scenario> catalog;
    for (const auto& entry : j) {
        Scenario scenario{entry.value("topic", ""), entry.value("scenario_text", ""),
                          entry.value("debate_question", ""), entry.value("evaluation_prompt", "")};
        if (scenario.topic.empty() || scenario.scenario_text.empty() ||
            scenario.debate_question.empty() || scenario.evaluation_prompt.empty())
            throw ConfigError("scenario catalog entries need topic, scenario_text, "
                              "debate_question and evaluation_prompt");
        catalog.push_back(std::move(scenario));
    }
    return catalog;
}

namespace {

// Refinement lines "old => new" rewrite phrases; other non-empty lines are
// collected as extra framing sentences.
std::string apply_overrides(std::string text, const std::string& refinements) {
    std::istringstream lines(refinements);
    std::string line;
    while (std::getline(lines, line)) {
        const auto arrow = line.find("=>");
        if (arrow == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto begin = s.find_first_not_of(" \t");
            const auto end = s.find_last_not_of(" \t");
            return begin == std::string::npos ? std::string() : s.substr(begin, end - begin + 1);
        };
        const std::string from = trim(line.substr(0, arrow));
        const std::string to = trim(line.substr(arrow + 2));
        if (from.empty()) continue;
        for (std::size_t pos = 0; (pos = text.find(from, pos)) != std::string::npos;
             pos += to.size())
            text.replace(pos, from.size(), to);
    }
    return text;
}

std::string extra_framing(const std::string& refinements) {
    std::istringstream lines(refinements);
    std::string line;
    std::string extra;
    while (std::getline(lines, line)) {
        if (line.find("=>") != std::string::npos) continue;
        const auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) continue;
        if (!extra.empty()) extra += ' ';
        extra += line.substr(begin);
    }
    return extra;
}

}  // namespace

Scenario compose_scenario(const ArgumentPair& args, const std::string& question,
                          const std::string& topic) {
    if (args.for_argument.empty())
        throw PreconditionViolation("compose_scenario: empty for-argument");
    if (args.against_argument.empty())
        throw PreconditionViolation("compose_scenario: empty against-argument");
    if (question.empty()) throw PreconditionViolation("compose_scenario: empty question");

    const std::string for_arg = apply_overrides(args.for_argument, args.refinements);
    const std::string against_arg = apply_overrides(args.against_argument, args.refinements);

    std::string text = "The community is divided over the following question. One side argues "
                       "that " +
                       for_arg + " The other side counters that " + against_arg;
    const std::string extra = extra_framing(args.refinements);
    if (!extra.empty()) text += " " + extra;

    return Scenario{topic, text, question,
                    "How strongly do they agree with the following: " + question};
}

}  // namespace agora
