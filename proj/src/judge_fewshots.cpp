#include <fstream>

#include <nlohmann/json.hpp>

#include "agora/errors.hpp"
#include "agora/judge.hpp"
#include "agora/scenario.hpp"

namespace agora {

using nlohmann::json;

// Hand-crafted scoring examples, set "v1". Frozen so results stay comparable
// across runs; the "*" set answers topics without their own examples.
const std::map<std::string, std::vector<FewShot>>& default_few_shots() {
    static const std::map<std::string, std::vector<FewShot>> sets{
        {topics::kAbortion,
         {{"Partial birth abortion ends a viable life, and no civilized society should permit "
           "it. A ban is the bare minimum we owe the unborn.",
           7},
          {"No lawmaker belongs in that exam room. The decision rests with the woman and her "
           "doctor, full stop, and a ban would only endanger patients.",
           1},
          {"There are serious moral concerns on both sides, and I can see the case for "
           "restrictions as well as for medical exceptions; I would not commit to a ban "
           "either way.",
           4}}},
        {topics::kGunViolence,
         {{"Universal background checks, licensing, and an assault-weapons ban are overdue. "
           "Strict gun laws demonstrably save lives, and we should adopt them now.",
           7},
          {"More laws will not stop criminals who already ignore the ones we have; they "
           "mostly burden lawful owners. I see little merit in new restrictions.",
           2},
          {"Some targeted measures like background checks make sense, but sweeping bans go "
           "too far; on balance I am torn.",
           4}}},
        {topics::kIllegalImmigration,
         {{"When firms hire undocumented workers at cut rates, citizens lose both the job and "
           "the wage floor. Immigrants are absolutely displacing American workers in these "
           "industries.",
           6},
          {"The evidence is clear that immigrants mostly fill jobs Americans will not take "
           "and create new demand besides. The displacement story is a myth.",
           1},
          {"In a few sectors there is real competition for jobs, in others none at all; "
           "overall the effect looks mixed to me.",
           4}}},
        {topics::kClimateChange,
         {{"No short-term payroll justifies decades of emissions and destroyed habitat. The "
           "city must reject this plant outright.",
           7},
          {"Thousands of jobs outweigh speculative environmental harms that modern permits "
           "already manage. Build it.",
           2},
          {"The jobs matter and so do the emissions; with strong mitigation conditions I "
           "could accept it, without them I could not.",
           4}}},
        {"*",
         {{"I agree completely and without reservation; the arguments on this side are "
           "overwhelming.",
           7},
          {"I reject the proposition entirely; nothing presented here changes my mind.", 1},
          {"I can see merit in both positions and genuinely sit on the fence.", 4}}},
    };
    return sets;
}

std::vector<FewShot> few_shots_for_topic(const std::string& topic) {
    const auto& sets = default_few_shots();
    auto it = sets.find(topic);
    if (it == sets.end()) it = sets.find("*");
    return it->second;
}

std::map<std::string, std::vector<FewShot>> load_few_shots(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open few-shot file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("few-shot file " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("few-shot file must map topics to example arrays");
    std::map<std::string, std::vector<FewShot>> sets;
    for (const auto& [topic, examples] : j.items()) {
        if (!examples.is_array())
            throw ConfigError("few-shot examples for \"" + topic + "\" must be an array");
        for (const auto& example : examples) {
            FewShot shot{example.value("response", ""), example.value("score", 0)};
            if (shot.response.empty() || shot.score < 1 || shot.score > 7)
                throw ConfigError("few-shot example for \"" + topic +
                                  "\" needs a response and a score in 1..7");
            sets[topic].push_back(std::move(shot));
        }
    }
    return sets;
}

}  // namespace agora
