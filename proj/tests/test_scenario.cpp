#include <doctest.h>

#include "agora/errors.hpp"
#include "agora/scenario.hpp"
#include "test_util.hpp"

using namespace agora;

TEST_CASE("catalog ships exactly four complete topics") {
    const auto& catalog = builtin_catalog();
    REQUIRE(catalog.size() == 4);
    for (const auto& scenario : catalog) {
        CHECK_FALSE(scenario.topic.empty());
        CHECK_FALSE(scenario.scenario_text.empty());
        CHECK_FALSE(scenario.debate_question.empty());
        CHECK_FALSE(scenario.evaluation_prompt.empty());
    }
}

TEST_CASE("catalog entries match the published prompts") {
    CHECK(get_scenario(topics::kAbortion).evaluation_prompt ==
          "How strongly do they agree that partial birth abortions should be banned?");
    CHECK(get_scenario(topics::kClimateChange).debate_question ==
          "Should the city go ahead with building the manufacturing plant?");
    CHECK(get_scenario(topics::kGunViolence).debate_question ==
          "Should there be stricter gun ownership laws?");
    CHECK(get_scenario(topics::kIllegalImmigration).evaluation_prompt ==
          "How strongly do they agree that immigrants are taking jobs from Americans?");
    CHECK(get_scenario(topics::kAbortion).scenario_text.find("partial birth abortion") !=
          std::string::npos);
}

TEST_CASE("unknown topics are rejected") {
    CHECK_THROWS_AS(get_scenario("taxation"), UnknownTopic);
}

TEST_CASE("compose_scenario assembles both arguments and the question") {
    const ArgumentPair args{"the plant brings thousands of jobs.",
                            "the plant raises emissions.", ""};
    const Scenario draft = compose_scenario(args, "Build the plant?");
    CHECK(draft.scenario_text.find("thousands of jobs") != std::string::npos);
    CHECK(draft.scenario_text.find("raises emissions") != std::string::npos);
    CHECK(draft.debate_question == "Build the plant?");
    CHECK_FALSE(draft.evaluation_prompt.empty());
}

TEST_CASE("compose_scenario applies refinement overrides") {
    const ArgumentPair args{"jobs matter most.", "emissions are harmful.",
                            "jobs => careers"};
    const Scenario draft = compose_scenario(args, "Build it?");
    CHECK(draft.scenario_text.find("careers matter most") != std::string::npos);
    CHECK(draft.scenario_text.find("jobs matter most") == std::string::npos);
}

TEST_CASE("compose_scenario appends free-text refinements") {
    const ArgumentPair args{"jobs.", "emissions.", "The vote happens next month."};
    const Scenario draft = compose_scenario(args, "Build it?");
    CHECK(draft.scenario_text.find("The vote happens next month.") != std::string::npos);
}

TEST_CASE("compose_scenario is pure and deterministic") {
    const ArgumentPair args{"for text", "against text", "a => b"};
    const Scenario first = compose_scenario(args, "Q?");
    const Scenario second = compose_scenario(args, "Q?");
    CHECK(first.scenario_text == second.scenario_text);
    CHECK(first.evaluation_prompt == second.evaluation_prompt);
}

TEST_CASE("compose_scenario rejects empty inputs") {
    CHECK_THROWS_AS(compose_scenario(ArgumentPair{"", "against", ""}, "Q?"),
                    PreconditionViolation);
    CHECK_THROWS_AS(compose_scenario(ArgumentPair{"for", "", ""}, "Q?"),
                    PreconditionViolation);
    CHECK_THROWS_AS(compose_scenario(ArgumentPair{"for", "against", ""}, ""),
                    PreconditionViolation);
}

TEST_CASE("catalog files round-trip and validate") {
    testutil::TempDir tmp;
    const auto path = tmp.path() / "catalog.json";
    testutil::write_file(path, R"([{
        "topic": "transit",
        "scenario_text": "The city debates a new light-rail line.",
        "debate_question": "Should the line be built?",
        "evaluation_prompt": "How strongly do they agree that the line should be built?"
    }])");
    const auto catalog = load_catalog(path);
    REQUIRE(catalog.size() == 1);
    CHECK(get_scenario("transit", catalog).debate_question == "Should the line be built?");
    CHECK_THROWS_AS(get_scenario("absent", catalog), UnknownTopic);

    testutil::write_file(path, R"([{"topic": "incomplete"}])");
    CHECK_THROWS_AS(load_catalog(path), ConfigError);
}
