#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agora/backend.hpp"
#include "agora/debate.hpp"
#include "agora/scenario.hpp"

namespace agora {

/// One few-shot example for the Likert judge.
struct FewShot {
    std::string response;
    int score = 4;  // 1..7
};

/// The shipped hand-crafted examples, keyed by topic (set id "v1").
const std::map<std::string, std::vector<FewShot>>& default_few_shots();

/// Examples for a topic; unknown topics fall back to a generic set.
std::vector<FewShot> few_shots_for_topic(const std::string& topic);

/// Few-shot file: JSON object topic -> array of {response, score}.
std::map<std::string, std::vector<FewShot>> load_few_shots(const std::filesystem::path& path);

/// Renders the judge instruction: task statement with the scenario's
/// evaluation prompt, the 1-7 Likert legend, the numeric-score-only order,
/// the enumerated examples and finally the target response.
std::string render_judge_prompt(const Scenario& scenario, const std::string& target_response,
                                const std::vector<FewShot>& few_shots);

/// Chat request for judging a single statement. The judge sees only that
/// statement's text, never the rest of the transcript. Temperature is pinned
/// to 0.
ChatRequest build_judge_prompt(const Scenario& scenario, const Statement& target,
                               const std::vector<FewShot>& few_shots,
                               const std::string& model_id);

/// Strict Likert parsing: a lone integer 1..7 (surrounding whitespace
/// allowed), or a reply containing exactly one standalone integer in [1,7].
/// Throws OutOfRangeScore when integers are present but all fall outside the
/// scale, UnparseableScore when none or several candidates exist.
int parse_likert(const std::string& raw);

struct ScoreEntry {
    int run_id = 0;
    PhaseRef phase;
    std::string agent_id;
    std::optional<int> score;  // nullopt = explicit gap, never imputed
    int attempts = 0;
    std::string failure;  // cause when score is a gap
};

struct AttitudeSeries {
    int rounds = 0;
    std::vector<ScoreEntry> entries;  // run-major, phase-position, roster order

    std::vector<std::string> agent_ids() const;
    std::vector<int> run_ids() const;
    int gap_count() const;
};

struct ScoreOptions {
    int parse_attempts = 3;  // judge attempts per statement
    int parallelism = 1;
    std::vector<FewShot> few_shots;  // empty = topic default
};

/// Scores every statement of the transcript independently. Parse failures are
/// retried with the identical prompt; statements that still fail (or hit
/// gateway errors) are recorded as gaps without aborting the job. Completion
/// order never affects the assembled series.
AttitudeSeries score_transcript(const Transcript& transcript, const Scenario& scenario,
                                Backend& judge_backend, const ScoreOptions& options = {});

}  // namespace agora
