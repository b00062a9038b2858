#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agora/backend.hpp"
#include "agora/persona.hpp"
#include "agora/scenario.hpp"

namespace agora {

enum class DebateGoal { NeutralListener, Persuader };

/// Neutral agents listen; opinionated agents persuade.
DebateGoal goal_for(Leaning leaning);

struct AgentSlot {
    std::string agent_id;
    PersonaSpec persona;
    std::shared_ptr<Backend> backend;
    DebateGoal goal = DebateGoal::NeutralListener;
};

AgentSlot make_agent_slot(std::string agent_id, PersonaSpec persona,
                          std::shared_ptr<Backend> backend);

enum class Phase { Opening, Round, Closing };

struct PhaseRef {
    Phase phase = Phase::Opening;
    int round = 0;  // 1..rounds for Phase::Round, 0 otherwise

    bool operator==(const PhaseRef&) const = default;
};

/// Position of a phase in the protocol order: 0, 1..R, R+1.
int phase_position(PhaseRef ref, int rounds);
/// "opening", "round-<k>", "closing".
std::string phase_label(PhaseRef ref);

struct DebateConfig {
    Scenario scenario;
    std::vector<AgentSlot> roster;  // speaking order
    int rounds = 10;
    int runs = 10;
    bool announce_closing = true;
    bool gender_awareness = false;
    long seed = 0;
    int context_budget = 8192;  // approximate tokens; 0 = unlimited

    void validate() const;
};

struct Statement {
    int run_id = 0;
    PhaseRef phase;
    std::string agent_id;
    std::string text;
    std::chrono::system_clock::time_point timestamp;
};

struct Transcript {
    std::string config_fingerprint;
    std::vector<Statement> statements;
};

/// All roster permutations, ordered lexicographically by agent_id sequence.
std::vector<std::vector<AgentSlot>> speaking_orders(const std::vector<AgentSlot>& roster);

/// Stable reorder by leaning rank Neutral < Republican < Democrat.
std::vector<AgentSlot> default_order(const std::vector<AgentSlot>& roster);

/// Surfaces of the prompt builder that are fixed template data (version v1).
namespace prompts {
std::string goal_instruction(DebateGoal goal);
std::string opening_instruction();
std::string round_instruction();
std::string closing_instruction(bool announce_closing);
inline constexpr const char* kOmissionMarker = "[... earlier rounds omitted ...]";
}  // namespace prompts

/// Builds the chat request for one turn. `history` holds all statements of
/// this run that strictly precede the turn. The system message carries the
/// persona, debate goal, scenario and question (plus roster genders when
/// gender_awareness is on); the user message serializes the history with
/// speaker labels and ends with the phase instruction. Oldest round
/// statements are dropped first when the context budget is exceeded; the
/// scenario, opening statements and the two most recent phases always
/// survive. Throws ContextOverflow if the protected content alone overflows.
ChatRequest build_agent_prompt(const AgentSlot& slot, const DebateConfig& config,
                               const std::vector<Statement>& history, PhaseRef phase,
                               int run_id);

struct RunFailure {
    int run_id = 0;
    std::string phase;
    std::string message;
};

struct RunResult {
    int run_id = 0;
    std::optional<Transcript> transcript;
    std::optional<RunFailure> failure;

    bool ok() const { return transcript.has_value(); }
};

/// Called with each statement before the next request is issued; the hook is
/// where durable persistence belongs.
using StatementSink = std::function<void(const Statement&)>;

/// Called once per run as it settles (completed or failed).
using RunObserver = std::function<void(const RunResult&)>;

/// Executes all runs of the protocol: opening, rounds 1..R and closing, each
/// in roster order. Runs are independent (fresh history) and fail
/// independently. With `parallelism` > 1 distinct runs execute concurrently;
/// sink and observer must then be thread-safe.
std::vector<RunResult> run_debate(const DebateConfig& config,
                                  const StatementSink& sink = {},
                                  int parallelism = 1,
                                  const RunObserver& observer = {});

/// Stable hash of the canonicalized config (independent of config-file key
/// order), as a hex string.
std::string config_fingerprint(const DebateConfig& config);

/// Rough token estimate used by the context budget (chars / 4, rounded up).
int estimate_tokens(const std::string& text);

}  // namespace agora
