#include "agora/debate.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <set>
#include <thread>

#include <nlohmann/json.hpp>

#include "agora/errors.hpp"

namespace agora {

using nlohmann::json;

DebateGoal goal_for(Leaning leaning) {
    return leaning == Leaning::Neutral ? DebateGoal::NeutralListener : DebateGoal::Persuader;
}

AgentSlot make_agent_slot(std::string agent_id, PersonaSpec persona,
                          std::shared_ptr<Backend> backend) {
    const DebateGoal goal = goal_for(persona.leaning);
    return AgentSlot{std::move(agent_id), std::move(persona), std::move(backend), goal};
}

int phase_position(PhaseRef ref, int rounds) {
    switch (ref.phase) {
        case Phase::Opening: return 0;
        case Phase::Round: return ref.round;
        case Phase::Closing: return rounds + 1;
    }
    return 0;
}

std::string phase_label(PhaseRef ref) {
    switch (ref.phase) {
        case Phase::Opening: return "opening";
        case Phase::Round: return "round-" + std::to_string(ref.round);
        case Phase::Closing: return "closing";
    }
    return "opening";
}

void DebateConfig::validate() const {
    if (roster.size() < 2) throw ConfigError("roster needs at least two agents");
    if (rounds < 1) throw ConfigError("rounds must be >= 1");
    if (runs < 1) throw ConfigError("runs must be >= 1");
    if (context_budget < 0) throw ConfigError("context_budget must be >= 0");
    std::set<std::string> ids;
    std::set<std::string> names;
    for (const auto& slot : roster) {
        if (slot.agent_id.empty()) throw ConfigError("agent id must be non-empty");
        if (!ids.insert(slot.agent_id).second)
            throw ConfigError("duplicate agent id: " + slot.agent_id);
        if (!names.insert(slot.persona.name).second)
            throw ConfigError("duplicate persona name \"" + slot.persona.name +
                              "\"; give agents distinct names");
        if (!slot.backend) throw ConfigError("agent " + slot.agent_id + " has no backend");
        if (slot.persona.prompt_text.empty())
            throw ConfigError("agent " + slot.agent_id + " has an empty persona");
        const DebateGoal expected = goal_for(slot.persona.leaning);
        if (slot.goal != expected)
            throw ConfigError("agent " + slot.agent_id +
                              ": debate goal does not match its leaning");
        if (gender_awareness && !slot.persona.gender)
            throw ConfigError("gender_awareness requires a gender for agent " + slot.agent_id);
    }
}

std::vector<std::vector<AgentSlot>> speaking_orders(const std::vector<AgentSlot>& roster) {
    std::vector<AgentSlot> order = roster;
    auto by_id = [](const AgentSlot& a, const AgentSlot& b) { return a.agent_id < b.agent_id; };
    std::sort(order.begin(), order.end(), by_id);
    std::vector<std::vector<AgentSlot>> permutations;
    do {
        permutations.push_back(order);
    } while (std::next_permutation(order.begin(), order.end(), by_id));
    return permutations;
}

std::vector<AgentSlot> default_order(const std::vector<AgentSlot>& roster) {
    std::vector<AgentSlot> order = roster;
    auto rank = [](Leaning leaning) {
        switch (leaning) {
            case Leaning::Neutral: return 0;
            case Leaning::Republican: return 1;
            case Leaning::Democrat: return 2;
        }
        return 0;
    };
    std::stable_sort(order.begin(), order.end(), [&](const AgentSlot& a, const AgentSlot& b) {
        return rank(a.persona.leaning) < rank(b.persona.leaning);
    });
    return order;
}

namespace prompts {

std::string goal_instruction(DebateGoal goal) {
    if (goal == DebateGoal::NeutralListener)
        return "Your goal is to listen carefully to the arguments from both sides, weigh them "
               "on their merits, and say where you currently stand.";
    return "Your goal is to persuade the neutral participant of your position with clear, "
           "well-reasoned arguments.";
}

std::string opening_instruction() {
    return "Deliver your opening statement outlining your position on the scenario.";
}

std::string round_instruction() {
    return "Continue the debate: respond to the points made so far and rebut arguments you "
           "disagree with.";
}

std::string closing_instruction(bool announce_closing) {
    if (!announce_closing) return round_instruction();
    return "The debate has finished. Deliver your closing statement: summarise your arguments "
           "and reflect any shifts in your opinion.";
}

}  // namespace prompts

int estimate_tokens(const std::string& text) {
    return static_cast<int>((text.size() + 3) / 4);
}

namespace {

std::string statement_display_label(const Statement& statement, const DebateConfig& config) {
    // An unannounced closing is presented to agents as just another round.
    if (statement.phase.phase == Phase::Closing && !config.announce_closing)
        return "round-" + std::to_string(config.rounds + 1);
    return phase_label(statement.phase);
}

std::string phase_instruction(PhaseRef phase, const DebateConfig& config) {
    switch (phase.phase) {
        case Phase::Opening: return prompts::opening_instruction();
        case Phase::Round: return prompts::round_instruction();
        case Phase::Closing: return prompts::closing_instruction(config.announce_closing);
    }
    return prompts::round_instruction();
}

std::string render_system_message(const AgentSlot& slot, const DebateConfig& config) {
    std::string text = slot.persona.prompt_text;
    text += "\n\n" + prompts::goal_instruction(slot.goal);
    text += "\n\nDebate scenario: " + config.scenario.scenario_text;
    text += "\n\nDebate question: " + config.scenario.debate_question;
    if (config.gender_awareness) {
        text += "\n\nParticipants: ";
        for (std::size_t i = 0; i < config.roster.size(); ++i) {
            if (i > 0) text += ", ";
            text += config.roster[i].persona.name + " (" +
                    to_string(*config.roster[i].persona.gender) + ")";
        }
        text += ".";
    }
    return text;
}

std::string render_user_message(const std::vector<Statement>& history,
                                const std::vector<bool>& dropped, const DebateConfig& config,
                                PhaseRef phase) {
    std::string text;
    if (history.empty()) {
        text = "The debate is just beginning.";
    } else {
        text = "Debate so far:\n";
        bool marker_emitted = false;
        for (std::size_t i = 0; i < history.size(); ++i) {
            if (dropped[i]) {
                if (!marker_emitted) {
                    text += "\n" + std::string(prompts::kOmissionMarker);
                    marker_emitted = true;
                }
                continue;
            }
            const Statement& statement = history[i];
            std::string name = statement.agent_id;
            for (const auto& slot : config.roster)
                if (slot.agent_id == statement.agent_id) name = slot.persona.name;
            text += "\n" + name + " (" + statement_display_label(statement, config) +
                    "): " + statement.text;
        }
    }
    text += "\n\n" + phase_instruction(phase, config);
    return text;
}

}  // namespace

ChatRequest build_agent_prompt(const AgentSlot& slot, const DebateConfig& config,
                               const std::vector<Statement>& history, PhaseRef phase,
                               int run_id) {
    const std::string system_text = render_system_message(slot, config);
    std::vector<bool> dropped(history.size(), false);

    // Protected content: the scenario block, every opening statement and the
    // two most recent phases (the latest full round plus any in-progress
    // phase). Older round statements drop oldest-first.
    std::vector<std::size_t> droppable;
    int max_position = 0;
    for (const auto& statement : history)
        max_position = std::max(max_position, phase_position(statement.phase, config.rounds));
    for (std::size_t i = 0; i < history.size(); ++i) {
        const int position = phase_position(history[i].phase, config.rounds);
        if (position != 0 && position < max_position - 1) droppable.push_back(i);
    }

    std::string user_text = render_user_message(history, dropped, config, phase);
    if (config.context_budget > 0) {
        std::size_t next_drop = 0;
        while (estimate_tokens(system_text) + estimate_tokens(user_text) >
               config.context_budget) {
            if (next_drop >= droppable.size())
                throw ContextOverflow("prompt for agent " + slot.agent_id + " at " +
                                      phase_label(phase) + " exceeds the context budget of " +
                                      std::to_string(config.context_budget) + " tokens");
            dropped[droppable[next_drop++]] = true;
            user_text = render_user_message(history, dropped, config, phase);
        }
    }

    ChatRequest request;
    request.model_id = slot.backend->spec().model_id;
    request.messages = {{Role::System, system_text}, {Role::User, user_text}};
    request.temperature = slot.backend->spec().temperature;
    request.max_tokens = slot.backend->spec().max_tokens;
    request.request_tag = "debate/run" + std::to_string(run_id) + "/" + phase_label(phase) + "/" +
                          slot.agent_id;
    return request;
}

namespace {

RunResult execute_run(const DebateConfig& config, const std::string& fingerprint, int run_id,
                      const StatementSink& sink) {
    std::vector<PhaseRef> sequence;
    sequence.push_back({Phase::Opening, 0});
    for (int k = 1; k <= config.rounds; ++k) sequence.push_back({Phase::Round, k});
    sequence.push_back({Phase::Closing, 0});

    std::vector<Statement> history;
    history.reserve(sequence.size() * config.roster.size());
    PhaseRef current{Phase::Opening, 0};
    try {
        for (PhaseRef phase : sequence) {
            current = phase;
            for (const auto& slot : config.roster) {
                ChatRequest request = build_agent_prompt(slot, config, history, phase, run_id);
                ChatResponse response = slot.backend->complete(request);
                Statement statement{run_id, phase, slot.agent_id, std::move(response.content),
                                    std::chrono::system_clock::now()};
                if (sink) sink(statement);
                history.push_back(std::move(statement));
            }
        }
    } catch (const Error& e) {
        return RunResult{run_id, std::nullopt,
                         RunFailure{run_id, phase_label(current), e.what()}};
    }
    return RunResult{run_id, Transcript{fingerprint, std::move(history)}, std::nullopt};
}

}  // namespace

std::vector<RunResult> run_debate(const DebateConfig& config, const StatementSink& sink,
                                  int parallelism, const RunObserver& observer) {
    config.validate();
    const std::string fingerprint = config_fingerprint(config);

    std::vector<RunResult> results(static_cast<std::size_t>(config.runs));
    if (parallelism <= 1 || config.runs == 1) {
        for (int run = 1; run <= config.runs; ++run) {
            results[run - 1] = execute_run(config, fingerprint, run, sink);
            if (observer) observer(results[run - 1]);
        }
        return results;
    }

    std::atomic<int> next_run{1};
    auto worker = [&]() {
        for (int run = next_run.fetch_add(1); run <= config.runs;
             run = next_run.fetch_add(1)) {
            results[run - 1] = execute_run(config, fingerprint, run, sink);
            if (observer) observer(results[run - 1]);
        }
    };
    std::vector<std::thread> threads;
    const int thread_count = std::min(parallelism, config.runs);
    threads.reserve(static_cast<std::size_t>(thread_count));
    for (int i = 0; i < thread_count; ++i) threads.emplace_back(worker);
    for (auto& thread : threads) thread.join();
    return results;
}

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t hash = kFnvOffset;
    for (unsigned char byte : data) {
        hash ^= byte;
        hash *= kFnvPrime;
    }
    return hash;
}

json backend_snapshot(const BackendSpec& spec) {
    json j{{"name", spec.name},
           {"kind", spec.kind == BackendKind::Http ? "http" : "scripted"},
           {"model", spec.model_id},
           {"timeout_ms", spec.timeout.count()},
           {"retry_budget", spec.retry_budget}};
    if (spec.temperature) j["temperature"] = *spec.temperature;
    if (spec.max_tokens) j["max_tokens"] = *spec.max_tokens;
    if (spec.kind == BackendKind::Http) j["endpoint"] = spec.endpoint;
    else j["script"] = spec.script.to_json();
    return j;
}

}  // namespace

std::string config_fingerprint(const DebateConfig& config) {
    json roster = json::array();
    for (const auto& slot : config.roster) {
        json persona{{"name", slot.persona.name},
                     {"leaning", to_string(slot.persona.leaning)},
                     {"tier", to_string(slot.persona.tier)},
                     {"prompt_text", slot.persona.prompt_text}};
        if (slot.persona.gender) persona["gender"] = to_string(*slot.persona.gender);
        roster.push_back({{"agent_id", slot.agent_id},
                          {"persona", std::move(persona)},
                          {"backend", backend_snapshot(slot.backend->spec())}});
    }
    const json canonical{{"scenario",
                          {{"topic", config.scenario.topic},
                           {"scenario_text", config.scenario.scenario_text},
                           {"debate_question", config.scenario.debate_question},
                           {"evaluation_prompt", config.scenario.evaluation_prompt}}},
                         {"roster", std::move(roster)},
                         {"rounds", config.rounds},
                         {"runs", config.runs},
                         {"announce_closing", config.announce_closing},
                         {"gender_awareness", config.gender_awareness},
                         {"seed", config.seed},
                         {"context_budget", config.context_budget}};
    // nlohmann::json object keys are sorted, so the dump is canonical.
    char buffer[17];
    std::snprintf(buffer, sizeof buffer, "%016llx",
                  static_cast<unsigned long long>(fnv1a(canonical.dump())));
    return buffer;
}

}  // namespace agora
