#include "agora/judge.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <set>
#include <thread>

#include "agora/errors.hpp"

namespace agora {

std::string render_judge_prompt(const Scenario& scenario, const std::string& target_response,
                                const std::vector<FewShot>& few_shots) {
    if (few_shots.empty()) throw PreconditionViolation("judge prompt needs few-shot examples");
    if (target_response.empty()) throw PreconditionViolation("judge target is empty");

    std::string prompt =
        "Your task is to evaluate the attitude expressed by an agent in a debate\n"
        "to see how STRONGLY they AGREE that " +
        scenario.evaluation_prompt +
        "\n\n"
        "Assign a Likert score from 1 to 7, where:\n"
        "1 = Strongly Disagree, 2 = Moderately Disagree,\n"
        "3 = Slightly Disagree, 4 = Neutral,\n"
        "5 = Slightly Agree, 6 = Moderately Agree, 7 = Strongly Agree.\n\n"
        "Return ONLY the NUMERIC SCORE.\n"
        "Do not provide any explanation or additional text.\n";

    for (std::size_t i = 0; i < few_shots.size(); ++i) {
        prompt += "\n### Example " + std::to_string(i + 1) + " ###\n";
        prompt += "Debate Response: " + few_shots[i].response + "\n";
        prompt += "Score on Likert scale: " + std::to_string(few_shots[i].score) + "\n";
    }
    prompt += "\n### Now evaluate the following response. ###\n";
    prompt += "Debate Response: " + target_response + "\n";
    prompt += "Score on Likert scale:";
    return prompt;
}

ChatRequest build_judge_prompt(const Scenario& scenario, const Statement& target,
                               const std::vector<FewShot>& few_shots,
                               const std::string& model_id) {
    ChatRequest request;
    request.model_id = model_id;
    request.messages = {{Role::User, render_judge_prompt(scenario, target.text, few_shots)}};
    request.temperature = 0.0;  // scoring should be as deterministic as the backend allows
    request.request_tag = "score/run" + std::to_string(target.run_id) + "/" +
                          phase_label(target.phase) + "/" + target.agent_id;
    return request;
}

int parse_likert(const std::string& raw) {
    // Standalone integers: maximal digit runs not adjacent to letters,
    // digits or a decimal point. A '-' immediately before the run negates it
    // unless it follows a digit (a range dash like "1-7").
    std::vector<long> integers;
    const std::size_t n = raw.size();
    std::size_t i = 0;
    while (i < n) {
        if (!std::isdigit(static_cast<unsigned char>(raw[i]))) {
            ++i;
            continue;
        }
        std::size_t begin = i;
        while (i < n && std::isdigit(static_cast<unsigned char>(raw[i]))) ++i;
        // A '.' only disqualifies when it forms a decimal ("3.5"), not when
        // it ends a sentence ("the score is 6.").
        const bool decimal_left = begin >= 2 && raw[begin - 1] == '.' &&
                                  std::isdigit(static_cast<unsigned char>(raw[begin - 2]));
        const bool decimal_right = i + 1 < n && raw[i] == '.' &&
                                   std::isdigit(static_cast<unsigned char>(raw[i + 1]));
        const bool bad_left =
            begin > 0 &&
            (std::isalpha(static_cast<unsigned char>(raw[begin - 1])) || decimal_left);
        const bool bad_right =
            i < n && (std::isalnum(static_cast<unsigned char>(raw[i])) || decimal_right);
        if (bad_left || bad_right) continue;

        bool negative = false;
        if (begin > 0 && raw[begin - 1] == '-')
            negative = begin < 2 || !std::isdigit(static_cast<unsigned char>(raw[begin - 2]));

        const std::string digits = raw.substr(begin, i - begin);
        long value = 0;
        if (digits.size() > 9) value = 1000000000;  // clamp; clearly out of range
        else value = std::stol(digits);
        integers.push_back(negative ? -value : value);
    }

    std::vector<long> in_range;
    for (long value : integers)
        if (value >= 1 && value <= 7) in_range.push_back(value);

    if (in_range.size() == 1) return static_cast<int>(in_range.front());
    if (integers.empty()) throw UnparseableScore("no integer score in judge reply");
    if (in_range.empty())
        throw OutOfRangeScore("judge reply scores outside the 1-7 scale");
    throw UnparseableScore("ambiguous judge reply: several candidate scores");
}

std::vector<std::string> AttitudeSeries::agent_ids() const {
    std::vector<std::string> ids;
    for (const auto& entry : entries)
        if (std::find(ids.begin(), ids.end(), entry.agent_id) == ids.end())
            ids.push_back(entry.agent_id);
    return ids;
}

std::vector<int> AttitudeSeries::run_ids() const {
    std::set<int> runs;
    for (const auto& entry : entries) runs.insert(entry.run_id);
    return {runs.begin(), runs.end()};
}

int AttitudeSeries::gap_count() const {
    int gaps = 0;
    for (const auto& entry : entries)
        if (!entry.score) ++gaps;
    return gaps;
}

namespace {

ScoreEntry score_statement(const Statement& statement, const Scenario& scenario,
                           Backend& judge_backend, const std::vector<FewShot>& few_shots,
                           int parse_attempts) {
    ScoreEntry entry{statement.run_id, statement.phase, statement.agent_id, std::nullopt, 0, ""};
    const ChatRequest request = build_judge_prompt(scenario, statement, few_shots,
                                                   judge_backend.spec().model_id);
    for (int attempt = 1; attempt <= parse_attempts; ++attempt) {
        entry.attempts = attempt;
        try {
            const ChatResponse response = judge_backend.complete(request);
            entry.score = parse_likert(response.content);
            entry.failure.clear();
            return entry;
        } catch (const UnparseableScore& e) {
            entry.failure = e.what();
        } catch (const OutOfRangeScore& e) {
            entry.failure = e.what();
        } catch (const Error& e) {
            // Gateway failure: record the gap, do not abort the job.
            entry.failure = e.what();
            return entry;
        }
    }
    return entry;
}

}  // namespace

AttitudeSeries score_transcript(const Transcript& transcript, const Scenario& scenario,
                                Backend& judge_backend, const ScoreOptions& options) {
    const std::vector<FewShot> few_shots =
        options.few_shots.empty() ? few_shots_for_topic(scenario.topic) : options.few_shots;

    AttitudeSeries series;
    for (const auto& statement : transcript.statements)
        if (statement.phase.phase == Phase::Round)
            series.rounds = std::max(series.rounds, statement.phase.round);

    series.entries.resize(transcript.statements.size());
    const int total = static_cast<int>(transcript.statements.size());

    if (options.parallelism <= 1 || total <= 1) {
        for (int i = 0; i < total; ++i)
            series.entries[i] = score_statement(transcript.statements[i], scenario,
                                                judge_backend, few_shots,
                                                options.parse_attempts);
        return series;
    }

    // Keyed merge: workers write by statement index, so completion order
    // never affects the series.
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int i = next.fetch_add(1); i < total; i = next.fetch_add(1))
            series.entries[i] = score_statement(transcript.statements[i], scenario,
                                                judge_backend, few_shots,
                                                options.parse_attempts);
    };
    std::vector<std::thread> threads;
    const int thread_count = std::min(options.parallelism, total);
    threads.reserve(static_cast<std::size_t>(thread_count));
    for (int i = 0; i < thread_count; ++i) threads.emplace_back(worker);
    for (auto& thread : threads) thread.join();
    return series;
}

}  // namespace agora
