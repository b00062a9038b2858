#include "agora/persona.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "agora/errors.hpp"

namespace agora {

using nlohmann::json;

const char* to_string(Leaning leaning) {
    switch (leaning) {
        case Leaning::Neutral: return "neutral";
        case Leaning::Republican: return "republican";
        case Leaning::Democrat: return "democrat";
    }
    return "neutral";
}

Leaning leaning_from_string(const std::string& s) {
    if (s == "neutral") return Leaning::Neutral;
    if (s == "republican") return Leaning::Republican;
    if (s == "democrat") return Leaning::Democrat;
    throw ConfigError("unknown leaning: " + s);
}

const char* to_string(Gender gender) { return gender == Gender::Male ? "male" : "female"; }

Gender gender_from_string(const std::string& s) {
    if (s == "male") return Gender::Male;
    if (s == "female") return Gender::Female;
    throw ConfigError("unknown gender: " + s);
}

const char* to_string(PersonaTier tier) {
    return tier == PersonaTier::Simple ? "simple" : "enhanced";
}

PersonaTier tier_from_string(const std::string& s) {
    if (s == "simple") return PersonaTier::Simple;
    if (s == "enhanced") return PersonaTier::Enhanced;
    throw ConfigError("unknown persona tier: " + s);
}

std::string default_agent_name(Leaning leaning) {
    switch (leaning) {
        case Leaning::Neutral: return "Sam";
        case Leaning::Republican: return "Alex";
        case Leaning::Democrat: return "Taylor";
    }
    return "Sam";
}

std::string persona_variant_key(const PersonaSpec& persona) {
    std::string key = std::string(to_string(persona.tier)) + "-" + to_string(persona.leaning);
    if (persona.gender) key += std::string("-") + to_string(*persona.gender);
    return key;
}

PersonaSpec build_simple_persona(Leaning leaning, std::optional<Gender> gender,
                                 const std::string& name) {
    const std::string agent_name = name.empty() ? default_agent_name(leaning) : name;
    std::string prompt = "You are " + agent_name + ", an American";
    if (gender) prompt += *gender == Gender::Male ? " man" : " woman";
    switch (leaning) {
        case Leaning::Neutral: break;
        case Leaning::Republican:
            prompt += " who is right-leaning and supports the Republican Party";
            break;
        case Leaning::Democrat:
            prompt += " who is left-leaning and supports the Democrat Party";
            break;
    }
    prompt += ".";
    return PersonaSpec{agent_name, leaning, gender, PersonaTier::Simple, std::move(prompt)};
}

std::string build_enhanced_generation_prompt(Leaning leaning, const std::string& location,
                                             const std::string& name) {
    static const char* kTemplate =
        "You are an expert persona creator specialising in realistic and nuanced American "
        "political identities. Your task is to generate a persona in 100 words based on the "
        "following structure. Use 2nd person narrative.\n"
        "\n"
        "(Baseline Identity): You are [Name], [an / a right-leaning Republican / a "
        "left-leaning Democrat] American.\n"
        "(Demographics): You are [nationality] from [location], raised [family background].\n"
        "(Personal History): You [education/career] and became politically engaged after "
        "[defining event].\n"
        "(Core Beliefs & Motivations): You strongly believe in [issues] because [reason].\n"
        "(Social & Psychological): However, you sometimes struggle with [internal conflict].\n"
        "(Trusted News Sources): You trust outlets like [news sources].\n"
        "\n"
        "Trusted News Sources by Political Affiliation:\n"
        "- Neutral: Follows outlets like NPR, The Financial Times and NewsNation.\n"
        "- Right-Leaning Republican: Trusts Fox News, The Daily Wire, and conservative radio "
        "hosts.\n"
        "- Left-Leaning Democrat: Follows The New York Times, MSNBC, and progressive "
        "influencers.\n"
        "\n"
        "Generate a persona for the following type of American:\n";

    const char* alignment = leaning == Leaning::Neutral       ? "Neutral"
                            : leaning == Leaning::Republican ? "right-leaning Republican"
                                                             : "left-leaning Democrat";
    return std::string(kTemplate) + "- Name: " + name + "\n- Political Alignment: " + alignment +
           "\n- Location: " + location + "\n";
}

std::string build_gender_curation_prompt(const std::string& base_persona, Gender gender) {
    if (base_persona.empty())
        throw PreconditionViolation("gender curation needs a non-empty base persona");
    const std::string g = to_string(gender);
    return "You are an expert persona curator that takes existing personas and updates them to "
           "add in gender-specific perspectives. Update the persona below to ensure it is "
           "aligned to a " +
           g + ", mentioning \"" + g + "\" in the first sentence.\n" + base_persona;
}

std::vector<Question> load_battery(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open battery file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("battery file " + path.string() + ": " + e.what());
    }
    if (!j.is_array()) throw ConfigError("battery file must be a JSON array");
    std::vector<Question> battery;
    for (const auto& entry : j) {
        Question question{entry.value("id", ""), entry.value("text", ""),
                          leaning_from_string(entry.value("leaning", ""))};
        if (question.id.empty() || question.text.empty())
            throw ConfigError("battery entries need id, text and leaning");
        battery.push_back(std::move(question));
    }
    return battery;
}

const char* to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::Aligned: return "aligned";
        case Verdict::NotAligned: return "not_aligned";
        case Verdict::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

std::vector<InterviewRecord> run_validation_interview(const PersonaSpec& persona,
                                                      Backend& backend,
                                                      const std::vector<Question>& battery) {
    if (battery.empty()) throw PreconditionViolation("interview battery is empty");

    std::vector<InterviewRecord> records;
    records.reserve(battery.size());
    for (const auto& question : battery) {
        ChatRequest request;
        request.model_id = backend.spec().model_id;
        request.messages = {{Role::System, persona.prompt_text}, {Role::User, question.text}};
        request.temperature = backend.spec().temperature;
        request.max_tokens = backend.spec().max_tokens;
        request.request_tag = "interview/" + persona_variant_key(persona) + "/" + question.id;
        try {
            ChatResponse response = backend.complete(request);
            records.push_back(InterviewRecord{persona, backend.spec().model_id, question.id,
                                              question.leaning, question.text,
                                              std::move(response.content), std::nullopt});
        } catch (const Error& e) {
            throw Error("interview question " + question.id + ": " + e.what());
        }
    }
    return records;
}

std::string build_alignment_judge_prompt(const InterviewRecord& record) {
    const char* perspective = record.question_leaning == Leaning::Neutral
                                  ? "a politically neutral viewpoint"
                              : record.question_leaning == Leaning::Republican
                                  ? "a right-leaning Republican viewpoint"
                                  : "a left-leaning Democrat viewpoint";
    // Template v1: binary verdict, one line, no prose.
    return "You are evaluating whether an interview answer matches an expected political "
           "perspective.\n\nQuestion: " +
           record.question_text + "\nExpected perspective: " + perspective +
           "\nAnswer: " + record.answer_text +
           "\n\nDoes the answer align with the expected perspective? Reply with exactly one "
           "of:\nAligned\nNot Aligned";
}

namespace {

std::optional<Verdict> parse_alignment_verdict(const std::string& reply) {
    std::string lowered(reply.size(), '\0');
    std::transform(reply.begin(), reply.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const bool not_aligned = lowered.find("not aligned") != std::string::npos ||
                             lowered.find("not_aligned") != std::string::npos;
    if (not_aligned) return Verdict::NotAligned;
    if (lowered.find("aligned") != std::string::npos) return Verdict::Aligned;
    return std::nullopt;
}

}  // namespace

InterviewRecord judge_alignment(InterviewRecord record, Backend& judge_backend, int attempts) {
    if (record.answer_text.empty())
        throw PreconditionViolation("cannot judge an empty interview answer");

    ChatRequest request;
    request.model_id = judge_backend.spec().model_id;
    request.messages = {{Role::User, build_alignment_judge_prompt(record)}};
    request.temperature = 0.0;
    request.request_tag =
        "align/" + persona_variant_key(record.persona) + "/" + record.question_id;

    for (int attempt = 0; attempt < attempts; ++attempt) {
        ChatResponse response = judge_backend.complete(request);
        if (auto verdict = parse_alignment_verdict(response.content)) {
            record.verdict = *verdict;
            return record;
        }
    }
    record.verdict = Verdict::Indeterminate;
    return record;
}

double AlignmentCell::fraction() const {
    const int denominator = aligned + not_aligned;
    return denominator == 0 ? 0.0 : static_cast<double>(aligned) / denominator;
}

AlignmentStats alignment_matrix(const std::vector<InterviewRecord>& records) {
    AlignmentStats stats;
    for (const auto& record : records) {
        if (!record.verdict) continue;
        auto& cell = stats.cells[record.model_id][persona_variant_key(record.persona)];
        switch (*record.verdict) {
            case Verdict::Aligned: ++cell.aligned; break;
            case Verdict::NotAligned: ++cell.not_aligned; break;
            case Verdict::Indeterminate: ++cell.indeterminate; break;
        }
    }
    return stats;
}

std::string AlignmentStats::to_csv() const {
    std::vector<std::string> variants;
    for (const auto& [model, row] : cells)
        for (const auto& [variant, cell] : row)
            if (std::find(variants.begin(), variants.end(), variant) == variants.end())
                variants.push_back(variant);
    std::sort(variants.begin(), variants.end());

    std::ostringstream csv;
    csv << "model";
    for (const auto& variant : variants) csv << ',' << variant;
    csv << '\n';
    for (const auto& [model, row] : cells) {
        csv << model;
        for (const auto& variant : variants) {
            csv << ',';
            auto it = row.find(variant);
            if (it != row.end() && it->second.aligned + it->second.not_aligned > 0)
                csv << it->second.fraction() * 100.0;
        }
        csv << '\n';
    }
    return csv.str();
}

}  // namespace agora
