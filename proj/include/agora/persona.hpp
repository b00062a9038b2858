#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agora/backend.hpp"

namespace agora {

enum class Leaning { Neutral, Republican, Democrat };
enum class Gender { Male, Female };
enum class PersonaTier { Simple, Enhanced };

const char* to_string(Leaning leaning);
Leaning leaning_from_string(const std::string& s);
const char* to_string(Gender gender);
Gender gender_from_string(const std::string& s);
const char* to_string(PersonaTier tier);
PersonaTier tier_from_string(const std::string& s);

/// Canonical gender-neutral agent name for a leaning: Sam / Alex / Taylor.
std::string default_agent_name(Leaning leaning);

struct PersonaSpec {
    std::string name;
    Leaning leaning = Leaning::Neutral;
    std::optional<Gender> gender;
    PersonaTier tier = PersonaTier::Simple;
    std::string prompt_text;
};

/// Variant key used to group alignment results, e.g. "simple-republican-female".
std::string persona_variant_key(const PersonaSpec& persona);

/// Renders the canonical one-line persona template for (leaning, gender).
PersonaSpec build_simple_persona(Leaning leaning, std::optional<Gender> gender = {},
                                 const std::string& name = "");

/// Returns the shipped enhanced persona fixture for (leaning, gender).
PersonaSpec build_enhanced_persona(Leaning leaning, std::optional<Gender> gender = {});

/// The persona-creator instruction used to (re)generate enhanced personas
/// with any capable model; placeholders filled with the given identity.
std::string build_enhanced_generation_prompt(Leaning leaning, const std::string& location,
                                             const std::string& name);

/// The persona-curator instruction that rewrites an existing persona into a
/// gender-specific variant. Throws PreconditionViolation on an empty base.
std::string build_gender_curation_prompt(const std::string& base_persona, Gender gender);

// --- validation interview -------------------------------------------------

struct Question {
    std::string id;
    std::string text;
    Leaning leaning;
};

/// The default 21-question battery, 7 per leaning.
const std::vector<Question>& default_battery();

/// Battery file: JSON array of {id, text, leaning}.
std::vector<Question> load_battery(const std::filesystem::path& path);

enum class Verdict { Aligned, NotAligned, Indeterminate };
const char* to_string(Verdict verdict);

struct InterviewRecord {
    PersonaSpec persona;
    std::string model_id;  // model that answered, for matrix grouping
    std::string question_id;
    Leaning question_leaning = Leaning::Neutral;
    std::string question_text;
    std::string answer_text;
    std::optional<Verdict> verdict;  // set only after judging
};

/// Asks every battery question to the persona (persona prompt as the system
/// message, question as the user message). Verdicts stay unset. Gateway
/// errors propagate annotated with the question id.
std::vector<InterviewRecord> run_validation_interview(const PersonaSpec& persona,
                                                      Backend& backend,
                                                      const std::vector<Question>& battery);

/// The alignment judge instruction for one record (versioned template v1).
std::string build_alignment_judge_prompt(const InterviewRecord& record);

/// Judges one answer against its question's expected leaning. Unparseable
/// judge replies are retried up to `attempts` times, then marked
/// Indeterminate.
InterviewRecord judge_alignment(InterviewRecord record, Backend& judge_backend,
                                int attempts = 3);

struct AlignmentCell {
    int aligned = 0;
    int not_aligned = 0;
    int indeterminate = 0;

    /// aligned / (aligned + not_aligned); indeterminate excluded. 0 when empty.
    double fraction() const;
};

struct AlignmentStats {
    // model -> persona variant -> counts
    std::map<std::string, std::map<std::string, AlignmentCell>> cells;

    /// Matrix as CSV: rows are models, columns persona variants, cells the
    /// aligned percentage (empty when a cell has no judged records).
    std::string to_csv() const;
};

AlignmentStats alignment_matrix(const std::vector<InterviewRecord>& records);

}  // namespace agora
