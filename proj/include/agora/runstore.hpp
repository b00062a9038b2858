#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "agora/debate.hpp"
#include "agora/judge.hpp"

namespace agora {

struct RunStatus {
    bool complete = false;
    std::string failure;  // cause when failed
};

struct RunManifest {
    std::string experiment_id;
    std::string fingerprint;
    std::string created_at;  // ISO-8601 UTC
    std::string tool_version;
    nlohmann::json config_snapshot;  // canonical form
    std::vector<std::string> roster_order;
    std::map<int, RunStatus> run_status;
    bool sealed = false;

    nlohmann::json to_json() const;
    static RunManifest from_json(const nlohmann::json& j);
};

/// Everything load_experiment can recover from disk.
struct LoadedExperiment {
    RunManifest manifest;
    std::vector<Transcript> transcripts;  // one per run file, run order
    std::optional<AttitudeSeries> series;
    std::optional<nlohmann::json> report;
    int dropped_lines = 0;  // torn trailing lines tolerated on incomplete runs
    bool resumable = false;
};

/// One experiment directory:
///   <root>/<id>/manifest.json
///   <root>/<id>/runs/NN.jsonl      (append-only statements)
///   <root>/<id>/scores/NN.jsonl
///   <root>/<id>/reports/analysis.json
///   <root>/<id>/exports/*.csv
///   <root>/<id>/charts/*.svg
class Experiment {
public:
    /// Creates the directory layout and persists the manifest before any
    /// debate begins. Ids are "<fingerprint prefix>-NNN"; the same config
    /// opened twice yields the same fingerprint but distinct ids.
    static Experiment create(const std::string& fingerprint,
                             const nlohmann::json& config_snapshot,
                             const std::vector<std::string>& roster_order,
                             const std::filesystem::path& root);

    /// Opens an existing experiment. Throws NotFound.
    static Experiment open(const std::filesystem::path& root, const std::string& id);

    const RunManifest& manifest() const { return manifest_; }
    const std::filesystem::path& dir() const { return dir_; }

    /// Durably appends one statement line (flushed and fsynced before
    /// returning). Throws SealedExperiment after seal().
    void append_statement(const Statement& statement);

    void mark_run(int run_id, RunStatus status);
    void seal();

    /// Loads everything persisted so far. A torn trailing line in a run file
    /// not marked complete is dropped (the at-most-one in-flight statement);
    /// any other undecodable line raises CorruptArtifact with its line
    /// number.
    LoadedExperiment load() const;

    void write_series(const AttitudeSeries& series);
    void write_report(const nlohmann::json& report);
    void write_export(const std::string& name, const std::string& csv);
    void write_chart(const std::string& name, const std::string& svg);

    std::filesystem::path run_file(int run_id) const;
    std::filesystem::path score_file(int run_id) const;

    static nlohmann::json statement_to_json(const Statement& statement);
    static Statement statement_from_json(const nlohmann::json& j);
    static nlohmann::json score_to_json(const ScoreEntry& entry);
    static ScoreEntry score_from_json(const nlohmann::json& j);

private:
    Experiment() : manifest_mutex_(std::make_unique<std::mutex>()) {}
    void persist_manifest();

    std::filesystem::path dir_;
    RunManifest manifest_;
    std::unique_ptr<std::mutex> manifest_mutex_;  // guards manifest rewrites
};

/// Free-function facade mirroring the operation names.
Experiment open_experiment(const std::string& fingerprint, const nlohmann::json& config_snapshot,
                           const std::vector<std::string>& roster_order,
                           const std::filesystem::path& root);
LoadedExperiment load_experiment(const std::filesystem::path& root, const std::string& id);

/// Experiment ids under a root, oldest first.
std::vector<std::string> list_experiments(const std::filesystem::path& root);

}  // namespace agora
