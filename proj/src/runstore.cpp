#include "agora/runstore.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <system_error>

#include "agora/version.hpp"

namespace agora {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string utc_now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buffer[32];
    std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buffer;
}

std::string run_file_name(int run_id) {
    char buffer[16];
    std::snprintf(buffer, sizeof buffer, "%02d.jsonl", run_id);
    return buffer;
}

int run_id_from_file_name(const std::string& name) {
    return std::atoi(name.c_str());
}

// Durable append: the line reaches the disk before we return.
void append_line_durably(const fs::path& path, const std::string& line) {
    const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT, 0644);
    if (fd < 0)
        throw StorageUnavailable("cannot open " + path.string() + ": " + std::strerror(errno));
    const std::string payload = line + "\n";
    ssize_t written = 0;
    while (written < static_cast<ssize_t>(payload.size())) {
        const ssize_t n =
            ::write(fd, payload.data() + written, payload.size() - written);
        if (n < 0) {
            const int err = errno;
            ::close(fd);
            throw StorageUnavailable("write to " + path.string() + " failed: " +
                                     std::strerror(err));
        }
        written += n;
    }
    ::fsync(fd);
    ::close(fd);
}

void write_file_atomically(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw StorageUnavailable("cannot write " + tmp.string());
        out << content;
        if (!out.flush()) throw StorageUnavailable("flush of " + tmp.string() + " failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw StorageUnavailable("rename to " + path.string() + ": " + ec.message());
}

}  // namespace

json RunManifest::to_json() const {
    json statuses = json::object();
    for (const auto& [run_id, status] : run_status) {
        json entry{{"complete", status.complete}};
        if (!status.failure.empty()) entry["failure"] = status.failure;
        statuses[std::to_string(run_id)] = std::move(entry);
    }
    return json{{"experiment_id", experiment_id},
                {"fingerprint", fingerprint},
                {"created_at", created_at},
                {"tool_version", tool_version},
                {"config", config_snapshot},
                {"roster_order", roster_order},
                {"run_status", std::move(statuses)},
                {"sealed", sealed}};
}

RunManifest RunManifest::from_json(const json& j) {
    RunManifest manifest;
    manifest.experiment_id = j.value("experiment_id", "");
    manifest.fingerprint = j.value("fingerprint", "");
    manifest.created_at = j.value("created_at", "");
    manifest.tool_version = j.value("tool_version", "");
    manifest.config_snapshot = j.value("config", json::object());
    manifest.roster_order = j.value("roster_order", std::vector<std::string>{});
    if (j.contains("run_status"))
        for (const auto& [key, entry] : j.at("run_status").items())
            manifest.run_status[std::atoi(key.c_str())] =
                RunStatus{entry.value("complete", false), entry.value("failure", "")};
    manifest.sealed = j.value("sealed", false);
    return manifest;
}

Experiment Experiment::create(const std::string& fingerprint, const json& config_snapshot,
                              const std::vector<std::string>& roster_order,
                              const fs::path& root) {
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) throw StorageUnavailable("cannot create " + root.string() + ": " + ec.message());

    // Ids are "<fingerprint prefix>-NNN": identical configs share the prefix
    // but get fresh sequence numbers.
    const std::string prefix = fingerprint.substr(0, 12);
    int max_seq = 0;
    for (const auto& entry : fs::directory_iterator(root, ec)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind(prefix + "-", 0) == 0)
            max_seq = std::max(max_seq, std::atoi(name.substr(prefix.size() + 1).c_str()));
    }
    char id[64];
    std::snprintf(id, sizeof id, "%s-%03d", prefix.c_str(), max_seq + 1);

    Experiment experiment;
    experiment.dir_ = root / id;
    fs::create_directories(experiment.dir_ / "runs", ec);
    if (!ec) fs::create_directories(experiment.dir_ / "scores", ec);
    if (!ec) fs::create_directories(experiment.dir_ / "reports", ec);
    if (!ec) fs::create_directories(experiment.dir_ / "exports", ec);
    if (!ec) fs::create_directories(experiment.dir_ / "charts", ec);
    if (ec)
        throw StorageUnavailable("cannot create experiment layout under " +
                                 experiment.dir_.string() + ": " + ec.message());

    experiment.manifest_.experiment_id = id;
    experiment.manifest_.fingerprint = fingerprint;
    experiment.manifest_.created_at = utc_now_iso8601();
    experiment.manifest_.tool_version = kVersion;
    experiment.manifest_.config_snapshot = config_snapshot;
    experiment.manifest_.roster_order = roster_order;
    experiment.persist_manifest();
    return experiment;
}

Experiment Experiment::open(const fs::path& root, const std::string& id) {
    Experiment experiment;
    experiment.dir_ = root / id;
    std::ifstream in(experiment.dir_ / "manifest.json");
    if (!in) throw NotFound("no experiment \"" + id + "\" under " + root.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw CorruptArtifact("manifest.json of " + id + ": " + e.what());
    }
    experiment.manifest_ = RunManifest::from_json(j);
    return experiment;
}

void Experiment::persist_manifest() {
    write_file_atomically(dir_ / "manifest.json", manifest_.to_json().dump(2) + "\n");
}

json Experiment::statement_to_json(const Statement& statement) {
    return json{{"run", statement.run_id},
                {"phase", statement.phase.phase == Phase::Opening   ? "opening"
                          : statement.phase.phase == Phase::Round ? "round"
                                                                  : "closing"},
                {"round", statement.phase.round},
                {"agent", statement.agent_id},
                {"text", statement.text}};
}

Statement Experiment::statement_from_json(const json& j) {
    Statement statement;
    statement.run_id = j.at("run").get<int>();
    const std::string phase = j.at("phase").get<std::string>();
    if (phase == "opening") statement.phase = {Phase::Opening, 0};
    else if (phase == "round") statement.phase = {Phase::Round, j.at("round").get<int>()};
    else if (phase == "closing") statement.phase = {Phase::Closing, 0};
    else throw CorruptArtifact("unknown phase \"" + phase + "\"");
    statement.agent_id = j.at("agent").get<std::string>();
    statement.text = j.at("text").get<std::string>();
    if (statement.text.empty()) throw CorruptArtifact("statement with empty text");
    return statement;
}

json Experiment::score_to_json(const ScoreEntry& entry) {
    json j{{"run", entry.run_id},
           {"phase", entry.phase.phase == Phase::Opening   ? "opening"
                     : entry.phase.phase == Phase::Round ? "round"
                                                         : "closing"},
           {"round", entry.phase.round},
           {"agent", entry.agent_id},
           {"attempts", entry.attempts}};
    if (entry.score) j["score"] = *entry.score;
    else {
        j["score"] = nullptr;
        j["failure"] = entry.failure;
    }
    return j;
}

ScoreEntry Experiment::score_from_json(const json& j) {
    ScoreEntry entry;
    entry.run_id = j.at("run").get<int>();
    const std::string phase = j.at("phase").get<std::string>();
    if (phase == "opening") entry.phase = {Phase::Opening, 0};
    else if (phase == "round") entry.phase = {Phase::Round, j.at("round").get<int>()};
    else if (phase == "closing") entry.phase = {Phase::Closing, 0};
    else throw CorruptArtifact("unknown phase \"" + phase + "\"");
    entry.agent_id = j.at("agent").get<std::string>();
    entry.attempts = j.value("attempts", 1);
    if (j.contains("score") && !j.at("score").is_null()) entry.score = j.at("score").get<int>();
    entry.failure = j.value("failure", "");
    return entry;
}

void Experiment::append_statement(const Statement& statement) {
    {
        std::lock_guard lock(*manifest_mutex_);
        if (manifest_.sealed)
            throw SealedExperiment("experiment " + manifest_.experiment_id + " is sealed");
    }
    append_line_durably(run_file(statement.run_id), statement_to_json(statement).dump());
}

void Experiment::mark_run(int run_id, RunStatus status) {
    std::lock_guard lock(*manifest_mutex_);
    manifest_.run_status[run_id] = std::move(status);
    persist_manifest();
}

void Experiment::seal() {
    std::lock_guard lock(*manifest_mutex_);
    manifest_.sealed = true;
    persist_manifest();
}

std::filesystem::path Experiment::run_file(int run_id) const {
    return dir_ / "runs" / run_file_name(run_id);
}

std::filesystem::path Experiment::score_file(int run_id) const {
    return dir_ / "scores" / run_file_name(run_id);
}

namespace {

// Parses one JSON-lines file. A torn trailing line is tolerated when
// `allow_torn_tail` (the crash-interrupted in-flight record); everything else
// raises CorruptArtifact with its line number.
template <typename Row>
std::pair<std::vector<Row>, int> read_jsonl(const fs::path& path, bool allow_torn_tail,
                                            Row (*parse)(const json&)) {
    std::ifstream in(path);
    if (!in) throw StorageUnavailable("cannot open " + path.string());
    std::vector<Row> rows;
    std::string line;
    int line_number = 0;
    int dropped = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        bool ok = !j.is_discarded();
        Row row{};
        if (ok) {
            try {
                row = parse(j);
            } catch (const std::exception&) {
                ok = false;
            }
        }
        if (!ok) {
            if (allow_torn_tail && in.peek() == EOF) {
                ++dropped;
                break;
            }
            throw CorruptArtifact(path.filename().string() + " line " +
                                  std::to_string(line_number) + " is not a valid record");
        }
        rows.push_back(std::move(row));
    }
    return {std::move(rows), dropped};
}

}  // namespace

LoadedExperiment Experiment::load() const {
    LoadedExperiment loaded;
    loaded.manifest = manifest_;

    std::vector<fs::path> run_files;
    if (fs::exists(dir_ / "runs"))
        for (const auto& entry : fs::directory_iterator(dir_ / "runs"))
            if (entry.path().extension() == ".jsonl") run_files.push_back(entry.path());
    std::sort(run_files.begin(), run_files.end());

    for (const auto& path : run_files) {
        const int run_id = run_id_from_file_name(path.filename().string());
        const auto status = manifest_.run_status.find(run_id);
        const bool complete = status != manifest_.run_status.end() && status->second.complete;
        auto [statements, dropped] =
            read_jsonl<Statement>(path, !complete, &Experiment::statement_from_json);
        loaded.dropped_lines += dropped;
        Transcript transcript{manifest_.fingerprint, std::move(statements)};
        loaded.transcripts.push_back(std::move(transcript));
    }

    std::vector<fs::path> score_files;
    if (fs::exists(dir_ / "scores"))
        for (const auto& entry : fs::directory_iterator(dir_ / "scores"))
            if (entry.path().extension() == ".jsonl") score_files.push_back(entry.path());
    std::sort(score_files.begin(), score_files.end());
    if (!score_files.empty()) {
        AttitudeSeries series;
        for (const auto& path : score_files) {
            auto [entries, dropped] =
                read_jsonl<ScoreEntry>(path, false, &Experiment::score_from_json);
            (void)dropped;
            for (auto& entry : entries) {
                series.rounds = std::max(series.rounds, entry.phase.round);
                series.entries.push_back(std::move(entry));
            }
        }
        if (manifest_.config_snapshot.contains("protocol"))
            series.rounds = manifest_.config_snapshot["protocol"].value("rounds", series.rounds);
        loaded.series = std::move(series);
    }

    const fs::path report_path = dir_ / "reports" / "analysis.json";
    if (fs::exists(report_path)) {
        std::ifstream in(report_path);
        json j = json::parse(in, nullptr, false);
        if (j.is_discarded()) throw CorruptArtifact("reports/analysis.json is not valid JSON");
        loaded.report = std::move(j);
    }

    int configured_runs = 0;
    if (manifest_.config_snapshot.contains("protocol"))
        configured_runs = manifest_.config_snapshot["protocol"].value("runs", 0);
    int settled = 0;
    for (const auto& [run_id, status] : manifest_.run_status)
        if (status.complete || !status.failure.empty()) ++settled;
    loaded.resumable = !manifest_.sealed && settled < configured_runs;
    return loaded;
}

void Experiment::write_series(const AttitudeSeries& series) {
    std::map<int, std::string> by_run;
    for (const auto& entry : series.entries)
        by_run[entry.run_id] += score_to_json(entry).dump() + "\n";
    for (const auto& [run_id, content] : by_run)
        write_file_atomically(score_file(run_id), content);
}

void Experiment::write_report(const json& report) {
    write_file_atomically(dir_ / "reports" / "analysis.json", report.dump(2) + "\n");
}

void Experiment::write_export(const std::string& name, const std::string& csv) {
    write_file_atomically(dir_ / "exports" / name, csv);
}

void Experiment::write_chart(const std::string& name, const std::string& svg) {
    write_file_atomically(dir_ / "charts" / name, svg);
}

Experiment open_experiment(const std::string& fingerprint, const json& config_snapshot,
                           const std::vector<std::string>& roster_order, const fs::path& root) {
    return Experiment::create(fingerprint, config_snapshot, roster_order, root);
}

LoadedExperiment load_experiment(const fs::path& root, const std::string& id) {
    return Experiment::open(root, id).load();
}

std::vector<std::string> list_experiments(const fs::path& root) {
    std::vector<std::string> ids;
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(root, ec))
        if (entry.is_directory() && fs::exists(entry.path() / "manifest.json"))
            ids.push_back(entry.path().filename().string());
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace agora
