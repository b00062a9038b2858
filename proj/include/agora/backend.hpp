#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "agora/chat.hpp"

namespace agora {

enum class BackendKind { Http, Scripted };

/// One canned reply of a scripted backend. `delay_ms` simulates inference
/// latency (useful for pacing and crash-tolerance tests).
struct ScriptedResponse {
    std::string text;
    int delay_ms = 0;
};

/// Fixture for the scripted backend: request_tag -> FIFO queue of replies.
/// The reserved tag "*" answers any tag that has no queue of its own. With
/// `cycle`, an exhausted queue restarts from its first entry instead of
/// raising ScriptExhausted.
struct Script {
    std::map<std::string, std::vector<ScriptedResponse>> responses;
    bool cycle = false;

    static Script from_json(const nlohmann::json& j);
    static Script from_file(const std::filesystem::path& path);
    nlohmann::json to_json() const;
};

struct BackendSpec {
    std::string name;  // handle used by config files and logs
    BackendKind kind = BackendKind::Scripted;
    std::string model_id;
    std::string endpoint;  // http only: scheme://host:port[/prefix]
    Script script;         // scripted only
    std::chrono::milliseconds timeout{120000};
    int retry_budget = 2;
    std::optional<double> temperature = 0.35;  // nullopt = server default
    std::optional<int> max_tokens;             // nullopt = unlimited
    std::string bearer_token;

    void validate() const;
};

struct HealthReport {
    bool reachable = false;
    std::optional<bool> model_available;
    std::string detail;
};

/// Runtime handle over a BackendSpec. Immutable configuration; the scripted
/// consumption cursors and the request log are serialized behind a mutex so
/// the handle can be shared across threads.
class Backend {
public:
    explicit Backend(BackendSpec spec);

    const BackendSpec& spec() const { return spec_; }

    /// Performs the chat completion. Scripted replies are a pure function of
    /// (request_tag, per-tag consumption order). HTTP completions retry on
    /// stalls with fresh connections, up to retry_budget extra attempts.
    ChatResponse complete(const ChatRequest& request);

    /// Non-mutating reachability probe; failures are encoded in the report.
    HealthReport healthcheck() const;

    /// Every request seen so far, in arrival order.
    std::vector<ChatRequest> request_log() const;

private:
    ChatResponse complete_scripted(const ChatRequest& request);
    ChatResponse complete_http(const ChatRequest& request);

    BackendSpec spec_;
    mutable std::mutex mutex_;
    std::map<std::string, std::size_t> cursors_;
    std::vector<ChatRequest> log_;
};

ChatResponse complete_chat(Backend& backend, const ChatRequest& request);
HealthReport healthcheck(const Backend& backend);

}  // namespace agora
