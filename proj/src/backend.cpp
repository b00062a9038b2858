#include "agora/backend.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace agora {

using nlohmann::json;

namespace {

bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

ScriptedResponse scripted_response_from_json(const json& j) {
    ScriptedResponse response;
    if (j.is_string()) {
        response.text = j.get<std::string>();
    } else if (j.is_object()) {
        response.text = j.value("text", "");
        response.delay_ms = j.value("delay_ms", 0);
    } else {
        throw ConfigError("script response must be a string or {text, delay_ms} object");
    }
    return response;
}

// Splits "http://host:port/prefix" into the client base and the path prefix.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
    const auto scheme_end = endpoint.find("://");
    const auto path_start =
        endpoint.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) return {endpoint, ""};
    std::string prefix = endpoint.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {endpoint.substr(0, path_start), prefix};
}

}  // namespace

Script Script::from_json(const json& j) {
    Script script;
    if (!j.is_object() || !j.contains("responses") || !j.at("responses").is_object())
        throw ConfigError("script file must be an object with a \"responses\" map");
    for (const auto& [tag, queue] : j.at("responses").items()) {
        if (!queue.is_array()) throw ConfigError("script responses for tag \"" + tag +
                                                 "\" must be an array");
        auto& entries = script.responses[tag];
        for (const auto& entry : queue) entries.push_back(scripted_response_from_json(entry));
    }
    script.cycle = j.value("cycle", false);
    return script;
}

Script Script::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open script file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("script file " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

json Script::to_json() const {
    json queues = json::object();
    for (const auto& [tag, queue] : responses) {
        json entries = json::array();
        for (const auto& response : queue)
            entries.push_back({{"text", response.text}, {"delay_ms", response.delay_ms}});
        queues[tag] = std::move(entries);
    }
    return json{{"responses", std::move(queues)}, {"cycle", cycle}};
}

void BackendSpec::validate() const {
    if (kind == BackendKind::Http && endpoint.empty())
        throw ConfigError("http backend \"" + name + "\" requires an endpoint");
    if (kind == BackendKind::Scripted && script.responses.empty())
        throw ConfigError("scripted backend \"" + name + "\" requires a script");
    if (retry_budget < 0) throw ConfigError("backend \"" + name + "\": negative retry budget");
    if (temperature && (*temperature < 0.0 || *temperature > 2.0))
        throw ConfigError("backend \"" + name + "\": temperature outside [0,2]");
    if (max_tokens && *max_tokens <= 0)
        throw ConfigError("backend \"" + name + "\": max_tokens must be positive");
}

Backend::Backend(BackendSpec spec) : spec_(std::move(spec)) { spec_.validate(); }

ChatResponse Backend::complete(const ChatRequest& request) {
    request.validate();
    {
        std::lock_guard lock(mutex_);
        log_.push_back(request);
    }
    return spec_.kind == BackendKind::Scripted ? complete_scripted(request)
                                               : complete_http(request);
}

ChatResponse Backend::complete_scripted(const ChatRequest& request) {
    ScriptedResponse scripted;
    {
        std::lock_guard lock(mutex_);
        auto it = spec_.script.responses.find(request.request_tag);
        if (it == spec_.script.responses.end() || it->second.empty())
            it = spec_.script.responses.find("*");
        if (it == spec_.script.responses.end() || it->second.empty())
            throw ScriptExhausted("no scripted response for tag \"" + request.request_tag + "\"");

        const auto& queue = it->second;
        std::size_t index = cursors_[it->first]++;
        if (index >= queue.size()) {
            if (!spec_.script.cycle)
                throw ScriptExhausted("script exhausted for tag \"" + it->first + "\" after " +
                                      std::to_string(queue.size()) + " responses");
            index %= queue.size();
        }
        scripted = queue[index];
    }
    if (scripted.delay_ms > 0)
        std::this_thread::sleep_for(std::chrono::milliseconds(scripted.delay_ms));
    if (is_blank(scripted.text))
        throw MalformedBackendReply("scripted reply for tag \"" + request.request_tag +
                                    "\" is empty");
    return ChatResponse{scripted.text, std::chrono::milliseconds(scripted.delay_ms), 1};
}

ChatResponse Backend::complete_http(const ChatRequest& request) {
    const auto [base, prefix] = split_endpoint(spec_.endpoint);

    json body{{"model", request.model_id.empty() ? spec_.model_id : request.model_id},
              {"stream", false}};
    json messages = json::array();
    for (const auto& message : request.messages)
        messages.push_back({{"role", to_string(message.role)}, {"content", message.content}});
    body["messages"] = std::move(messages);
    if (request.temperature) body["temperature"] = *request.temperature;
    if (request.max_tokens) body["max_tokens"] = *request.max_tokens;

    const int attempts_allowed = spec_.retry_budget + 1;
    const auto started = std::chrono::steady_clock::now();
    std::string last_error;

    for (int attempt = 1; attempt <= attempts_allowed; ++attempt) {
        // Fresh connection per attempt so a stalled socket cannot poison the
        // retry.
        httplib::Client client(base);
        client.set_connection_timeout(spec_.timeout);
        client.set_read_timeout(spec_.timeout);
        client.set_write_timeout(spec_.timeout);
        httplib::Headers headers;
        if (!spec_.bearer_token.empty())
            headers.emplace("Authorization", "Bearer " + spec_.bearer_token);

        auto result = client.Post(prefix + "/v1/chat/completions", headers, body.dump(),
                                  "application/json");
        if (!result) {
            last_error = httplib::to_string(result.error());
            continue;  // stall or connection failure: retry
        }
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - started);
        if (result->status != 200)
            throw MalformedBackendReply("backend \"" + spec_.name + "\" returned HTTP " +
                                        std::to_string(result->status));
        json reply = json::parse(result->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty() ||
            !reply["choices"][0].contains("message"))
            throw MalformedBackendReply("backend \"" + spec_.name +
                                        "\" reply is not a chat completion");
        std::string content = reply["choices"][0]["message"].value("content", "");
        if (is_blank(content))
            throw MalformedBackendReply("backend \"" + spec_.name + "\" returned an empty reply");
        return ChatResponse{std::move(content), elapsed, attempt};
    }
    throw TimeoutExceeded("backend \"" + spec_.name + "\" stalled after " +
                          std::to_string(attempts_allowed) + " attempts (" + last_error + ")");
}

HealthReport Backend::healthcheck() const {
    if (spec_.kind == BackendKind::Scripted)
        return HealthReport{true, true, "scripted backend"};

    const auto [base, prefix] = split_endpoint(spec_.endpoint);
    httplib::Client client(base);
    client.set_connection_timeout(spec_.timeout);
    client.set_read_timeout(spec_.timeout);
    httplib::Headers headers;
    if (!spec_.bearer_token.empty())
        headers.emplace("Authorization", "Bearer " + spec_.bearer_token);

    auto result = client.Get(prefix + "/v1/models", headers);
    if (!result)
        return HealthReport{false, std::nullopt,
                            "unreachable: " + httplib::to_string(result.error())};
    if (result->status != 200)
        return HealthReport{false, std::nullopt, "HTTP " + std::to_string(result->status)};

    json reply = json::parse(result->body, nullptr, false);
    if (reply.is_discarded())
        return HealthReport{false, std::nullopt, "model list is not valid JSON"};

    HealthReport report{true, std::nullopt, "ok"};
    if (!spec_.model_id.empty() && reply.contains("data") && reply["data"].is_array()) {
        bool found = false;
        for (const auto& model : reply["data"])
            if (model.value("id", "") == spec_.model_id) found = true;
        report.model_available = found;
        if (!found) report.detail = "model \"" + spec_.model_id + "\" not listed";
    }
    return report;
}

std::vector<ChatRequest> Backend::request_log() const {
    std::lock_guard lock(mutex_);
    return log_;
}

ChatResponse complete_chat(Backend& backend, const ChatRequest& request) {
    return backend.complete(request);
}

HealthReport healthcheck(const Backend& backend) { return backend.healthcheck(); }

}  // namespace agora
