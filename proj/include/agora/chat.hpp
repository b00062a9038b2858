#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "agora/errors.hpp"

namespace agora {

enum class Role { System, User, Assistant };

const char* to_string(Role role);
Role role_from_string(const std::string& s);

/// One turn of a chat conversation sent to a completion backend.
struct ChatMessage {
    Role role = Role::User;
    std::string content;
};

/// A chat-completion call. `request_tag` keys scripted fixtures and logs;
/// it never reaches an HTTP server.
struct ChatRequest {
    std::string model_id;
    std::vector<ChatMessage> messages;
    std::optional<double> temperature;  // nullopt = use the server's default
    std::optional<int> max_tokens;      // nullopt = unlimited
    std::string request_tag;

    /// Throws InvalidRequest unless: messages non-empty, every content
    /// non-empty, temperature (when set) in [0,2], max_tokens (when set) > 0,
    /// and a system message appears at most once and only at position 0.
    void validate() const;

    /// All message contents joined in order (prompt auditing, token estimates).
    std::string joined_text() const;
};

struct ChatResponse {
    std::string content;
    std::chrono::milliseconds backend_latency{0};
    int attempt_count = 1;
};

}  // namespace agora
