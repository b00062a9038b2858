#include "agora/chat.hpp"

namespace agora {

const char* to_string(Role role) {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

Role role_from_string(const std::string& s) {
    if (s == "system") return Role::System;
    if (s == "user") return Role::User;
    if (s == "assistant") return Role::Assistant;
    throw InvalidRequest("unknown chat role: " + s);
}

void ChatRequest::validate() const {
    if (messages.empty()) throw InvalidRequest("request has no messages");
    for (std::size_t i = 0; i < messages.size(); ++i) {
        if (messages[i].content.empty())
            throw InvalidRequest("message " + std::to_string(i) + " has empty content");
        if (messages[i].role == Role::System && i != 0)
            throw InvalidRequest("system message only allowed at position 0");
    }
    if (temperature && (*temperature < 0.0 || *temperature > 2.0))
        throw InvalidRequest("temperature outside [0,2]");
    if (max_tokens && *max_tokens <= 0) throw InvalidRequest("max_tokens must be positive");
}

std::string ChatRequest::joined_text() const {
    std::string joined;
    for (const auto& message : messages) {
        if (!joined.empty()) joined += '\n';
        joined += message.content;
    }
    return joined;
}

}  // namespace agora
