#pragma once

#include <stdexcept>
#include <string>

namespace agora {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// --- gateway ---
struct InvalidRequest : Error { using Error::Error; };
struct TimeoutExceeded : Error { using Error::Error; };
struct MalformedBackendReply : Error { using Error::Error; };
struct ScriptExhausted : Error { using Error::Error; };

// --- catalog / templates ---
struct UnknownTopic : Error { using Error::Error; };
struct PreconditionViolation : Error { using Error::Error; };

// --- debate ---
struct ContextOverflow : Error { using Error::Error; };

// --- judge ---
struct UnparseableScore : Error { using Error::Error; };
struct OutOfRangeScore : Error { using Error::Error; };

// --- analytics ---
struct NoData : Error { using Error::Error; };
struct InsufficientPoints : Error { using Error::Error; };
struct MissingTrajectory : Error { using Error::Error; };
struct DegenerateInput : Error { using Error::Error; };

// --- storage ---
struct StorageUnavailable : Error { using Error::Error; };
struct SealedExperiment : Error { using Error::Error; };
struct NotFound : Error { using Error::Error; };
struct CorruptArtifact : Error { using Error::Error; };

/// Configuration file rejection; the message names the offending key path.
struct ConfigError : Error { using Error::Error; };

}  // namespace agora
