#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chatvis {

// Every failure the core can report. The C API maps these onto cv_status.
enum class Errc {
    InvalidArgument,
    RootNotFound,
    UnreadableFile,
    EmptyText,
    ProviderUnavailable,
    DimensionMismatch,
    IoFailure,
    CorruptIndex,
    EmbedderMismatch,
    EndpointUnreachable,
    AuthFailure,
    RateLimited,
    TranscriptMiss,
    MalformedProviderResponse,
    NoOperations,
    UnresolvedChunk,
    EmptyReply,
    InterpreterNotFound,
    WorkDirUnwritable,
    ShapeMismatch,
    TooSmall,
    PluginMissing,
    PluginMalformedOutput,
    EmptyInput,
    ManifestInvalid,
    MissingAsset,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

// Rate-limit errors carry the provider's suggested wait.
class RateLimitedError : public Error {
public:
    RateLimitedError(const std::string& message, double retry_after_seconds)
        : Error(Errc::RateLimited, message), retry_after_(retry_after_seconds) {}

    double retry_after() const noexcept { return retry_after_; }

private:
    double retry_after_;
};

}  // namespace chatvis
