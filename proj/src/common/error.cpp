#include "common/error.hpp"

namespace chatvis {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::RootNotFound: return "RootNotFound";
        case Errc::UnreadableFile: return "UnreadableFile";
        case Errc::EmptyText: return "EmptyText";
        case Errc::ProviderUnavailable: return "ProviderUnavailable";
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::IoFailure: return "IoFailure";
        case Errc::CorruptIndex: return "CorruptIndex";
        case Errc::EmbedderMismatch: return "EmbedderMismatch";
        case Errc::EndpointUnreachable: return "EndpointUnreachable";
        case Errc::AuthFailure: return "AuthFailure";
        case Errc::RateLimited: return "RateLimited";
        case Errc::TranscriptMiss: return "TranscriptMiss";
        case Errc::MalformedProviderResponse: return "MalformedProviderResponse";
        case Errc::NoOperations: return "NoOperations";
        case Errc::UnresolvedChunk: return "UnresolvedChunk";
        case Errc::EmptyReply: return "EmptyReply";
        case Errc::InterpreterNotFound: return "InterpreterNotFound";
        case Errc::WorkDirUnwritable: return "WorkDirUnwritable";
        case Errc::ShapeMismatch: return "ShapeMismatch";
        case Errc::TooSmall: return "TooSmall";
        case Errc::PluginMissing: return "PluginMissing";
        case Errc::PluginMalformedOutput: return "PluginMalformedOutput";
        case Errc::EmptyInput: return "EmptyInput";
        case Errc::ManifestInvalid: return "ManifestInvalid";
        case Errc::MissingAsset: return "MissingAsset";
    }
    return "Unknown";
}

}  // namespace chatvis
