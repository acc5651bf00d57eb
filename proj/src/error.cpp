#include "lokg/error.hpp"

namespace lokg {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::SchemaError: return "SchemaError";
        case ErrorCode::LevelViolation: return "LevelViolation";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::EmptyText: return "EmptyText";
        case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
        case ErrorCode::ProviderError: return "ProviderError";
        case ErrorCode::UnsupportedPair: return "UnsupportedPair";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::EmptyTitle: return "EmptyTitle";
        case ErrorCode::EmptyDescription: return "EmptyDescription";
        case ErrorCode::EmptyTopicSet: return "EmptyTopicSet";
        case ErrorCode::ProviderTagMismatch: return "ProviderTagMismatch";
        case ErrorCode::LevelNotEnabled: return "LevelNotEnabled";
        case ErrorCode::DanglingReference: return "DanglingReference";
        case ErrorCode::NotAJourney: return "NotAJourney";
        case ErrorCode::EmptyGraph: return "EmptyGraph";
        case ErrorCode::PartitionMismatch: return "PartitionMismatch";
        case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
        case ErrorCode::BadPivotCount: return "BadPivotCount";
        case ErrorCode::JourneyTooSmall: return "JourneyTooSmall";
        case ErrorCode::NoSemanticEdges: return "NoSemanticEdges";
        case ErrorCode::UndefinedJourneySimilarity: return "UndefinedJourneySimilarity";
        case ErrorCode::ConfigError: return "ConfigError";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

}  // namespace lokg
