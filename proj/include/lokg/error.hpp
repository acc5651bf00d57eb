#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lokg {

enum class ErrorCode {
    InvalidArgument,
    SchemaError,
    LevelViolation,
    DuplicateId,
    EmptyText,
    ProviderUnavailable,
    ProviderError,
    UnsupportedPair,
    DimensionMismatch,
    EmptyTitle,
    EmptyDescription,
    EmptyTopicSet,
    ProviderTagMismatch,
    LevelNotEnabled,
    DanglingReference,
    NotAJourney,
    EmptyGraph,
    PartitionMismatch,
    NonPositiveWeight,
    BadPivotCount,
    JourneyTooSmall,
    NoSemanticEdges,
    UndefinedJourneySimilarity,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch without parsing text.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace lokg
