#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace varietyir {

enum class ErrorCode {
    IoFailure,
    MalformedRecord,
    DuplicateId,
    NegativeGrade,
    NonContiguousRanks,
    UnsortedRanking,
    SyntaxError,
    EmptyLhs,
    NoOpRule,
    DuplicateLexiconKey,
    EmptyPool,
    InvalidArgument,
    EmptyCollection,
    EmptyToken,
    EmptyText,
    DegenerateEmbedding,
    DimensionMismatch,
    StaleEncodings,
    UnknownDocId,
    NoPositives,
    NonFiniteLoss,
    QuerySetMismatch,
    ConfigInvalid,
    MissingTrainedParams,
    PairNotUnseen,
    FamilyOverlap,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `record()` carries the 1-based
/// line/record index for parse errors.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::optional<std::size_t> record = std::nullopt);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    [[nodiscard]] std::optional<std::size_t> record() const noexcept { return record_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> record_;
};

}  // namespace varietyir
