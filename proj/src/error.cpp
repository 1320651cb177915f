#include "varietyir/error.hpp"

namespace varietyir {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::MalformedRecord: return "MalformedRecord";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::NegativeGrade: return "NegativeGrade";
        case ErrorCode::NonContiguousRanks: return "NonContiguousRanks";
        case ErrorCode::UnsortedRanking: return "UnsortedRanking";
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::EmptyLhs: return "EmptyLhs";
        case ErrorCode::NoOpRule: return "NoOpRule";
        case ErrorCode::DuplicateLexiconKey: return "DuplicateLexiconKey";
        case ErrorCode::EmptyPool: return "EmptyPool";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::EmptyCollection: return "EmptyCollection";
        case ErrorCode::EmptyToken: return "EmptyToken";
        case ErrorCode::EmptyText: return "EmptyText";
        case ErrorCode::DegenerateEmbedding: return "DegenerateEmbedding";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::StaleEncodings: return "StaleEncodings";
        case ErrorCode::UnknownDocId: return "UnknownDocId";
        case ErrorCode::NoPositives: return "NoPositives";
        case ErrorCode::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorCode::QuerySetMismatch: return "QuerySetMismatch";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::MissingTrainedParams: return "MissingTrainedParams";
        case ErrorCode::PairNotUnseen: return "PairNotUnseen";
        case ErrorCode::FamilyOverlap: return "FamilyOverlap";
    }
    return "Unknown";
}

namespace {
std::string decorate(ErrorCode code, const std::string& message, std::optional<std::size_t> record) {
    std::string out(to_string(code));
    if (record) out += " at record " + std::to_string(*record);
    out += ": " + message;
    return out;
}
}  // namespace

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> record)
    : std::runtime_error(decorate(code, message, record)), code_(code), record_(record) {}

}  // namespace varietyir
