#include "mwer/error.hpp"

namespace mwer {

std::string_view error_name(ErrorCode code)
{
    switch (code) {
    case ErrorCode::UnbalancedBrace: return "UnbalancedBrace";
    case ErrorCode::NestedBlock: return "NestedBlock";
    case ErrorCode::WildcardInsideBlock: return "WildcardInsideBlock";
    case ErrorCode::EmptyAnnotation: return "EmptyAnnotation";
    case ErrorCode::BlockEmptiedByStrictMode: return "BlockEmptiedByStrictMode";
    case ErrorCode::WildcardInHypothesis: return "WildcardInHypothesis";
    case ErrorCode::EmptyFlatView: return "EmptyFlatView";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::OverlappingBusyIntervals: return "OverlappingBusyIntervals";
    case ErrorCode::MultiThreadedSessionDetected: return "MultiThreadedSessionDetected";
    case ErrorCode::SystemStalled: return "SystemStalled";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidInput: return "InvalidInput";
    }
    return "Unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::string& message)
{
    std::string out(error_name(code));
    if (!message.empty()) {
        out += ": ";
        out += message;
    }
    return out;
}

} // namespace

Error::Error(ErrorCode code, const std::string& message, std::optional<Span> span)
    : std::runtime_error(format_message(code, message)), code_(code), span_(span)
{
}

} // namespace mwer
