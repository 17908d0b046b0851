#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mwer {

enum class ErrorCode {
    UnbalancedBrace,
    NestedBlock,
    WildcardInsideBlock,
    EmptyAnnotation,
    BlockEmptiedByStrictMode,
    WildcardInHypothesis,
    EmptyFlatView,
    EmptyCorpus,
    OverlappingBusyIntervals,
    MultiThreadedSessionDetected,
    SystemStalled,
    EmptyInput,
    InvalidInput,
};

std::string_view error_name(ErrorCode code);

// Byte range into the text that caused an error.
struct Span {
    std::size_t offset = 0;
    std::size_t length = 0;
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::optional<Span> span = std::nullopt);

    ErrorCode code() const noexcept { return code_; }
    const std::optional<Span>& span() const noexcept { return span_; }

private:
    ErrorCode code_;
    std::optional<Span> span_;
};

} // namespace mwer
