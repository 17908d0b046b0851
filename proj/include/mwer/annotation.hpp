#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mwer {

/// One alignment element. `text` is the normalized form used for matching,
/// `original` keeps the surface fragment it came from.
struct Token {
    std::string text;
    std::string original;

    Token() = default;
    explicit Token(std::string text_) : text(text_), original(std::move(text_)) {}
    Token(std::string text_, std::string original_)
        : text(std::move(text_)), original(std::move(original_)) {}

    // Only the normalized text takes part in comparison.
    friend bool operator==(const Token& a, const Token& b) { return a.text == b.text; }
};

struct Option {
    std::vector<Token> tokens;
    bool strict_violation = false; // written with a leading '~'

    bool empty() const { return tokens.empty(); }
    friend bool operator==(const Option&, const Option&) = default;
};

struct PlainSegment {
    Token token;
    friend bool operator==(const PlainSegment&, const PlainSegment&) = default;
};

struct BlockSegment {
    std::vector<Option> options;
    friend bool operator==(const BlockSegment&, const BlockSegment&) = default;
};

struct WildcardSegment {
    friend bool operator==(const WildcardSegment&, const WildcardSegment&) = default;
};

using Segment = std::variant<PlainSegment, BlockSegment, WildcardSegment>;

struct Annotation {
    std::vector<Segment> segments;
    std::string source_text;

    // Structural equality; the source text is not compared.
    friend bool operator==(const Annotation& a, const Annotation& b) { return a.segments == b.segments; }
};

struct TokenizerConfig {
    bool lowercase = true;
    // Stripped from both ends of every whitespace-separated fragment.
    std::u32string punctuation = U".,!?;:\"«»()[]…{}|";
};

enum class Mode { Strict, Permissive };

std::string_view mode_name(Mode mode);
Mode parse_mode(std::string_view name);

std::vector<Token> tokenize(std::string_view text, const TokenizerConfig& config = {});

// Throws mwer::Error with UnbalancedBrace, NestedBlock, WildcardInsideBlock or
// EmptyAnnotation; the error span points at the offending bytes.
Annotation parse_annotation(std::string_view text, const TokenizerConfig& config = {});

std::string serialize(const Annotation& annotation);

Annotation apply_mode(const Annotation& annotation, Mode mode);

// Number of reference tokens (wildcards excluded) if every block takes its
// first option.
std::size_t first_option_length(const Annotation& annotation);

bool is_wildcard_text(std::string_view text);

} // namespace mwer
