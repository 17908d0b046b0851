#include "mwer/annotation.hpp"

#include "mwer/error.hpp"
#include "mwer/utf8.hpp"

#include <algorithm>
#include <iterator>
#include <optional>

namespace mwer {

namespace {

constexpr std::string_view wildcard_symbol = "<*>";

bool is_punct(char32_t cp, const TokenizerConfig& config)
{
    return config.punctuation.find(cp) != std::u32string::npos;
}

std::optional<Token> make_token(std::u32string_view fragment, const TokenizerConfig& config)
{
    std::size_t begin = 0;
    std::size_t end = fragment.size();
    while (begin < end && is_punct(fragment[begin], config)) {
        ++begin;
    }
    while (end > begin && is_punct(fragment[end - 1], config)) {
        --end;
    }
    if (begin == end) {
        return std::nullopt;
    }
    std::u32string text(fragment.substr(begin, end - begin));
    if (config.lowercase) {
        for (char32_t& cp : text) {
            cp = utf8::to_lower(cp);
        }
    }
    return Token(utf8::encode(text), utf8::encode(fragment));
}

Option parse_option(std::string_view raw, const TokenizerConfig& config)
{
    Option option;
    std::size_t i = 0;
    while (i < raw.size() && (raw[i] == ' ' || raw[i] == '\t' || raw[i] == '\n' || raw[i] == '\r')) {
        ++i;
    }
    if (i < raw.size() && raw[i] == '~') {
        option.strict_violation = true;
        ++i;
    }
    option.tokens = tokenize(raw.substr(i), config);
    if (option.tokens.empty()) {
        option.strict_violation = false;
    }
    return option;
}

BlockSegment finish_block(std::vector<Option> options)
{
    BlockSegment block;
    bool has_empty = false;
    for (auto& option : options) {
        if (option.empty()) {
            if (has_empty) {
                continue;
            }
            has_empty = true;
        }
        block.options.push_back(std::move(option));
    }
    if (block.options.size() == 1 && !has_empty) {
        block.options.emplace_back();
    }
    return block;
}

void append_plain(std::vector<Segment>& segments, std::string_view text, const TokenizerConfig& config)
{
    for (auto& token : tokenize(text, config)) {
        segments.emplace_back(PlainSegment{std::move(token)});
    }
}

} // namespace

std::string_view mode_name(Mode mode)
{
    return mode == Mode::Strict ? "strict" : "permissive";
}

Mode parse_mode(std::string_view name)
{
    if (name == "strict") {
        return Mode::Strict;
    }
    if (name == "permissive") {
        return Mode::Permissive;
    }
    throw Error(ErrorCode::InvalidInput, "unknown mode '" + std::string(name) + "'");
}

bool is_wildcard_text(std::string_view text)
{
    return text == wildcard_symbol;
}

std::vector<Token> tokenize(std::string_view text, const TokenizerConfig& config)
{
    std::vector<Token> tokens;
    const std::u32string cps = utf8::decode(text);
    std::size_t i = 0;
    while (i < cps.size()) {
        while (i < cps.size() && utf8::is_space(cps[i])) {
            ++i;
        }
        const std::size_t start = i;
        while (i < cps.size() && !utf8::is_space(cps[i])) {
            ++i;
        }
        if (i > start) {
            if (auto token = make_token(std::u32string_view(cps).substr(start, i - start), config)) {
                tokens.push_back(std::move(*token));
            }
        }
    }
    return tokens;
}

Annotation parse_annotation(std::string_view text, const TokenizerConfig& config)
{
    Annotation annotation;
    annotation.source_text = std::string(text);
    auto& segments = annotation.segments;

    std::size_t plain_start = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        if (text.substr(pos, wildcard_symbol.size()) == wildcard_symbol) {
            append_plain(segments, text.substr(plain_start, pos - plain_start), config);
            segments.emplace_back(WildcardSegment{});
            pos += wildcard_symbol.size();
            plain_start = pos;
            continue;
        }
        const char c = text[pos];
        if (c == '}') {
            throw Error(ErrorCode::UnbalancedBrace, "'}' without matching '{' at byte " + std::to_string(pos),
                        Span{pos, 1});
        }
        if (c != '{') {
            ++pos;
            continue;
        }

        append_plain(segments, text.substr(plain_start, pos - plain_start), config);
        const std::size_t open = pos;
        std::vector<Option> options;
        std::size_t option_start = pos + 1;
        ++pos;
        bool closed = false;
        while (pos < text.size()) {
            if (text.substr(pos, wildcard_symbol.size()) == wildcard_symbol) {
                throw Error(ErrorCode::WildcardInsideBlock,
                            "wildcard inside block starting at byte " + std::to_string(open), Span{pos, 3});
            }
            const char d = text[pos];
            if (d == '{') {
                throw Error(ErrorCode::NestedBlock,
                            "nested '{' at byte " + std::to_string(pos) + " inside block starting at byte "
                                + std::to_string(open),
                            Span{pos, 1});
            }
            if (d == '|' || d == '}') {
                options.push_back(parse_option(text.substr(option_start, pos - option_start), config));
                option_start = pos + 1;
                if (d == '}') {
                    closed = true;
                    ++pos;
                    break;
                }
            }
            ++pos;
        }
        if (!closed) {
            throw Error(ErrorCode::UnbalancedBrace,
                        "unclosed '{' at byte " + std::to_string(open) + ": '"
                            + std::string(text.substr(open, std::min<std::size_t>(text.size() - open, 40))) + "'",
                        Span{open, text.size() - open});
        }
        segments.emplace_back(finish_block(std::move(options)));
        plain_start = pos;
    }
    append_plain(segments, text.substr(plain_start), config);

    if (segments.empty()) {
        throw Error(ErrorCode::EmptyAnnotation, "annotation has no words, blocks or wildcards",
                    Span{0, text.size()});
    }
    return annotation;
}

std::string serialize(const Annotation& annotation)
{
    std::string out;
    auto join_tokens = [&out](const std::vector<Token>& tokens) {
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (i > 0) {
                out += ' ';
            }
            out += tokens[i].text;
        }
    };
    for (std::size_t s = 0; s < annotation.segments.size(); ++s) {
        if (s > 0) {
            out += ' ';
        }
        const Segment& segment = annotation.segments[s];
        if (const auto* plain = std::get_if<PlainSegment>(&segment)) {
            out += plain->token.text;
        } else if (const auto* block = std::get_if<BlockSegment>(&segment)) {
            out += '{';
            for (std::size_t o = 0; o < block->options.size(); ++o) {
                if (o > 0) {
                    out += '|';
                }
                if (block->options[o].strict_violation) {
                    out += '~';
                }
                join_tokens(block->options[o].tokens);
            }
            out += '}';
        } else {
            out += wildcard_symbol;
        }
    }
    return out;
}

Annotation apply_mode(const Annotation& annotation, Mode mode)
{
    if (mode == Mode::Permissive) {
        return annotation;
    }
    Annotation out;
    out.source_text = annotation.source_text;
    out.segments.reserve(annotation.segments.size());
    for (std::size_t s = 0; s < annotation.segments.size(); ++s) {
        const Segment& segment = annotation.segments[s];
        const auto* block = std::get_if<BlockSegment>(&segment);
        if (block == nullptr) {
            out.segments.push_back(segment);
            continue;
        }
        BlockSegment kept;
        std::copy_if(block->options.begin(), block->options.end(), std::back_inserter(kept.options),
                     [](const Option& option) { return !option.strict_violation; });
        if (kept.options.empty()) {
            throw Error(ErrorCode::BlockEmptiedByStrictMode,
                        "block #" + std::to_string(s) + " has only '~' options");
        }
        out.segments.emplace_back(std::move(kept));
    }
    return out;
}

std::size_t first_option_length(const Annotation& annotation)
{
    std::size_t n = 0;
    for (const auto& segment : annotation.segments) {
        if (std::holds_alternative<PlainSegment>(segment)) {
            ++n;
        } else if (const auto* block = std::get_if<BlockSegment>(&segment)) {
            n += block->options.front().tokens.size();
        }
    }
    return n;
}

} // namespace mwer
