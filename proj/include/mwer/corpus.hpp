#pragma once

#include "mwer/json_io.hpp"
#include "mwer/streaming.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mwer {

inline constexpr int corpus_version = 1;

/// One JSONL line: {"v":1, "id", "annotation", "hypotheses": {name: text},
/// "timed_words"?: [...] or path, "session_history"?: path}. Relative paths
/// resolve against the corpus file's directory.
struct CorpusRecord {
    std::string id;
    std::string annotation;
    std::vector<std::pair<std::string, std::string>> hypotheses; // file order
    std::optional<std::vector<TimedWord>> timed_words;
    std::optional<std::filesystem::path> session_history;
    json raw;             // the line as read, rewritten on save
    std::size_t line = 0; // 1-based
    bool dirty = false;   // edited since load
};

struct CorpusFailure {
    std::size_t line = 0;
    std::string id;
    std::string message;
};

struct Corpus {
    std::filesystem::path path;
    std::vector<CorpusRecord> records;
    std::vector<CorpusFailure> failures; // unreadable lines, duplicate ids
    std::vector<std::string> lines;      // file contents, one entry per line

    const CorpusRecord* find(const std::string& id) const;
    CorpusRecord* find(const std::string& id);
};

// Throws InvalidInput if the file cannot be opened; bad lines become failures.
Corpus load_corpus(const std::filesystem::path& path, const TokenizerConfig& tokenizer = {});

// Rewrites the lines of edited records from their raw form, keeps every
// other line verbatim, and renames a temporary sibling over the file.
void save_corpus(const Corpus& corpus);

void set_annotation(CorpusRecord& record, const std::string& annotation);

SessionHistory load_history(const std::filesystem::path& path);
std::vector<TimedWord> load_timed_words(const std::filesystem::path& path, const TokenizerConfig& tokenizer = {});

} // namespace mwer
