#include "mwer/corpus.hpp"

#include "mwer/error.hpp"

#include <fstream>
#include <set>

namespace mwer {

namespace {

std::filesystem::path resolve(const std::filesystem::path& corpus, const std::string& p)
{
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : corpus.parent_path() / path;
}

CorpusRecord parse_record(const json& j, const std::filesystem::path& corpus_path, const TokenizerConfig& tokenizer)
{
    if (!j.is_object()) {
        throw Error(ErrorCode::InvalidInput, "record is not a JSON object");
    }
    if (!j.contains("v") || j["v"] != corpus_version) {
        throw Error(ErrorCode::InvalidInput, "record lacks \"v\": " + std::to_string(corpus_version));
    }
    CorpusRecord r;
    if (!j.contains("id") || !j["id"].is_string()) {
        throw Error(ErrorCode::InvalidInput, "record lacks a string \"id\"");
    }
    r.id = j["id"].get<std::string>();
    if (!j.contains("annotation") || !j["annotation"].is_string()) {
        throw Error(ErrorCode::InvalidInput, "record " + r.id + " lacks a string \"annotation\"");
    }
    r.annotation = j["annotation"].get<std::string>();
    if (!j.contains("hypotheses") || !j["hypotheses"].is_object()) {
        throw Error(ErrorCode::InvalidInput, "record " + r.id + " lacks a \"hypotheses\" object");
    }
    for (const auto& [name, text] : j["hypotheses"].items()) {
        if (!text.is_string()) {
            throw Error(ErrorCode::InvalidInput, "record " + r.id + ": hypothesis " + name + " is not a string");
        }
        r.hypotheses.emplace_back(name, text.get<std::string>());
    }
    if (j.contains("timed_words") && !j["timed_words"].is_null()) {
        const json& tw = j["timed_words"];
        r.timed_words = tw.is_string() ? load_timed_words(resolve(corpus_path, tw.get<std::string>()), tokenizer)
                                       : timed_words_from_json(tw, tokenizer);
    }
    if (j.contains("session_history") && !j["session_history"].is_null()) {
        if (!j["session_history"].is_string()) {
            throw Error(ErrorCode::InvalidInput, "record " + r.id + ": session_history must be a path");
        }
        r.session_history = resolve(corpus_path, j["session_history"].get<std::string>());
    }
    r.raw = j;
    return r;
}

} // namespace

const CorpusRecord* Corpus::find(const std::string& id) const
{
    for (const auto& r : records) {
        if (r.id == id) {
            return &r;
        }
    }
    return nullptr;
}

CorpusRecord* Corpus::find(const std::string& id)
{
    return const_cast<CorpusRecord*>(std::as_const(*this).find(id));
}

Corpus load_corpus(const std::filesystem::path& path, const TokenizerConfig& tokenizer)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::InvalidInput, "cannot open corpus " + path.string());
    }
    Corpus corpus;
    corpus.path = path;
    std::set<std::string> ids;
    std::string text;
    while (std::getline(in, text)) {
        corpus.lines.push_back(text);
        const std::size_t line = corpus.lines.size();
        if (text.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            json j;
            try {
                j = json::parse(text);
            } catch (const json::parse_error& e) {
                throw Error(ErrorCode::InvalidInput, e.what());
            }
            CorpusRecord r = parse_record(j, path, tokenizer);
            r.line = line;
            if (!ids.insert(r.id).second) {
                corpus.failures.push_back(CorpusFailure{line, r.id, "duplicate id " + r.id});
                continue;
            }
            corpus.records.push_back(std::move(r));
        } catch (const Error& e) {
            corpus.failures.push_back(CorpusFailure{line, "", e.what()});
        }
    }
    return corpus;
}

void save_corpus(const Corpus& corpus)
{
    std::vector<std::string> lines = corpus.lines;
    for (const auto& r : corpus.records) {
        if (r.dirty) {
            lines.at(r.line - 1) = dump_line(r.raw);
        }
    }
    std::filesystem::path tmp = corpus.path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) {
            throw Error(ErrorCode::InvalidInput, "cannot write " + tmp.string());
        }
        for (const auto& l : lines) {
            out << l << '\n';
        }
        out.flush();
        if (!out) {
            throw Error(ErrorCode::InvalidInput, "failed writing " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, corpus.path);
}

void set_annotation(CorpusRecord& record, const std::string& annotation)
{
    record.annotation = annotation;
    record.raw["annotation"] = annotation;
    record.dirty = true;
}

SessionHistory load_history(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::InvalidInput, "cannot open session history " + path.string());
    }
    return read_history(in);
}

std::vector<TimedWord> load_timed_words(const std::filesystem::path& path, const TokenizerConfig& tokenizer)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::InvalidInput, "cannot open timed words " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::InvalidInput, path.string() + ": " + e.what());
    }
    return timed_words_from_json(j, tokenizer);
}

} // namespace mwer
