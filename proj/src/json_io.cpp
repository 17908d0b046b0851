#include "mwer/json_io.hpp"

#include "mwer/error.hpp"

#include <istream>
#include <ostream>

namespace mwer {

namespace {

json optional_text(const std::optional<Token>& token)
{
    return token ? json(token->text) : json(nullptr);
}

template <typename T>
json optional_value(const std::optional<T>& v)
{
    return v ? json(*v) : json(nullptr);
}

template <typename T>
T field(const json& j, const char* name, std::size_t line)
{
    if (!j.contains(name)) {
        throw Error(ErrorCode::InvalidInput, "line " + std::to_string(line) + ": missing field '" + name + "'");
    }
    try {
        return j.at(name).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::InvalidInput,
                    "line " + std::to_string(line) + ": field '" + name + "' has the wrong type");
    }
}

} // namespace

json to_json(const ScoreTuple& score)
{
    return json{{"word_errors", score.word_errors},
                {"correct_matches", score.correct_matches},
                {"char_errors", score.char_errors}};
}

json to_json(const Alignment& alignment)
{
    json steps = json::array();
    for (const auto& s : alignment.steps) {
        steps.push_back(json{{"kind", step_kind_name(s.kind)},
                             {"ref", optional_text(s.ref_token)},
                             {"hyp", optional_text(s.hyp_token)},
                             {"ref_node", optional_value(s.ref_node)}});
    }
    return json{{"score", to_json(alignment.score)}, {"steps", std::move(steps)}};
}

json to_json(const ErrorCounts& c)
{
    return json{{"correct", c.correct},
                {"replacements", c.replacements},
                {"deletions", c.deletions},
                {"insertions_raw", c.insertions_raw},
                {"insertions_capped", c.insertions_capped},
                {"wildcard_absorbed", c.wildcard_absorbed},
                {"ref_len", c.ref_len}};
}

json to_json(const MetricReport& r)
{
    json j{{"wer", r.wer},
           {"wer_relaxed", r.wer_relaxed},
           {"cer", r.cer},
           {"counts", to_json(r.counts)},
           {"char_counts", to_json(r.char_counts)},
           {"word_denominator", r.word_denominator},
           {"char_denominator", r.char_denominator},
           {"mode", mode_name(r.mode)},
           {"denominator", denominator_name(r.denominator)},
           {"degenerate", r.degenerate},
           {"samples", r.samples}};
    if (r.weighting) {
        j["weighting"] = weighting_name(*r.weighting);
    }
    if (r.wer_ci) {
        j["wer_ci"] = json::array({r.wer_ci->first, r.wer_ci->second});
    }
    return j;
}

json to_json(const MultiAlignment& ma, double disagreement_threshold)
{
    json columns = json::array();
    for (const auto& c : ma.columns) {
        json labels = json::array();
        for (const auto& l : c.labels) {
            labels.push_back(json{{"option", optional_value(l.option)}, {"token", l.token}});
        }
        columns.push_back(json{{"kind", column_kind_name(c.kind)},
                               {"segment", c.segment},
                               {"offset", c.offset},
                               {"labels", std::move(labels)},
                               {"anchor", optional_value(c.anchor)}});
    }
    json rows = json::array();
    for (const auto& row : ma.rows) {
        json cells = json::array();
        for (const auto& cell : row.cells) {
            if (!cell) {
                cells.push_back(nullptr);
                continue;
            }
            cells.push_back(json{{"kind", step_kind_name(cell->kind)},
                                 {"ref", optional_value(cell->ref)},
                                 {"hyp", optional_value(cell->hyp)},
                                 {"option", optional_value(cell->option)},
                                 {"ref_node", optional_value(cell->ref_node)}});
        }
        rows.push_back(json{{"name", row.name},
                            {"cells", std::move(cells)},
                            {"report", to_json(row.report)},
                            {"alignment", to_json(row.alignment)}});
    }
    json disagreement = json::array();
    for (const auto& d : disagreement_report(ma, disagreement_threshold)) {
        disagreement.push_back(json{{"column", d.column}, {"fraction", d.fraction}});
    }
    return json{{"columns", std::move(columns)},
                {"rows", std::move(rows)},
                {"disagreement_threshold", disagreement_threshold},
                {"disagreement", std::move(disagreement)}};
}

json to_json(const PartialAlignmentRow& row)
{
    json steps = json::array();
    for (const auto& s : row.steps) {
        steps.push_back(json{{"kind", step_kind_name(s.step.kind)},
                             {"category", word_category_name(s.category)},
                             {"ref", optional_text(s.step.ref_token)},
                             {"hyp", optional_text(s.step.hyp_token)},
                             {"center", s.center},
                             {"word_index", optional_value(s.word_index)}});
    }
    return json{{"eval_time", row.eval_time},
                {"audio_sent", row.audio_sent},
                {"hypothesis", row.hypothesis},
                {"steps", std::move(steps)},
                {"counts", to_json(row.counts)}};
}

json to_json(const StreamingHistogram& h)
{
    return json{{"bin_edges", h.bin_edges}, {"correct", h.correct}, {"error", h.error}, {"not_yet", h.not_yet}};
}

json history_event(const InputChunk& c)
{
    return json{{"type", "input"},
                {"recording_id", c.recording_id},
                {"seq", c.seq},
                {"duration", c.duration},
                {"send_time", c.send_time}};
}

json history_event(const BusyInterval& iv)
{
    return json{{"type", "busy"},
                {"recording_id", iv.recording_id},
                {"seq", iv.seq},
                {"busy_start", iv.busy_start},
                {"busy_end", iv.busy_end}};
}

json history_event(const OutputChunk& o)
{
    json j{{"type", "output"},
           {"recording_id", o.recording_id},
           {"part_id", o.part_id},
           {"text", o.text},
           {"emit_time", o.emit_time}};
    if (o.chunk_seq) {
        j["chunk_seq"] = *o.chunk_seq;
    }
    return j;
}

void write_history(std::ostream& out, const SessionHistory& h)
{
    for (const auto& c : h.inputs) out << dump_line(history_event(c)) << '\n';
    for (const auto& iv : h.processing.intervals) out << dump_line(history_event(iv)) << '\n';
    for (const auto& o : h.outputs) out << dump_line(history_event(o)) << '\n';
}

SessionHistory read_history(std::istream& in)
{
    SessionHistory h;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        json j;
        try {
            j = json::parse(text);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::InvalidInput, "history line " + std::to_string(line) + ": " + e.what());
        }
        const auto type = field<std::string>(j, "type", line);
        const auto id = field<std::string>(j, "recording_id", line);
        if (type == "input") {
            h.inputs.push_back(InputChunk{id, field<std::size_t>(j, "seq", line), field<double>(j, "duration", line),
                                          field<double>(j, "send_time", line)});
        } else if (type == "busy") {
            h.processing.intervals.push_back(BusyInterval{id, field<std::size_t>(j, "seq", line),
                                                          field<double>(j, "busy_start", line),
                                                          field<double>(j, "busy_end", line)});
        } else if (type == "output") {
            OutputChunk o{id, field<std::string>(j, "part_id", line), field<std::string>(j, "text", line),
                          field<double>(j, "emit_time", line), std::nullopt};
            if (j.contains("chunk_seq") && !j["chunk_seq"].is_null()) {
                o.chunk_seq = field<std::size_t>(j, "chunk_seq", line);
            }
            h.outputs.push_back(std::move(o));
        } else {
            throw Error(ErrorCode::InvalidInput, "history line " + std::to_string(line) + ": unknown type '" + type + "'");
        }
    }
    return h;
}

std::vector<TimedWord> timed_words_from_json(const json& j, const TokenizerConfig& tokenizer)
{
    if (!j.is_array()) {
        throw Error(ErrorCode::InvalidInput, "timed words must be a JSON array");
    }
    std::vector<TimedWord> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const auto word = field<std::string>(j[i], "word", i + 1);
        auto tokens = tokenize(word, tokenizer);
        if (tokens.size() != 1) {
            throw Error(ErrorCode::InvalidInput, "timed word #" + std::to_string(i) + " '" + word
                                                     + "' is not a single token");
        }
        TimedWord w{std::move(tokens.front()), field<double>(j[i], "start", i + 1), field<double>(j[i], "end", i + 1)};
        if (!(w.start < w.end)) {
            throw Error(ErrorCode::InvalidInput, "timed word #" + std::to_string(i) + " has start >= end");
        }
        if (!out.empty() && w.start < out.back().start) {
            throw Error(ErrorCode::InvalidInput, "timed word #" + std::to_string(i) + " starts before its predecessor");
        }
        out.push_back(std::move(w));
    }
    return out;
}

json to_json(const std::vector<TimedWord>& words)
{
    json out = json::array();
    for (const auto& w : words) {
        out.push_back(json{{"word", w.word.original.empty() ? w.word.text : w.word.original},
                           {"start", w.start},
                           {"end", w.end}});
    }
    return out;
}

std::string dump_line(const json& j)
{
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string dump_pretty(const json& j)
{
    return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n";
}

} // namespace mwer
