#pragma once

#include "mwer/align.hpp"
#include "mwer/metrics.hpp"
#include "mwer/multialign.hpp"
#include "mwer/streaming.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace mwer {

using json = nlohmann::ordered_json;

json to_json(const ScoreTuple& score);
json to_json(const Alignment& alignment);
json to_json(const ErrorCounts& counts);
json to_json(const MetricReport& report);
json to_json(const MultiAlignment& ma, double disagreement_threshold = 0.5);
json to_json(const PartialAlignmentRow& row);
json to_json(const StreamingHistogram& histogram);

json history_event(const InputChunk& chunk);
json history_event(const BusyInterval& interval);
json history_event(const OutputChunk& output);

// One event per line, inputs, then busy intervals, then outputs.
void write_history(std::ostream& out, const SessionHistory& history);
SessionHistory read_history(std::istream& in);

std::vector<TimedWord> timed_words_from_json(const json& j, const TokenizerConfig& tokenizer = {});
json to_json(const std::vector<TimedWord>& words);

// Compact single-line dump used for JSONL and byte-stable artifacts.
std::string dump_line(const json& j);
// Indented dump with a trailing newline.
std::string dump_pretty(const json& j);

} // namespace mwer
