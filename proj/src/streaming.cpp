#include "mwer/streaming.hpp"

#include "mwer/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>
#include <utility>

namespace mwer {

namespace {

constexpr double time_eps = 1e-9;

using ChunkKey = std::pair<std::string, std::size_t>;

std::vector<std::size_t> emit_order(const std::vector<OutputChunk>& outputs)
{
    std::vector<std::size_t> order(outputs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return outputs[a].emit_time < outputs[b].emit_time; });
    return order;
}

void check_single_threaded(const ProcessingRecord& proc)
{
    std::vector<const BusyInterval*> sorted;
    for (const auto& iv : proc.intervals) {
        if (iv.busy_end < iv.busy_start) {
            throw Error(ErrorCode::InvalidInput, "busy interval of chunk " + iv.recording_id + "#"
                                                     + std::to_string(iv.seq) + " ends before it starts");
        }
        sorted.push_back(&iv);
    }
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const BusyInterval* a, const BusyInterval* b) { return a->busy_start < b->busy_start; });

    // Latest-ending interval seen so far, overall and per recording.
    const BusyInterval* reach = nullptr;
    std::map<std::string, const BusyInterval*> reach_by_recording;
    for (const BusyInterval* iv : sorted) {
        auto& own = reach_by_recording[iv->recording_id];
        if (own != nullptr && iv->busy_start < own->busy_end - time_eps) {
            throw Error(ErrorCode::OverlappingBusyIntervals,
                        "chunks " + std::to_string(own->seq) + " and " + std::to_string(iv->seq) + " of recording "
                            + iv->recording_id + " were processed at the same time");
        }
        if (reach != nullptr && iv->busy_start < reach->busy_end - time_eps) {
            throw Error(ErrorCode::MultiThreadedSessionDetected,
                        "recordings " + reach->recording_id + " and " + iv->recording_id
                            + " were processed concurrently");
        }
        if (own == nullptr || iv->busy_end > own->busy_end) {
            own = iv;
        }
        if (reach == nullptr || iv->busy_end > reach->busy_end) {
            reach = iv;
        }
    }
}

} // namespace

std::vector<std::string> SessionHistory::recordings() const
{
    std::vector<std::string> out;
    std::set<std::string> seen;
    auto note = [&](const std::string& id) {
        if (seen.insert(id).second) {
            out.push_back(id);
        }
    };
    for (const auto& c : inputs) note(c.recording_id);
    for (const auto& iv : processing.intervals) note(iv.recording_id);
    for (const auto& o : outputs) note(o.recording_id);
    return out;
}

SessionHistory SessionHistory::only(const std::string& recording_id) const
{
    SessionHistory out;
    std::copy_if(inputs.begin(), inputs.end(), std::back_inserter(out.inputs),
                 [&](const InputChunk& c) { return c.recording_id == recording_id; });
    std::copy_if(processing.intervals.begin(), processing.intervals.end(),
                 std::back_inserter(out.processing.intervals),
                 [&](const BusyInterval& iv) { return iv.recording_id == recording_id; });
    std::copy_if(outputs.begin(), outputs.end(), std::back_inserter(out.outputs),
                 [&](const OutputChunk& o) { return o.recording_id == recording_id; });
    return out;
}

std::string merge_parts(const std::vector<OutputChunk>& outputs, double upto)
{
    std::vector<std::string> texts;
    std::map<std::string, std::size_t> slot;
    for (std::size_t i : emit_order(outputs)) {
        const OutputChunk& o = outputs[i];
        if (o.emit_time > upto) {
            break;
        }
        auto [it, fresh] = slot.try_emplace(o.part_id, texts.size());
        if (fresh) {
            texts.push_back(o.text);
        } else {
            texts[it->second] = o.text;
        }
    }
    std::string out;
    for (const auto& t : texts) {
        if (t.empty()) {
            continue;
        }
        if (!out.empty()) {
            out += ' ';
        }
        out += t;
    }
    return out;
}

SessionHistory remap_time(const SessionHistory& flood, std::optional<double> chunk_interval)
{
    check_single_threaded(flood.processing);
    if (chunk_interval && *chunk_interval < 0.0) {
        throw Error(ErrorCode::InvalidInput, "chunk interval must be non-negative");
    }

    // Scheduled send time of every chunk.
    std::map<std::string, std::vector<const InputChunk*>> by_recording;
    for (const auto& c : flood.inputs) {
        by_recording[c.recording_id].push_back(&c);
    }
    std::map<ChunkKey, double> schedule;
    for (auto& [id, chunks] : by_recording) {
        std::stable_sort(chunks.begin(), chunks.end(),
                         [](const InputChunk* a, const InputChunk* b) { return a->seq < b->seq; });
        double t = 0.0;
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            const double s = chunk_interval ? static_cast<double>(i) * *chunk_interval : t;
            if (!schedule.emplace(ChunkKey{id, chunks[i]->seq}, s).second) {
                throw Error(ErrorCode::InvalidInput,
                            "duplicate chunk " + id + "#" + std::to_string(chunks[i]->seq));
            }
            t += chunks[i]->duration;
        }
    }

    const auto& intervals = flood.processing.intervals;
    std::vector<std::size_t> order(intervals.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> scheduled(intervals.size());
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        const auto it = schedule.find(ChunkKey{intervals[i].recording_id, intervals[i].seq});
        if (it == schedule.end()) {
            throw Error(ErrorCode::InvalidInput, "busy interval for unknown chunk " + intervals[i].recording_id
                                                     + "#" + std::to_string(intervals[i].seq));
        }
        scheduled[i] = it->second;
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scheduled[a] < scheduled[b]; });

    SessionHistory out;
    std::map<ChunkKey, double> shift;
    std::optional<double> free_at;
    for (std::size_t i : order) {
        const BusyInterval& iv = intervals[i];
        const double start = free_at ? std::max(scheduled[i], *free_at) : scheduled[i];
        BusyInterval moved = iv;
        moved.busy_start = start;
        moved.busy_end = start + (iv.busy_end - iv.busy_start);
        free_at = moved.busy_end;
        shift[ChunkKey{iv.recording_id, iv.seq}] = start - iv.busy_start;
        out.processing.intervals.push_back(std::move(moved));
    }

    out.inputs = flood.inputs;
    for (auto& c : out.inputs) {
        c.send_time = schedule.at(ChunkKey{c.recording_id, c.seq});
    }

    out.outputs = flood.outputs;
    for (auto& o : out.outputs) {
        std::optional<double> offset;
        if (o.chunk_seq) {
            const auto it = shift.find(ChunkKey{o.recording_id, *o.chunk_seq});
            if (it != shift.end()) {
                offset = it->second;
            }
        }
        if (!offset) {
            // The first interval of this recording still running at emit time.
            const BusyInterval* owner = nullptr;
            for (const auto& iv : intervals) {
                if (iv.recording_id != o.recording_id) {
                    continue;
                }
                owner = &iv;
                if (iv.busy_end >= o.emit_time - time_eps) {
                    break;
                }
            }
            if (owner != nullptr) {
                offset = shift.at(ChunkKey{owner->recording_id, owner->seq});
            }
        }
        o.emit_time += offset.value_or(0.0);
    }
    return out;
}

double audio_sent(const std::vector<InputChunk>& inputs, double t)
{
    double sent = 0.0;
    for (const auto& c : inputs) {
        if (c.duration <= 0.0 || t <= c.send_time) {
            continue;
        }
        sent += std::min(c.duration, t - c.send_time);
    }
    return sent;
}

std::string_view word_category_name(WordCategory c)
{
    switch (c) {
    case WordCategory::Correct: return "correct";
    case WordCategory::Error: return "error";
    case WordCategory::NotYetTranscribed: return "not_yet";
    case WordCategory::WildcardAbsorbed: return "wildcard";
    }
    return "?";
}

namespace {

// Timing attached to every token of a (truncated) annotation:
// [segment][option][offset]. Plain words use option slot 0.
struct TokenTiming {
    double center = 0.0;
    std::optional<std::size_t> word_index;
};
using Timing = std::vector<std::vector<std::vector<TokenTiming>>>;

struct Truncated {
    Annotation annotation;
    Timing timing;
};

void check_timed_words(const Annotation& annotation, const std::vector<TimedWord>& words)
{
    std::vector<const Token*> path;
    for (const auto& segment : annotation.segments) {
        if (const auto* plain = std::get_if<PlainSegment>(&segment)) {
            path.push_back(&plain->token);
        } else if (const auto* block = std::get_if<BlockSegment>(&segment)) {
            for (const auto& t : block->options.front().tokens) {
                path.push_back(&t);
            }
        }
    }
    if (path.size() != words.size()) {
        throw Error(ErrorCode::InvalidInput, "annotation has " + std::to_string(path.size())
                                                 + " first-option words but " + std::to_string(words.size())
                                                 + " timed words were given");
    }
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (path[i]->text != words[i].word.text) {
            throw Error(ErrorCode::InvalidInput, "timed word #" + std::to_string(i) + " '" + words[i].word.text
                                                     + "' does not match annotation word '" + path[i]->text + "'");
        }
    }
}

Truncated truncate(const Annotation& annotation, const std::vector<TimedWord>& words, double sent)
{
    Truncated out;
    std::size_t k = 0;
    auto last_center = [&]() -> double {
        if (k > 0) return words[k - 1].center();
        if (k < words.size()) return words[k].center();
        return sent;
    };

    for (std::size_t s = 0; s < annotation.segments.size(); ++s) {
        const Segment& segment = annotation.segments[s];
        if (std::holds_alternative<WildcardSegment>(segment)) {
            out.annotation.segments.push_back(segment);
            out.timing.push_back({{}});
            continue;
        }
        if (const auto* plain = std::get_if<PlainSegment>(&segment)) {
            const TimedWord& w = words[k];
            if (w.start >= sent) {
                break;
            }
            const TokenTiming timing{w.center(), k};
            if (sent < w.end) {
                out.annotation.segments.emplace_back(BlockSegment{{Option{{plain->token}, false}, Option{}}});
                out.timing.push_back({{timing}, {}});
            } else {
                out.annotation.segments.push_back(segment);
                out.timing.push_back({{timing}});
            }
            ++k;
            continue;
        }

        const auto& block = std::get<BlockSegment>(segment);
        const std::size_t m = block.options.front().tokens.size();
        std::size_t started = 0;
        bool complete = true;
        for (std::size_t i = 0; i < m; ++i) {
            if (words[k + i].start < sent) {
                ++started;
            }
            if (words[k + i].end > sent) {
                complete = false;
            }
        }
        if (m > 0 && started == 0) {
            break;
        }
        const double span_center = m > 0 ? (words[k].start + words[k + m - 1].end) / 2.0 : last_center();

        BlockSegment kept = block;
        if (!complete) {
            for (std::size_t len = 0; len <= started; ++len) {
                Option prefix;
                prefix.tokens.assign(block.options.front().tokens.begin(),
                                     block.options.front().tokens.begin() + static_cast<long>(len));
                const bool known = std::any_of(kept.options.begin(), kept.options.end(), [&](const Option& o) {
                    return !o.strict_violation && o.tokens == prefix.tokens;
                });
                if (!known) {
                    kept.options.push_back(std::move(prefix));
                }
            }
        }
        std::vector<std::vector<TokenTiming>> timing;
        for (std::size_t o = 0; o < kept.options.size(); ++o) {
            std::vector<TokenTiming> t;
            for (std::size_t i = 0; i < kept.options[o].tokens.size(); ++i) {
                // Prefix options follow the first option word for word.
                const bool tracks_first = o == 0 || o >= block.options.size();
                if (tracks_first) {
                    t.push_back(TokenTiming{words[k + i].center(), k + i});
                } else {
                    t.push_back(TokenTiming{span_center, std::nullopt});
                }
            }
            timing.push_back(std::move(t));
        }
        out.annotation.segments.emplace_back(std::move(kept));
        out.timing.push_back(std::move(timing));
        k += m;
    }
    return out;
}

Timing apply_mode_to_timing(const Annotation& annotation, Timing timing, Mode mode)
{
    if (mode == Mode::Permissive) {
        return timing;
    }
    for (std::size_t s = 0; s < annotation.segments.size(); ++s) {
        const auto* block = std::get_if<BlockSegment>(&annotation.segments[s]);
        if (block == nullptr) {
            continue;
        }
        std::vector<std::vector<TokenTiming>> kept;
        for (std::size_t o = 0; o < block->options.size(); ++o) {
            if (!block->options[o].strict_violation) {
                kept.push_back(std::move(timing[s][o]));
            }
        }
        timing[s] = std::move(kept);
    }
    return timing;
}

} // namespace

PartialAlignmentRow partial_alignment(const Annotation& annotation, const std::vector<TimedWord>& timed_words,
                                      const std::vector<OutputChunk>& outputs, double eval_time, double audio_sent,
                                      const EvalConfig& config)
{
    check_timed_words(annotation, timed_words);
    Truncated truncated = truncate(annotation, timed_words, audio_sent);
    const Timing timing = apply_mode_to_timing(truncated.annotation, std::move(truncated.timing), config.mode);

    PartialAlignmentRow row;
    row.eval_time = eval_time;
    row.audio_sent = audio_sent;
    row.hypothesis = merge_parts(outputs, eval_time);

    const SampleEvaluation eval = evaluate_sample_detailed(truncated.annotation, row.hypothesis, config);
    row.counts = eval.report.counts;

    const auto& steps = eval.words.steps;
    std::size_t tail = steps.size();
    while (tail > 0 && steps[tail - 1].kind == StepKind::Deletion) {
        --tail;
    }

    std::optional<double> previous;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        PartialStep p;
        p.step = steps[i];
        switch (steps[i].kind) {
        case StepKind::Correct: p.category = WordCategory::Correct; break;
        case StepKind::WildcardAbsorbed: p.category = WordCategory::WildcardAbsorbed; break;
        case StepKind::Deletion:
            p.category = i >= tail ? WordCategory::NotYetTranscribed : WordCategory::Error;
            break;
        default: p.category = WordCategory::Error; break;
        }
        const FlatNode* node = steps[i].ref_node ? &eval.flat.nodes[*steps[i].ref_node] : nullptr;
        if (node != nullptr && node->kind == NodeKind::Token) {
            const NodeOrigin& origin = node->origin;
            const TokenTiming& t = timing[origin.segment][origin.option.value_or(0)][origin.offset];
            p.center = t.center;
            p.word_index = t.word_index;
            previous = t.center;
        } else {
            p.center = previous.value_or(audio_sent);
        }
        row.steps.push_back(std::move(p));
    }
    return row;
}

double session_end(const std::vector<InputChunk>& inputs, const std::vector<OutputChunk>& outputs)
{
    double end = 0.0;
    for (const auto& c : inputs) {
        end = std::max(end, c.send_time + c.duration);
    }
    for (const auto& o : outputs) {
        end = std::max(end, o.emit_time);
    }
    return end;
}

std::vector<PartialAlignmentRow> streaming_diagram(const Annotation& annotation,
                                                   const std::vector<TimedWord>& timed_words,
                                                   const std::vector<InputChunk>& inputs,
                                                   const std::vector<OutputChunk>& outputs, std::size_t n_rows,
                                                   const EvalConfig& config)
{
    if (n_rows == 0) {
        throw Error(ErrorCode::InvalidInput, "a streaming diagram needs at least one row");
    }
    const double end = session_end(inputs, outputs);
    std::vector<PartialAlignmentRow> rows;
    rows.reserve(n_rows);
    for (std::size_t i = 1; i <= n_rows; ++i) {
        const double t = i == n_rows ? end : end * static_cast<double>(i) / static_cast<double>(n_rows);
        rows.push_back(partial_alignment(annotation, timed_words, outputs, t, audio_sent(inputs, t), config));
    }
    return rows;
}

std::size_t StreamingHistogram::total() const
{
    std::size_t n = 0;
    for (std::size_t b = 0; b < bins(); ++b) {
        n += correct[b] + error[b] + not_yet[b];
    }
    return n;
}

StreamingHistogram prescription_histogram(const std::vector<PartialAlignmentRow>& rows,
                                          const HistogramConfig& config)
{
    if (rows.empty()) {
        throw Error(ErrorCode::EmptyInput, "no partial alignments to histogram");
    }
    if (!(config.bin_width > 0.0) || !(config.hi > config.lo)) {
        throw Error(ErrorCode::InvalidInput, "histogram needs a positive bin width and lo < hi");
    }
    const auto bins = static_cast<std::size_t>(std::ceil((config.hi - config.lo) / config.bin_width - time_eps));
    StreamingHistogram h;
    for (std::size_t b = 0; b <= bins; ++b) {
        h.bin_edges.push_back(config.lo + static_cast<double>(b) * config.bin_width);
    }
    h.correct.assign(bins, 0);
    h.error.assign(bins, 0);
    h.not_yet.assign(bins, 0);

    for (const auto& row : rows) {
        for (const auto& step : row.steps) {
            if (step.category == WordCategory::WildcardAbsorbed) {
                continue;
            }
            const double p = row.audio_sent - step.center;
            const double raw = std::floor((p - config.lo) / config.bin_width);
            std::size_t b = raw <= 0.0 ? 0 : std::min(bins - 1, static_cast<std::size_t>(raw));
            if (b + 1 < bins && p >= h.bin_edges[b + 1]) {
                ++b;
            } else if (b > 0 && p < h.bin_edges[b]) {
                --b;
            }
            switch (step.category) {
            case WordCategory::Correct: ++h.correct[b]; break;
            case WordCategory::Error: ++h.error[b]; break;
            default: ++h.not_yet[b]; break;
            }
        }
    }
    return h;
}

void VirtualClock::sleep_until(double t)
{
    now_ = std::max(now_, t);
}

SteadyClock::SteadyClock() : origin_(std::chrono::steady_clock::now()) {}

double SteadyClock::now() const
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - origin_).count();
}

void SteadyClock::sleep_until(double t)
{
    std::this_thread::sleep_until(origin_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                                                std::chrono::duration<double>(t)));
}

std::string_view pacing_name(Pacing p)
{
    return p == Pacing::Realtime ? "realtime" : "flood";
}

Pacing parse_pacing(std::string_view name)
{
    if (name == "realtime") return Pacing::Realtime;
    if (name == "flood") return Pacing::Flood;
    throw Error(ErrorCode::InvalidInput, "unknown pacing '" + std::string(name) + "'");
}

SessionHistory run_session(StreamingSystem& system, const std::vector<AudioPlan>& plan, Clock& clock,
                           const SessionOptions& options)
{
    struct Send {
        double at;
        InputChunk chunk;
    };
    std::vector<Send> sends;
    std::set<std::string> ids;
    for (const auto& recording : plan) {
        if (!ids.insert(recording.recording_id).second) {
            throw Error(ErrorCode::InvalidInput, "recording " + recording.recording_id + " planned twice");
        }
        double t = 0.0;
        for (std::size_t i = 0; i < recording.durations.size(); ++i) {
            if (recording.durations[i] < 0.0) {
                throw Error(ErrorCode::InvalidInput, "negative chunk duration in " + recording.recording_id);
            }
            const double at = options.pacing == Pacing::Flood ? 0.0 : t;
            sends.push_back(Send{at, InputChunk{recording.recording_id, i, recording.durations[i], at}});
            t += recording.durations[i];
        }
    }
    std::stable_sort(sends.begin(), sends.end(), [](const Send& a, const Send& b) { return a.at < b.at; });

    const double origin = clock.now();
    SessionHistory history;
    for (auto& send : sends) {
        if (clock.now() - origin < send.at) {
            clock.sleep_until(origin + send.at);
        }
        InputChunk& chunk = send.chunk;
        history.inputs.push_back(chunk);

        const double busy_start = clock.now() - origin;
        system.push_chunk(chunk, clock);
        const double busy_end = clock.now() - origin;
        if (busy_end - busy_start > options.stall_timeout) {
            throw Error(ErrorCode::SystemStalled, "chunk " + chunk.recording_id + "#" + std::to_string(chunk.seq)
                                                      + " kept the system busy for "
                                                      + std::to_string(busy_end - busy_start) + " s");
        }
        history.processing.intervals.push_back(BusyInterval{chunk.recording_id, chunk.seq, busy_start, busy_end});

        for (auto& o : system.poll_output()) {
            o.emit_time = clock.now() - origin;
            if (!o.chunk_seq && o.recording_id == chunk.recording_id) {
                o.chunk_seq = chunk.seq;
            }
            history.outputs.push_back(std::move(o));
        }
    }
    return history;
}

EchoMock::EchoMock(std::map<std::string, std::vector<std::string>> words) : words_(std::move(words)) {}

void EchoMock::push_chunk(const InputChunk& chunk, Clock&)
{
    const auto it = words_.find(chunk.recording_id);
    if (it == words_.end() || chunk.seq >= it->second.size()) {
        return;
    }
    pending_.push_back(
        OutputChunk{chunk.recording_id, "p" + std::to_string(chunk.seq), it->second[chunk.seq], 0.0, chunk.seq});
}

std::vector<OutputChunk> EchoMock::poll_output()
{
    return std::exchange(pending_, {});
}

DelayMock::DelayMock(double delay, std::map<std::string, std::vector<std::string>> words)
    : delay_(delay), echo_(std::move(words))
{
}

void DelayMock::push_chunk(const InputChunk& chunk, Clock& clock)
{
    clock.sleep_for(delay_);
    echo_.push_chunk(chunk, clock);
}

std::vector<OutputChunk> DelayMock::poll_output()
{
    return echo_.poll_output();
}

ContextMock::ContextMock(std::map<std::string, std::vector<TimedWord>> script, double context, CostFn cost,
                         bool revise)
    : script_(std::move(script)), context_(context), cost_(std::move(cost)), revise_(revise)
{
}

void ContextMock::push_chunk(const InputChunk& chunk, Clock& clock)
{
    if (cost_) {
        clock.sleep_for(cost_(chunk));
    }
    Progress& p = progress_[chunk.recording_id];
    p.received += chunk.duration;
    const auto it = script_.find(chunk.recording_id);
    if (it == script_.end()) {
        return;
    }
    const auto& words = it->second;
    auto part = [&](std::size_t i) { return "w" + std::to_string(i); };

    if (p.unrevised) {
        for (std::size_t i = *p.unrevised; i < p.emitted; ++i) {
            pending_.push_back(OutputChunk{chunk.recording_id, part(i), words[i].word.text, 0.0, chunk.seq});
        }
        p.unrevised.reset();
    }
    const std::size_t first_new = p.emitted;
    while (p.emitted < words.size() && words[p.emitted].end + context_ <= p.received + time_eps) {
        const auto& w = words[p.emitted];
        pending_.push_back(
            OutputChunk{chunk.recording_id, part(p.emitted), revise_ ? w.word.text + "x" : w.word.text, 0.0,
                        chunk.seq});
        ++p.emitted;
    }
    if (revise_ && p.emitted > first_new) {
        p.unrevised = first_new;
    }
}

std::vector<OutputChunk> ContextMock::poll_output()
{
    return std::exchange(pending_, {});
}

ContextMock::CostFn hashed_cost(std::uint64_t seed, double lo, double hi)
{
    return [=](const InputChunk& chunk) {
        // FNV-1a over the recording id, then a splitmix64 finalizer.
        std::uint64_t h = 14695981039346656037ull ^ seed;
        for (unsigned char c : chunk.recording_id) {
            h = (h ^ c) * 1099511628211ull;
        }
        h ^= chunk.seq + 0x9e3779b97f4a7c15ull;
        h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ull;
        h = (h ^ (h >> 27)) * 0x94d049bb133111ebull;
        h ^= h >> 31;
        const double u = static_cast<double>(h >> 11) / 9007199254740992.0;
        return lo + (hi - lo) * u;
    };
}

} // namespace mwer
