#pragma once

#include "mwer/align.hpp"
#include "mwer/annotation.hpp"
#include "mwer/metrics.hpp"

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mwer {

struct InputChunk {
    std::string recording_id;
    std::size_t seq = 0;
    double duration = 0.0;
    double send_time = 0.0;
};

struct OutputChunk {
    std::string recording_id;
    std::string part_id;
    std::string text;
    double emit_time = 0.0;
    std::optional<std::size_t> chunk_seq; // chunk being processed when emitted, if known
};

struct BusyInterval {
    std::string recording_id;
    std::size_t seq = 0;
    double busy_start = 0.0;
    double busy_end = 0.0;
};

// Busy intervals in the order the system processed them.
struct ProcessingRecord {
    std::vector<BusyInterval> intervals;
};

struct SessionHistory {
    std::vector<InputChunk> inputs;
    ProcessingRecord processing;
    std::vector<OutputChunk> outputs;

    std::vector<std::string> recordings() const; // first-appearance order
    SessionHistory only(const std::string& recording_id) const;
};

struct TimedWord {
    Token word;
    double start = 0.0;
    double end = 0.0;

    double center() const { return (start + end) / 2.0; }
};

// Replays outputs with emit_time <= upto; a repeated part_id overwrites that
// part in place. Parts are joined with single spaces.
std::string merge_parts(const std::vector<OutputChunk>& outputs, double upto);

/// Moves a flood-paced session onto the timeline a real-time sender would
/// have produced. Chunk i of a recording is scheduled at i * chunk_interval,
/// or at the summed duration of its earlier chunks when no interval is given.
/// Chunks are replayed through a single FIFO worker in (schedule, original
/// processing) order with their recorded busy durations.
SessionHistory remap_time(const SessionHistory& flood, std::optional<double> chunk_interval = std::nullopt);

// Audio seconds delivered by time t; each chunk streams linearly over
// [send_time, send_time + duration].
double audio_sent(const std::vector<InputChunk>& inputs, double t);

enum class WordCategory { Correct, Error, NotYetTranscribed, WildcardAbsorbed };

std::string_view word_category_name(WordCategory c);

struct PartialStep {
    AlignmentStep step;
    WordCategory category = WordCategory::Correct;
    double center = 0.0;                   // reference word center, inherited for insertions
    std::optional<std::size_t> word_index; // timed word index for first-option tokens
};

struct PartialAlignmentRow {
    double eval_time = 0.0;
    double audio_sent = 0.0;
    std::string hypothesis;
    std::vector<PartialStep> steps;
    ErrorCounts counts; // all steps, the not-yet tail counted as deletions
};

// timed_words: one per token of the first-option path, wildcards excluded.
PartialAlignmentRow partial_alignment(const Annotation& annotation, const std::vector<TimedWord>& timed_words,
                                      const std::vector<OutputChunk>& outputs, double eval_time, double audio_sent,
                                      const EvalConfig& config = {});

// Rows at eval times end * i / n_rows, i = 1..n_rows. Inputs and outputs
// belong to a single recording.
std::vector<PartialAlignmentRow> streaming_diagram(const Annotation& annotation,
                                                   const std::vector<TimedWord>& timed_words,
                                                   const std::vector<InputChunk>& inputs,
                                                   const std::vector<OutputChunk>& outputs, std::size_t n_rows,
                                                   const EvalConfig& config = {});

double session_end(const std::vector<InputChunk>& inputs, const std::vector<OutputChunk>& outputs);

struct HistogramConfig {
    double bin_width = 0.25;
    double lo = -1.0;
    double hi = 10.0;
};

struct StreamingHistogram {
    std::vector<double> bin_edges; // bins + 1 edges, left-closed bins
    std::vector<std::size_t> correct;
    std::vector<std::size_t> error;
    std::vector<std::size_t> not_yet;

    std::size_t bins() const { return correct.size(); }
    std::size_t total() const;
};

// Prescription = audio_sent - word center; outliers clamp into the edge bins
// and wildcard-absorbed steps are skipped. Throws EmptyInput on no rows.
StreamingHistogram prescription_histogram(const std::vector<PartialAlignmentRow>& rows,
                                          const HistogramConfig& config = {});

class Clock {
public:
    virtual ~Clock() = default;
    virtual double now() const = 0;
    virtual void sleep_until(double t) = 0;
    void sleep_for(double seconds) { sleep_until(now() + seconds); }
};

// Advances only when asked to; sleeping is instant.
class VirtualClock : public Clock {
public:
    double now() const override { return now_; }
    void sleep_until(double t) override;

private:
    double now_ = 0.0;
};

class SteadyClock : public Clock {
public:
    SteadyClock();
    double now() const override;
    void sleep_until(double t) override;

private:
    std::chrono::steady_clock::time_point origin_;
};

/// Push-chunk / poll-output contract. push_chunk returns once the chunk has
/// been processed; processing time is whatever the system spends on the clock.
class StreamingSystem {
public:
    virtual ~StreamingSystem() = default;
    virtual void push_chunk(const InputChunk& chunk, Clock& clock) = 0;
    virtual std::vector<OutputChunk> poll_output() = 0;
};

enum class Pacing { Realtime, Flood };

std::string_view pacing_name(Pacing p);
Pacing parse_pacing(std::string_view name);

struct AudioPlan {
    std::string recording_id;
    std::vector<double> durations;
};

struct SessionOptions {
    Pacing pacing = Pacing::Flood;
    double stall_timeout = 60.0; // longest allowed busy span for one chunk
};

// Flood sends everything at t=0; realtime sends chunk i of a recording at the
// summed duration of its earlier chunks. Chunks that arrive while the system
// is busy wait in the input buffer. Outputs are stamped at poll time.
SessionHistory run_session(StreamingSystem& system, const std::vector<AudioPlan>& plan, Clock& clock,
                           const SessionOptions& options = {});

// One word per chunk, zero processing time.
class EchoMock : public StreamingSystem {
public:
    explicit EchoMock(std::map<std::string, std::vector<std::string>> words);
    void push_chunk(const InputChunk& chunk, Clock& clock) override;
    std::vector<OutputChunk> poll_output() override;

private:
    std::map<std::string, std::vector<std::string>> words_;
    std::vector<OutputChunk> pending_;
};

// Echo behaviour with a fixed processing delay per chunk.
class DelayMock : public StreamingSystem {
public:
    DelayMock(double delay, std::map<std::string, std::vector<std::string>> words);
    void push_chunk(const InputChunk& chunk, Clock& clock) override;
    std::vector<OutputChunk> poll_output() override;

private:
    double delay_;
    EchoMock echo_;
};

/// Emits each scripted word once the audio received so far reaches the
/// word's end plus a fixed context. Processing time per chunk comes from
/// `cost`, a pure function of the chunk. With `revise`, every word is first
/// emitted misspelled and corrected on the next chunk through its part id.
class ContextMock : public StreamingSystem {
public:
    using CostFn = std::function<double(const InputChunk&)>;

    ContextMock(std::map<std::string, std::vector<TimedWord>> script, double context, CostFn cost = {},
                bool revise = false);
    void push_chunk(const InputChunk& chunk, Clock& clock) override;
    std::vector<OutputChunk> poll_output() override;

private:
    struct Progress {
        double received = 0.0;
        std::size_t emitted = 0;
        std::optional<std::size_t> unrevised;
    };

    std::map<std::string, std::vector<TimedWord>> script_;
    double context_;
    CostFn cost_;
    bool revise_;
    std::map<std::string, Progress> progress_;
    std::vector<OutputChunk> pending_;
};

// Deterministic pseudo-random processing cost in [lo, hi) seconds derived
// from (seed, recording_id, seq).
ContextMock::CostFn hashed_cost(std::uint64_t seed, double lo, double hi);

} // namespace mwer
