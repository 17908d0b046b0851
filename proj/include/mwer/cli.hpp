#pragma once

#include "mwer/corpus.hpp"
#include "mwer/metrics.hpp"
#include "mwer/streaming.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mwer {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failed = 1; // some records failed, or I/O trouble
inline constexpr int usage = 2;  // bad flags, unparseable input, inconsistent history
} // namespace exit_code

struct AlignArgs {
    std::string ref;
    std::string hyp;
    bool json = false;
    bool color = true;
    EvalConfig config;
};

struct EvalArgs {
    std::filesystem::path corpus;
    std::filesystem::path out_dir;
    EvalConfig config;
    Weighting weighting = Weighting::Micro;
    AggregateOptions aggregate;
    unsigned threads = 0; // 0 = hardware concurrency
};

struct StreamingOptions {
    std::size_t rows = 10;
    HistogramConfig histogram;
    bool remap = false;
    std::optional<double> chunk_interval;
};

struct StreamEvalArgs {
    std::optional<std::filesystem::path> corpus;
    std::optional<std::filesystem::path> history;
    std::optional<std::filesystem::path> timed_words;
    std::optional<std::string> annotation;
    std::optional<std::string> recording;
    std::filesystem::path out_dir;
    StreamingOptions streaming;
    EvalConfig config;
};

struct ServeArgs {
    std::filesystem::path corpus;
    std::optional<std::filesystem::path> static_dir;
    std::string host = "127.0.0.1";
    int port = 8080;
    StreamingOptions streaming;
    EvalConfig config;
};

struct StreamingSample {
    std::string id;
    std::string recording_id;
    std::vector<PartialAlignmentRow> rows;
};

// Diagram rows for one recording of a session history. The recording is
// `recording` if given, else the one named `id`, else the only one. An
// empty id takes the recording's.
StreamingSample evaluate_streaming(const std::string& id, const Annotation& annotation,
                                   const std::vector<TimedWord>& timed_words, const SessionHistory& history,
                                   const std::optional<std::string>& recording, const StreamingOptions& options,
                                   const EvalConfig& config);

json streaming_json(const std::vector<StreamingSample>& samples, const StreamingHistogram& histogram,
                    const StreamingOptions& options);

// Renders a parse error with a caret line under the offending span.
std::string describe_error(const std::exception& e, std::string_view source = {});

int cmd_align(const AlignArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_stream_eval(const StreamEvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_serve(const ServeArgs& args, std::ostream& out, std::ostream& err);

// Full command line: `mwer <align|eval|stream-eval|serve> [flags]`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace mwer
