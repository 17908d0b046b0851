#include "mwer/cli.hpp"

#include "mwer/error.hpp"
#include "mwer/json_io.hpp"
#include "mwer/server.hpp"
#include "mwer/svg.hpp"
#include "mwer/utf8.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include <unistd.h>

namespace mwer {

namespace {

namespace fs = std::filesystem;

bool is_parse_error(ErrorCode code)
{
    return code == ErrorCode::UnbalancedBrace || code == ErrorCode::NestedBlock
           || code == ErrorCode::WildcardInsideBlock || code == ErrorCode::EmptyAnnotation;
}

void write_file(const fs::path& path, const std::string& content)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::InvalidInput, "cannot write " + path.string());
    }
    out << content;
}

std::string format(const char* fmt, double a)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, a);
    return buf;
}

const char* ansi(StepKind kind)
{
    switch (kind) {
    case StepKind::Correct: return "";
    case StepKind::Replacement: return "\x1b[33m";
    case StepKind::Deletion: return "\x1b[31m";
    case StepKind::Insertion: return "\x1b[35m";
    case StepKind::WildcardAbsorbed: return "\x1b[36m";
    }
    return "";
}

char marker(StepKind kind)
{
    switch (kind) {
    case StepKind::Correct: return ' ';
    case StepKind::Replacement: return 'S';
    case StepKind::Deletion: return 'D';
    case StepKind::Insertion: return 'I';
    case StepKind::WildcardAbsorbed: return '*';
    }
    return '?';
}

void render_alignment(std::ostream& out, const SampleEvaluation& eval, bool color)
{
    std::string ref_line = "REF:";
    std::string hyp_line = "HYP:";
    std::string mark_line = "    ";
    for (const auto& step : eval.words.steps) {
        std::string ref = step.ref_token ? step.ref_token->text
                          : step.kind == StepKind::WildcardAbsorbed ? "<*>"
                                                                     : "***";
        std::string hyp = step.hyp_token ? step.hyp_token->text : "***";
        const std::size_t width = std::max(utf8::length(ref), utf8::length(hyp));
        ref += std::string(width - utf8::length(ref), ' ');
        hyp += std::string(width - utf8::length(hyp), ' ');
        const bool paint = color && step.kind != StepKind::Correct;
        const std::string on = paint ? ansi(step.kind) : "";
        const std::string off = paint ? "\x1b[0m" : "";
        ref_line += " " + on + ref + off;
        hyp_line += " " + on + hyp + off;
        mark_line += " " + std::string(1, marker(step.kind)) + std::string(width - 1, ' ');
    }
    while (!mark_line.empty() && mark_line.back() == ' ') {
        mark_line.pop_back();
    }
    const MetricReport& r = eval.report;
    out << ref_line << '\n' << hyp_line << '\n';
    if (!mark_line.empty()) {
        out << mark_line << '\n';
    }
    out << "WER " << format("%.4f", r.wer) << "  relaxed " << format("%.4f", r.wer_relaxed) << "  CER "
        << format("%.4f", r.cer) << "  (S " << r.counts.replacements << ", D " << r.counts.deletions << ", I "
        << r.counts.insertions_raw << ", ref " << r.word_denominator << ", " << mode_name(r.mode) << ")\n";
}

json failure_json(std::size_t line, const std::string& id, const std::optional<std::string>& model,
                  const std::string& message)
{
    return json{{"line", line},
                {"id", id},
                {"model", model ? json(*model) : json(nullptr)},
                {"error", message}};
}

std::string safe_name(const std::string& id)
{
    std::string out;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-'
                        || c == '_' || c == '.';
        out += ok ? c : '_';
    }
    return out;
}

std::optional<std::size_t> parse_cap(const std::string& text)
{
    if (text == "none") {
        return std::nullopt;
    }
    std::size_t used = 0;
    unsigned long value = 0;
    try {
        value = std::stoul(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) {
        throw Error(ErrorCode::InvalidInput, "--insertion-cap expects a number or 'none', got '" + text + "'");
    }
    return static_cast<std::size_t>(value);
}

} // namespace

std::string describe_error(const std::exception& e, std::string_view source)
{
    std::string out = "error: ";
    out += e.what();
    out += '\n';
    const auto* err = dynamic_cast<const Error*>(&e);
    if (err == nullptr || !err->span() || source.empty() || !is_parse_error(err->code())) {
        return out;
    }
    const Span span = *err->span();
    const std::size_t offset = std::min(span.offset, source.size());
    const std::size_t length = std::min(span.length, source.size() - offset);
    out += "  " + std::string(source) + "\n";
    out += "  " + std::string(utf8::length(source.substr(0, offset)), ' ');
    out += std::string(std::max<std::size_t>(1, utf8::length(source.substr(offset, length))), '^');
    out += '\n';
    return out;
}

StreamingSample evaluate_streaming(const std::string& id, const Annotation& annotation,
                                   const std::vector<TimedWord>& timed_words, const SessionHistory& history,
                                   const std::optional<std::string>& recording, const StreamingOptions& options,
                                   const EvalConfig& config)
{
    const SessionHistory timeline = options.remap ? remap_time(history, options.chunk_interval) : history;
    const auto ids = timeline.recordings();
    std::string chosen;
    if (recording) {
        chosen = *recording;
    } else if (std::find(ids.begin(), ids.end(), id) != ids.end()) {
        chosen = id;
    } else if (ids.size() == 1) {
        chosen = ids.front();
    } else {
        throw Error(ErrorCode::InvalidInput, "history has " + std::to_string(ids.size())
                                                 + " recordings; name one with --recording");
    }
    const SessionHistory h = timeline.only(chosen);
    if (h.inputs.empty()) {
        throw Error(ErrorCode::InvalidInput, "recording '" + chosen + "' has no input chunks in the history");
    }
    return StreamingSample{id.empty() ? chosen : id, chosen,
                           streaming_diagram(annotation, timed_words, h.inputs, h.outputs, options.rows, config)};
}

json streaming_json(const std::vector<StreamingSample>& samples, const StreamingHistogram& histogram,
                    const StreamingOptions& options)
{
    json list = json::array();
    for (const auto& s : samples) {
        json rows = json::array();
        for (const auto& r : s.rows) {
            rows.push_back(to_json(r));
        }
        list.push_back(json{{"id", s.id}, {"recording_id", s.recording_id}, {"rows", std::move(rows)}});
    }
    return json{{"v", corpus_version},
                {"config",
                 json{{"rows", options.rows},
                      {"bin_width", options.histogram.bin_width},
                      {"range", json::array({options.histogram.lo, options.histogram.hi})},
                      {"remap", options.remap},
                      {"chunk_interval",
                       options.chunk_interval ? json(*options.chunk_interval) : json(nullptr)}}},
                {"samples", std::move(list)},
                {"histogram", to_json(histogram)}};
}

int cmd_align(const AlignArgs& args, std::ostream& out, std::ostream& err)
{
    try {
        const Annotation annotation = parse_annotation(args.ref, args.config.tokenizer);
        const SampleEvaluation eval = evaluate_sample_detailed(annotation, args.hyp, args.config);
        if (args.json) {
            out << dump_pretty(json{{"alignment", to_json(eval.words)}, {"report", to_json(eval.report)}});
        } else {
            render_alignment(out, eval, args.color);
        }
        return exit_code::ok;
    } catch (const Error& e) {
        err << describe_error(e, args.ref);
        return exit_code::usage;
    }
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err)
{
    Corpus corpus;
    try {
        corpus = load_corpus(args.corpus, args.config.tokenizer);
    } catch (const Error& e) {
        err << describe_error(e);
        return exit_code::usage;
    }

    struct Outcome {
        std::vector<std::optional<MetricReport>> reports; // per hypothesis, record order
        std::vector<std::string> errors;                   // per hypothesis, empty when fine
        std::optional<std::string> record_error;
    };
    std::vector<Outcome> outcomes(corpus.records.size());
    auto evaluate = [&](std::size_t i) {
        const CorpusRecord& rec = corpus.records[i];
        Outcome& o = outcomes[i];
        o.reports.resize(rec.hypotheses.size());
        o.errors.resize(rec.hypotheses.size());
        Annotation annotation;
        try {
            annotation = parse_annotation(rec.annotation, args.config.tokenizer);
        } catch (const Error& e) {
            o.record_error = e.what();
            return;
        }
        for (std::size_t h = 0; h < rec.hypotheses.size(); ++h) {
            try {
                o.reports[h] = evaluate_sample(annotation, rec.hypotheses[h].second, args.config);
            } catch (const Error& e) {
                o.errors[h] = e.what();
            }
        }
    };

    const unsigned hw = args.threads != 0 ? args.threads : std::max(1u, std::thread::hardware_concurrency());
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(hw, corpus.records.size()));
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < corpus.records.size(); i = next++) {
                evaluate(i);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }

    json failures = json::array();
    for (const auto& f : corpus.failures) {
        failures.push_back(failure_json(f.line, f.id, std::nullopt, f.message));
    }
    std::vector<std::string> models;
    std::map<std::string, std::vector<MetricReport>> by_model;
    std::string lines;
    for (std::size_t i = 0; i < corpus.records.size(); ++i) {
        const CorpusRecord& rec = corpus.records[i];
        const Outcome& o = outcomes[i];
        if (o.record_error) {
            failures.push_back(failure_json(rec.line, rec.id, std::nullopt, *o.record_error));
            continue;
        }
        for (std::size_t h = 0; h < rec.hypotheses.size(); ++h) {
            const std::string& model = rec.hypotheses[h].first;
            if (!o.reports[h]) {
                failures.push_back(failure_json(rec.line, rec.id, model, o.errors[h]));
                continue;
            }
            if (by_model.find(model) == by_model.end()) {
                models.push_back(model);
            }
            by_model[model].push_back(*o.reports[h]);
            lines += dump_line(json{{"id", rec.id}, {"model", model}, {"report", to_json(*o.reports[h])}});
            lines += '\n';
        }
    }

    json aggregates = json::array();
    for (const auto& model : models) {
        const MetricReport agg = aggregate(by_model[model], args.weighting, args.aggregate);
        aggregates.push_back(json{{"name", model}, {"report", to_json(agg)}});
        out << model << ": WER " << format("%.4f", agg.wer) << " relaxed " << format("%.4f", agg.wer_relaxed)
            << " CER " << format("%.4f", agg.cer);
        if (agg.wer_ci) {
            out << " 95% CI [" << format("%.4f", agg.wer_ci->first) << ", " << format("%.4f", agg.wer_ci->second)
                << "]";
        }
        out << " over " << agg.samples << " samples\n";
    }
    if (models.empty()) {
        failures.push_back(failure_json(0, "", std::nullopt, describe_error(Error(ErrorCode::EmptyCorpus,
                                                                                     "no sample could be evaluated"))));
    }

    const json summary{{"v", corpus_version},
                       {"config",
                        json{{"mode", mode_name(args.config.mode)},
                             {"insertion_cap", args.config.insertion_cap ? json(*args.config.insertion_cap)
                                                                         : json(nullptr)},
                             {"denominator", denominator_name(args.config.denominator)},
                             {"weighting", weighting_name(args.weighting)},
                             {"seed", args.aggregate.seed},
                             {"resamples", args.aggregate.resamples}}},
                       {"models", std::move(aggregates)},
                       {"failures", failures}};
    try {
        fs::create_directories(args.out_dir);
        write_file(args.out_dir / "reports.jsonl", lines);
        write_file(args.out_dir / "aggregate.json", dump_pretty(summary));
    } catch (const std::exception& e) {
        err << describe_error(e);
        return exit_code::failed;
    }
    for (const auto& f : failures) {
        err << "failed: line " << f["line"].get<std::size_t>() << " id '" << f["id"].get<std::string>() << "'";
        if (!f["model"].is_null()) {
            err << " model '" << f["model"].get<std::string>() << "'";
        }
        err << ": " << f["error"].get<std::string>() << '\n';
    }
    return failures.empty() ? exit_code::ok : exit_code::failed;
}

int cmd_stream_eval(const StreamEvalArgs& args, std::ostream& out, std::ostream& err)
{
    std::vector<StreamingSample> samples;
    bool failed = false;
    try {
        if (args.corpus) {
            const Corpus corpus = load_corpus(*args.corpus, args.config.tokenizer);
            for (const auto& rec : corpus.records) {
                if (!rec.timed_words || !rec.session_history) {
                    continue;
                }
                try {
                    const Annotation a = parse_annotation(rec.annotation, args.config.tokenizer);
                    samples.push_back(evaluate_streaming(rec.id, a, *rec.timed_words, load_history(*rec.session_history),
                                                         args.recording, args.streaming, args.config));
                } catch (const Error& e) {
                    err << "failed: id '" << rec.id << "': " << describe_error(e, rec.annotation);
                    failed = true;
                }
            }
        } else {
            if (!args.history || !args.timed_words || !args.annotation) {
                throw Error(ErrorCode::InvalidInput,
                            "stream-eval needs --corpus, or --history, --timed-words and --annotation");
            }
            Annotation a;
            try {
                a = parse_annotation(*args.annotation, args.config.tokenizer);
            } catch (const Error& e) {
                err << describe_error(e, *args.annotation);
                return exit_code::usage;
            }
            const SessionHistory history = load_history(*args.history);
            const auto words = load_timed_words(*args.timed_words, args.config.tokenizer);
            const std::string id = args.recording.value_or("");
            samples.push_back(evaluate_streaming(id, a, words, history, args.recording, args.streaming, args.config));
        }

        std::vector<PartialAlignmentRow> all_rows;
        for (const auto& s : samples) {
            all_rows.insert(all_rows.end(), s.rows.begin(), s.rows.end());
        }
        const StreamingHistogram histogram = prescription_histogram(all_rows, args.streaming.histogram);

        fs::create_directories(args.out_dir);
        write_file(args.out_dir / "streaming.json", dump_pretty(streaming_json(samples, histogram, args.streaming)));
        write_file(args.out_dir / "histogram.svg", histogram_svg(histogram));
        for (const auto& s : samples) {
            write_file(args.out_dir / ("diagram-" + safe_name(s.id) + ".svg"), diagram_svg(s.rows));
            const ErrorCounts& c = s.rows.back().counts;
            out << s.id << " (" << s.recording_id << "): " << s.rows.size() << " rows, final S " << c.replacements
                << " D " << c.deletions << " I " << c.insertions_raw << " of " << c.ref_len << '\n';
        }
        out << "histogram: " << histogram.total() << " words in " << histogram.bins() << " bins\n";
    } catch (const Error& e) {
        err << describe_error(e);
        return exit_code::usage;
    } catch (const fs::filesystem_error& e) {
        err << describe_error(e);
        return exit_code::failed;
    }
    return failed ? exit_code::usage : exit_code::ok;
}

int cmd_serve(const ServeArgs& args, std::ostream& out, std::ostream& err)
{
    try {
        DashboardServer server(args.corpus, args.config, args.streaming, args.static_dir);
        const int port = server.bind(args.host, args.port);
        if (port < 0) {
            err << "error: cannot bind " << args.host << ":" << args.port << '\n';
            return exit_code::failed;
        }
        out << "serving " << args.corpus.string() << " on http://" << args.host << ":" << port << '\n' << std::flush;
        server.listen();
        return exit_code::ok;
    } catch (const Error& e) {
        err << describe_error(e);
        return exit_code::usage;
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Multi-reference WER evaluation toolkit", "mwer"};
    app.require_subcommand(1);

    std::string mode = "permissive";
    std::string cap = std::to_string(default_insertion_cap);
    std::string denominator = "permissive_path";
    auto add_eval_flags = [&](CLI::App* cmd) {
        cmd->add_option("--mode", mode, "strict or permissive")->check(CLI::IsMember({"strict", "permissive"}));
        cmd->add_option("--insertion-cap", cap, "longest insertion run counted in relaxed WER, or 'none'");
        cmd->add_option("--denominator", denominator, "permissive_path, path or first_option")
            ->check(CLI::IsMember({"permissive_path", "path", "first_option"}));
    };
    StreamingOptions streaming;
    auto add_stream_flags = [&](CLI::App* cmd) {
        cmd->add_option("--rows", streaming.rows, "diagram rows")->check(CLI::PositiveNumber);
        cmd->add_option("--bins", streaming.histogram.bin_width, "histogram bin width, seconds")
            ->check(CLI::PositiveNumber);
        cmd->add_flag("--remap", streaming.remap, "remap a flood-paced history onto real-time sending");
        cmd->add_option("--chunk-interval", streaming.chunk_interval, "seconds between scheduled chunk sends");
    };

    AlignArgs align_args;
    auto* align = app.add_subcommand("align", "align one hypothesis against an annotation");
    align->add_option("--ref", align_args.ref, "annotation")->required();
    align->add_option("--hyp", align_args.hyp, "hypothesis")->required();
    align->add_flag("--json", align_args.json, "print alignment JSON");
    add_eval_flags(align);

    EvalArgs eval_args;
    std::string weighting = "micro";
    auto* eval = app.add_subcommand("eval", "evaluate every hypothesis of a JSONL corpus");
    eval->add_option("corpus", eval_args.corpus, "corpus JSONL")->required();
    eval->add_option("--out", eval_args.out_dir, "output directory")->required();
    eval->add_option("--weighting", weighting, "micro or macro")->check(CLI::IsMember({"micro", "macro"}));
    eval->add_option("--seed", eval_args.aggregate.seed, "bootstrap seed");
    eval->add_option("--resamples", eval_args.aggregate.resamples, "bootstrap resamples");
    eval->add_option("--threads", eval_args.threads, "worker threads, 0 for all cores");
    add_eval_flags(eval);

    StreamEvalArgs stream_args;
    auto* stream = app.add_subcommand("stream-eval", "streaming diagram and prescription histogram");
    stream->add_option("--corpus", stream_args.corpus, "corpus JSONL with timed_words and session_history");
    stream->add_option("--history", stream_args.history, "session history JSONL");
    stream->add_option("--timed-words", stream_args.timed_words, "timed words JSON");
    stream->add_option("--annotation", stream_args.annotation, "annotation text");
    stream->add_option("--recording", stream_args.recording, "recording id inside the history");
    stream->add_option("--out", stream_args.out_dir, "output directory")->required();
    add_eval_flags(stream);
    add_stream_flags(stream);

    ServeArgs serve_args;
    auto* serve = app.add_subcommand("serve", "JSON API and static dashboard");
    serve->add_option("corpus", serve_args.corpus, "corpus JSONL")->required();
    serve->add_option("--static", serve_args.static_dir, "dashboard bundle directory");
    serve->add_option("--host", serve_args.host, "bind address");
    serve->add_option("--port", serve_args.port, "port, 0 for any")->check(CLI::Range(0, 65535));
    add_eval_flags(serve);
    add_stream_flags(serve);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_code::ok : exit_code::usage;
    }

    EvalConfig config;
    try {
        config.mode = parse_mode(mode);
        config.insertion_cap = parse_cap(cap);
        config.denominator = parse_denominator(denominator);
    } catch (const Error& e) {
        err << describe_error(e);
        return exit_code::usage;
    }

    if (align->parsed()) {
        align_args.config = config;
        align_args.color = std::getenv("MWER_NO_COLOR") == nullptr && &out == &std::cout && isatty(STDOUT_FILENO);
        return cmd_align(align_args, out, err);
    }
    if (eval->parsed()) {
        eval_args.config = config;
        eval_args.weighting = parse_weighting(weighting);
        return cmd_eval(eval_args, out, err);
    }
    if (stream->parsed()) {
        stream_args.config = config;
        stream_args.streaming = streaming;
        return cmd_stream_eval(stream_args, out, err);
    }
    serve_args.config = config;
    serve_args.streaming = streaming;
    return cmd_serve(serve_args, out, err);
}

} // namespace mwer
