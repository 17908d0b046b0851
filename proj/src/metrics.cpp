#include "mwer/metrics.hpp"

#include "mwer/error.hpp"
#include "mwer/utf8.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mwer {

ErrorCounts& ErrorCounts::operator+=(const ErrorCounts& other)
{
    correct += other.correct;
    replacements += other.replacements;
    deletions += other.deletions;
    insertions_raw += other.insertions_raw;
    insertions_capped += other.insertions_capped;
    wildcard_absorbed += other.wildcard_absorbed;
    ref_len += other.ref_len;
    return *this;
}

ErrorCounts count_errors(std::span<const AlignmentStep> steps, std::optional<std::size_t> cap)
{
    ErrorCounts counts;
    std::size_t run = 0;
    auto close_run = [&] {
        counts.insertions_capped += cap ? std::min(run, *cap) : run;
        run = 0;
    };
    for (const auto& step : steps) {
        if (step.kind == StepKind::Insertion) {
            ++counts.insertions_raw;
            ++run;
            continue;
        }
        close_run();
        switch (step.kind) {
        case StepKind::Correct: ++counts.correct; break;
        case StepKind::Replacement: ++counts.replacements; break;
        case StepKind::Deletion: ++counts.deletions; break;
        case StepKind::WildcardAbsorbed: ++counts.wildcard_absorbed; break;
        case StepKind::Insertion: break;
        }
    }
    close_run();
    counts.ref_len = counts.correct + counts.replacements + counts.deletions;
    return counts;
}

ErrorCounts count_errors(const Alignment& alignment, std::optional<std::size_t> cap)
{
    return count_errors(std::span<const AlignmentStep>(alignment.steps), cap);
}

Ratio error_ratio(std::size_t errors, std::size_t denominator)
{
    if (denominator == 0) {
        return errors == 0 ? Ratio{0.0, false} : Ratio{static_cast<double>(errors), true};
    }
    return Ratio{static_cast<double>(errors) / static_cast<double>(denominator), false};
}

Ratio compute_wer(const ErrorCounts& counts, bool relaxed)
{
    return error_ratio(counts.errors(relaxed), counts.ref_len);
}

std::string_view denominator_name(Denominator d)
{
    switch (d) {
    case Denominator::PermissivePath: return "permissive_path";
    case Denominator::Path: return "path";
    case Denominator::FirstOption: return "first_option";
    }
    return "unknown";
}

Denominator parse_denominator(std::string_view name)
{
    for (Denominator d : {Denominator::PermissivePath, Denominator::Path, Denominator::FirstOption}) {
        if (denominator_name(d) == name) {
            return d;
        }
    }
    throw Error(ErrorCode::InvalidInput, "unknown denominator '" + std::string(name) + "'");
}

std::string_view weighting_name(Weighting w)
{
    return w == Weighting::Micro ? "micro" : "macro";
}

Weighting parse_weighting(std::string_view name)
{
    if (name == "micro") {
        return Weighting::Micro;
    }
    if (name == "macro") {
        return Weighting::Macro;
    }
    throw Error(ErrorCode::InvalidInput, "unknown weighting '" + std::string(name) + "'");
}

namespace {

std::size_t first_option_chars(const Annotation& annotation)
{
    std::size_t n = 0;
    for (const auto& segment : annotation.segments) {
        if (const auto* plain = std::get_if<PlainSegment>(&segment)) {
            n += utf8::length(plain->token.text);
        } else if (const auto* block = std::get_if<BlockSegment>(&segment)) {
            for (const auto& token : block->options.front().tokens) {
                n += utf8::length(token.text);
            }
        }
    }
    return n;
}

} // namespace

SampleEvaluation evaluate_sample_detailed(const Annotation& annotation, std::string_view hypothesis,
                                          const EvalConfig& config)
{
    const std::vector<Token> hyp = tokenize(hypothesis, config.tokenizer);
    const Annotation moded = apply_mode(annotation, config.mode);

    SampleEvaluation out;
    out.flat = flatten(moded);
    out.words = align(out.flat, hyp, config.cost);
    out.chars = align_chars(out.flat, hyp, config.cost);

    MetricReport& report = out.report;
    report.mode = config.mode;
    report.denominator = config.denominator;
    report.counts = count_errors(out.words, config.insertion_cap);
    report.char_counts = count_errors(out.chars, std::nullopt);

    switch (config.denominator) {
    case Denominator::Path:
        report.word_denominator = report.counts.ref_len;
        report.char_denominator = report.char_counts.ref_len;
        break;
    case Denominator::PermissivePath:
        if (config.mode == Mode::Permissive) {
            report.word_denominator = report.counts.ref_len;
            report.char_denominator = report.char_counts.ref_len;
        } else {
            const FlatView permissive = flatten(annotation);
            report.word_denominator = count_errors(align(permissive, hyp, config.cost), std::nullopt).ref_len;
            report.char_denominator = count_errors(align_chars(permissive, hyp, config.cost), std::nullopt).ref_len;
        }
        break;
    case Denominator::FirstOption:
        report.word_denominator = first_option_length(moded);
        report.char_denominator = first_option_chars(moded);
        break;
    }

    const Ratio wer = error_ratio(report.counts.errors(false), report.word_denominator);
    const Ratio relaxed = error_ratio(report.counts.errors(true), report.word_denominator);
    const Ratio cer = error_ratio(report.char_counts.errors(false), report.char_denominator);
    report.wer = wer.value;
    report.wer_relaxed = relaxed.value;
    report.cer = cer.value;
    report.degenerate = wer.degenerate || cer.degenerate;
    return out;
}

MetricReport evaluate_sample(const Annotation& annotation, std::string_view hypothesis, const EvalConfig& config)
{
    return evaluate_sample_detailed(annotation, hypothesis, config).report;
}

namespace {

struct Pooled {
    double wer = 0.0;
    double wer_relaxed = 0.0;
    double cer = 0.0;
    bool degenerate = false;
};

Pooled pool(std::span<const MetricReport> reports, std::span<const std::size_t> pick, Weighting weighting)
{
    Pooled out;
    if (weighting == Weighting::Macro) {
        for (std::size_t i : pick) {
            out.wer += reports[i].wer;
            out.wer_relaxed += reports[i].wer_relaxed;
            out.cer += reports[i].cer;
            out.degenerate = out.degenerate || reports[i].degenerate;
        }
        const auto n = static_cast<double>(pick.size());
        out.wer /= n;
        out.wer_relaxed /= n;
        out.cer /= n;
        return out;
    }
    std::size_t raw = 0;
    std::size_t relaxed = 0;
    std::size_t chars = 0;
    std::size_t word_den = 0;
    std::size_t char_den = 0;
    for (std::size_t i : pick) {
        raw += reports[i].counts.errors(false);
        relaxed += reports[i].counts.errors(true);
        chars += reports[i].char_counts.errors(false);
        word_den += reports[i].word_denominator;
        char_den += reports[i].char_denominator;
    }
    const Ratio w = error_ratio(raw, word_den);
    const Ratio r = error_ratio(relaxed, word_den);
    const Ratio c = error_ratio(chars, char_den);
    out.wer = w.value;
    out.wer_relaxed = r.value;
    out.cer = c.value;
    out.degenerate = w.degenerate || c.degenerate;
    return out;
}

double percentile(std::vector<double>& sorted, double q)
{
    // Linear interpolation between closest ranks.
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

} // namespace

MetricReport aggregate(std::span<const MetricReport> reports, Weighting weighting, const AggregateOptions& options)
{
    if (reports.empty()) {
        throw Error(ErrorCode::EmptyCorpus, "nothing to aggregate");
    }
    MetricReport out;
    out.mode = reports.front().mode;
    out.denominator = reports.front().denominator;
    out.weighting = weighting;
    out.samples = reports.size();
    for (const auto& report : reports) {
        out.counts += report.counts;
        out.char_counts += report.char_counts;
        out.word_denominator += report.word_denominator;
        out.char_denominator += report.char_denominator;
    }

    std::vector<std::size_t> all(reports.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = i;
    }
    const Pooled pooled = pool(reports, all, weighting);
    out.wer = pooled.wer;
    out.wer_relaxed = pooled.wer_relaxed;
    out.cer = pooled.cer;
    out.degenerate = pooled.degenerate;

    if (options.resamples > 0) {
        // Raw generator output modulo n keeps the resampling identical across
        // standard library implementations.
        std::mt19937_64 rng(options.seed);
        std::vector<double> stats;
        stats.reserve(options.resamples);
        std::vector<std::size_t> pick(reports.size());
        for (std::size_t b = 0; b < options.resamples; ++b) {
            for (auto& idx : pick) {
                idx = static_cast<std::size_t>(rng() % reports.size());
            }
            stats.push_back(pool(reports, pick, weighting).wer);
        }
        std::sort(stats.begin(), stats.end());
        out.wer_ci = std::make_pair(percentile(stats, 0.025), percentile(stats, 0.975));
    }
    return out;
}

} // namespace mwer
