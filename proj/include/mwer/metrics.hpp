#pragma once

#include "mwer/align.hpp"
#include "mwer/annotation.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mwer {

inline constexpr std::size_t default_insertion_cap = 4;

struct ErrorCounts {
    std::size_t correct = 0;
    std::size_t replacements = 0;
    std::size_t deletions = 0;
    std::size_t insertions_raw = 0;
    std::size_t insertions_capped = 0;
    std::size_t wildcard_absorbed = 0;
    std::size_t ref_len = 0; // correct + replacements + deletions

    std::size_t errors(bool relaxed) const
    {
        return replacements + deletions + (relaxed ? insertions_capped : insertions_raw);
    }

    ErrorCounts& operator+=(const ErrorCounts& other);
    friend bool operator==(const ErrorCounts&, const ErrorCounts&) = default;
};

// Each maximal run of consecutive insertions contributes min(run, cap) to
// insertions_capped; no cap leaves it equal to insertions_raw.
ErrorCounts count_errors(std::span<const AlignmentStep> steps, std::optional<std::size_t> cap = default_insertion_cap);
ErrorCounts count_errors(const Alignment& alignment, std::optional<std::size_t> cap = default_insertion_cap);

struct Ratio {
    double value = 0.0;
    bool degenerate = false; // errors over an empty reference, reported with denominator 1
};

Ratio error_ratio(std::size_t errors, std::size_t denominator);
Ratio compute_wer(const ErrorCounts& counts, bool relaxed);

/// Which reference length divides the error count.
enum class Denominator {
    // Tokens on the optimal path of the permissive-mode alignment. Equal to
    // Path in permissive mode; keeps strict and permissive WER comparable.
    PermissivePath,
    // Tokens on the optimal path of the alignment being scored.
    Path,
    // Tokens when every block takes its first option.
    FirstOption,
};

std::string_view denominator_name(Denominator d);
Denominator parse_denominator(std::string_view name);

struct EvalConfig {
    TokenizerConfig tokenizer;
    Mode mode = Mode::Permissive;
    std::optional<std::size_t> insertion_cap = default_insertion_cap;
    CostConfig cost;
    Denominator denominator = Denominator::PermissivePath;
};

enum class Weighting { Micro, Macro };

std::string_view weighting_name(Weighting w);
Weighting parse_weighting(std::string_view name);

struct MetricReport {
    double wer = 0.0;
    double wer_relaxed = 0.0;
    double cer = 0.0;
    ErrorCounts counts;      // word level
    ErrorCounts char_counts; // character level, uncapped
    std::size_t word_denominator = 0;
    std::size_t char_denominator = 0;
    Mode mode = Mode::Permissive;
    Denominator denominator = Denominator::PermissivePath;
    bool degenerate = false;
    std::size_t samples = 1;
    std::optional<Weighting> weighting;                // set on aggregated reports
    std::optional<std::pair<double, double>> wer_ci;   // bootstrap 95% interval
};

struct SampleEvaluation {
    MetricReport report;
    Alignment words;
    Alignment chars;
    FlatView flat; // word-level view of the mode-applied annotation
};

SampleEvaluation evaluate_sample_detailed(const Annotation& annotation, std::string_view hypothesis,
                                          const EvalConfig& config = {});
MetricReport evaluate_sample(const Annotation& annotation, std::string_view hypothesis,
                             const EvalConfig& config = {});

struct AggregateOptions {
    std::size_t resamples = 1000;
    std::uint64_t seed = 0;
};

// Throws EmptyCorpus on an empty list.
MetricReport aggregate(std::span<const MetricReport> reports, Weighting weighting,
                       const AggregateOptions& options = {});

} // namespace mwer
