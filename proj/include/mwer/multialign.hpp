#pragma once

#include "mwer/align.hpp"
#include "mwer/annotation.hpp"
#include "mwer/metrics.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mwer {

enum class ColumnKind { Reference, Wildcard, Slot };

std::string_view column_kind_name(ColumnKind kind);

struct ColumnLabel {
    std::optional<std::size_t> option; // none for plain words
    std::string token;
};

/// One display column of the shared reference spine. Tokens of a block that
/// sit at the same offset in different options share a column and are told
/// apart by their labels.
struct SpineColumn {
    ColumnKind kind = ColumnKind::Reference;
    std::size_t segment = 0;
    std::size_t offset = 0;
    std::vector<ColumnLabel> labels;
    std::optional<std::size_t> anchor; // slots: preceding non-slot column, none if leading
};

struct Cell {
    StepKind kind = StepKind::Correct;
    std::optional<std::string> ref;
    std::optional<std::string> hyp;
    std::optional<std::size_t> option;
    std::optional<NodeId> ref_node;
};

struct MultiRow {
    std::string name;
    std::vector<std::optional<Cell>> cells; // one entry per column
    MetricReport report;
    Alignment alignment;
};

struct MultiAlignment {
    std::vector<SpineColumn> columns;
    std::vector<MultiRow> rows;
    FlatView flat;
};

MultiAlignment multi_align(const Annotation& annotation,
                           const std::vector<std::pair<std::string, std::string>>& hypotheses,
                           const EvalConfig& config = {});

struct Disagreement {
    std::size_t column = 0;
    double fraction = 0.0;
};

// Columns where at least one row is in error and the error fraction reaches
// the threshold, worst first.
std::vector<Disagreement> disagreement_report(const MultiAlignment& ma, double threshold);

} // namespace mwer
