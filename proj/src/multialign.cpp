#include "mwer/multialign.hpp"

#include "mwer/error.hpp"

#include <algorithm>
#include <map>

namespace mwer {

namespace {

using ColumnKey = std::pair<std::size_t, std::size_t>; // (segment, offset)

ColumnKey key_of(const FlatNode& node)
{
    return {node.origin.segment, node.origin.option ? node.origin.offset : 0};
}

bool on_reference(StepKind kind)
{
    return kind == StepKind::Correct || kind == StepKind::Replacement || kind == StepKind::Deletion;
}

Cell make_cell(const AlignmentStep& step, const FlatView& flat)
{
    Cell cell;
    cell.kind = step.kind;
    if (step.ref_token) {
        cell.ref = step.ref_token->text;
    }
    if (step.hyp_token) {
        cell.hyp = step.hyp_token->text;
    }
    cell.ref_node = step.ref_node;
    if (step.ref_node) {
        cell.option = flat.nodes[*step.ref_node].origin.option;
    }
    return cell;
}

} // namespace

std::string_view column_kind_name(ColumnKind kind)
{
    switch (kind) {
    case ColumnKind::Reference: return "reference";
    case ColumnKind::Wildcard: return "wildcard";
    case ColumnKind::Slot: return "slot";
    }
    return "?";
}

MultiAlignment multi_align(const Annotation& annotation,
                           const std::vector<std::pair<std::string, std::string>>& hypotheses,
                           const EvalConfig& config)
{
    if (hypotheses.empty()) {
        throw Error(ErrorCode::EmptyInput, "multi_align needs at least one hypothesis");
    }

    MultiAlignment ma;
    for (const auto& [name, text] : hypotheses) {
        SampleEvaluation eval = evaluate_sample_detailed(annotation, text, config);
        if (ma.rows.empty()) {
            ma.flat = std::move(eval.flat);
        }
        MultiRow row;
        row.name = name;
        row.report = eval.report;
        row.alignment = std::move(eval.words);
        ma.rows.push_back(std::move(row));
    }
    const FlatView& flat = ma.flat;

    // Reference columns: union of the nodes visited by any row.
    std::map<ColumnKey, SpineColumn> spine;
    for (const auto& row : ma.rows) {
        for (NodeId v : row.alignment.ref_path) {
            const FlatNode& node = flat.nodes[v];
            if (node.kind == NodeKind::Start || node.kind == NodeKind::End) {
                continue;
            }
            auto [it, fresh] = spine.try_emplace(key_of(node));
            SpineColumn& col = it->second;
            if (fresh) {
                col.kind = node.kind == NodeKind::Wildcard ? ColumnKind::Wildcard : ColumnKind::Reference;
                col.segment = node.origin.segment;
                col.offset = key_of(node).second;
            }
            const std::string text = node.kind == NodeKind::Wildcard ? "<*>" : node.token.text;
            const bool known = std::any_of(col.labels.begin(), col.labels.end(), [&](const ColumnLabel& l) {
                return l.option == node.origin.option;
            });
            if (!known) {
                col.labels.push_back(ColumnLabel{node.origin.option, text});
            }
        }
    }
    std::vector<ColumnKey> keys;
    std::map<ColumnKey, std::size_t> rank;
    for (auto& [key, col] : spine) {
        std::sort(col.labels.begin(), col.labels.end(),
                  [](const ColumnLabel& a, const ColumnLabel& b) { return a.option < b.option; });
        rank[key] = keys.size();
        keys.push_back(key);
    }

    // Per row: cells pinned to reference columns, plus off-reference runs
    // keyed by the rank of the preceding reference column (0 = leading).
    struct Placement {
        std::vector<std::optional<Cell>> pinned;
        std::vector<std::vector<Cell>> runs;
    };
    std::vector<Placement> placements(ma.rows.size());
    std::vector<std::size_t> widths(keys.size() + 1, 0);
    for (std::size_t r = 0; r < ma.rows.size(); ++r) {
        Placement& p = placements[r];
        p.pinned.resize(keys.size());
        p.runs.resize(keys.size() + 1);
        std::size_t anchor = 0;
        for (const auto& step : ma.rows[r].alignment.steps) {
            if (on_reference(step.kind)) {
                const std::size_t c = rank.at(key_of(flat.nodes[*step.ref_node]));
                p.pinned[c] = make_cell(step, flat);
                anchor = c + 1;
                continue;
            }
            if (step.kind == StepKind::WildcardAbsorbed) {
                anchor = rank.at(key_of(flat.nodes[*step.ref_node])) + 1;
            }
            p.runs[anchor].push_back(make_cell(step, flat));
        }
        for (std::size_t a = 0; a <= keys.size(); ++a) {
            widths[a] = std::max(widths[a], p.runs[a].size());
        }
    }

    std::vector<std::size_t> column_of(keys.size());
    std::vector<std::size_t> slot_start(keys.size() + 1);
    auto add_slots = [&](std::size_t a, std::optional<std::size_t> anchor_column) {
        slot_start[a] = ma.columns.size();
        for (std::size_t k = 0; k < widths[a]; ++k) {
            SpineColumn slot;
            slot.kind = ColumnKind::Slot;
            slot.anchor = anchor_column;
            if (anchor_column) {
                slot.segment = ma.columns[*anchor_column].segment;
                slot.offset = k;
            }
            ma.columns.push_back(std::move(slot));
        }
    };
    add_slots(0, std::nullopt);
    for (std::size_t c = 0; c < keys.size(); ++c) {
        column_of[c] = ma.columns.size();
        ma.columns.push_back(std::move(spine.at(keys[c])));
        add_slots(c + 1, column_of[c]);
    }

    for (std::size_t r = 0; r < ma.rows.size(); ++r) {
        auto& cells = ma.rows[r].cells;
        cells.assign(ma.columns.size(), std::nullopt);
        for (std::size_t c = 0; c < keys.size(); ++c) {
            cells[column_of[c]] = std::move(placements[r].pinned[c]);
        }
        for (std::size_t a = 0; a <= keys.size(); ++a) {
            for (std::size_t k = 0; k < placements[r].runs[a].size(); ++k) {
                cells[slot_start[a] + k] = std::move(placements[r].runs[a][k]);
            }
        }
    }
    return ma;
}

std::vector<Disagreement> disagreement_report(const MultiAlignment& ma, double threshold)
{
    std::vector<Disagreement> out;
    if (ma.rows.empty()) {
        return out;
    }
    for (std::size_t c = 0; c < ma.columns.size(); ++c) {
        std::size_t errors = 0;
        for (const auto& row : ma.rows) {
            if (row.cells[c] && is_error(row.cells[c]->kind)) {
                ++errors;
            }
        }
        const double fraction = static_cast<double>(errors) / static_cast<double>(ma.rows.size());
        if (errors > 0 && fraction >= threshold) {
            out.push_back(Disagreement{c, fraction});
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Disagreement& a, const Disagreement& b) { return a.fraction > b.fraction; });
    return out;
}

} // namespace mwer
