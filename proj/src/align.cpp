#include "mwer/align.hpp"

#include "mwer/error.hpp"
#include "mwer/utf8.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <unordered_map>

namespace mwer {

namespace {

std::uint32_t saturating_add(std::uint32_t a, std::uint32_t b)
{
    const std::uint32_t sum = a + b;
    return sum < a ? std::numeric_limits<std::uint32_t>::max() : sum;
}

void add_edge(std::vector<std::vector<NodeId>>& successors, NodeId from, NodeId to)
{
    successors[from].push_back(to);
}

void finalize_edges(FlatView& flat)
{
    flat.predecessors.assign(flat.nodes.size(), {});
    for (NodeId u = 0; u < flat.successors.size(); ++u) {
        auto& succ = flat.successors[u];
        std::sort(succ.begin(), succ.end());
        succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
        for (NodeId v : succ) {
            flat.predecessors[v].push_back(u);
        }
    }
}

NodeId push_node(FlatView& flat, FlatNode node)
{
    flat.nodes.push_back(std::move(node));
    flat.successors.emplace_back();
    return static_cast<NodeId>(flat.nodes.size() - 1);
}

} // namespace

bool FlatView::has_edge(NodeId from, NodeId to) const
{
    const auto& succ = successors.at(from);
    return std::binary_search(succ.begin(), succ.end(), to);
}

FlatView flatten(const Annotation& annotation)
{
    FlatView flat;
    push_node(flat, FlatNode{NodeKind::Start, Token{}, {}});

    // Nodes after which the next segment may begin.
    std::vector<NodeId> frontier{0};
    bool previous_wildcard = false;

    auto link = [&flat](const std::vector<NodeId>& from, NodeId to) {
        for (NodeId u : from) {
            add_edge(flat.successors, u, to);
        }
    };

    for (std::size_t s = 0; s < annotation.segments.size(); ++s) {
        const Segment& segment = annotation.segments[s];
        if (const auto* plain = std::get_if<PlainSegment>(&segment)) {
            const NodeId id = push_node(flat, FlatNode{NodeKind::Token, plain->token, NodeOrigin{s, std::nullopt, 0}});
            link(frontier, id);
            frontier = {id};
            previous_wildcard = false;
        } else if (std::holds_alternative<WildcardSegment>(segment)) {
            if (previous_wildcard) {
                continue;
            }
            const NodeId id = push_node(flat, FlatNode{NodeKind::Wildcard, Token("<*>"), NodeOrigin{s, std::nullopt, 0}});
            link(frontier, id);
            // A wildcard may match nothing, so the old frontier stays open.
            frontier.push_back(id);
            previous_wildcard = true;
        } else {
            const auto& block = std::get<BlockSegment>(segment);
            std::vector<NodeId> next;
            bool has_empty = false;
            for (std::size_t o = 0; o < block.options.size(); ++o) {
                const Option& option = block.options[o];
                if (option.empty()) {
                    has_empty = true;
                    continue;
                }
                std::vector<NodeId> from = frontier;
                for (std::size_t t = 0; t < option.tokens.size(); ++t) {
                    const NodeId id = push_node(flat, FlatNode{NodeKind::Token, option.tokens[t], NodeOrigin{s, o, t}});
                    link(from, id);
                    from = {id};
                }
                next.push_back(from.front());
            }
            if (has_empty) {
                next.insert(next.end(), frontier.begin(), frontier.end());
            }
            std::sort(next.begin(), next.end());
            next.erase(std::unique(next.begin(), next.end()), next.end());
            frontier = std::move(next);
            previous_wildcard = false;
        }
    }

    const NodeId end = push_node(flat, FlatNode{NodeKind::End, Token{}, {}});
    link(frontier, end);
    finalize_edges(flat);
    return flat;
}

FlatView expand_chars(const FlatView& flat)
{
    FlatView out;
    std::vector<NodeId> first(flat.size());
    std::vector<NodeId> last(flat.size());
    for (NodeId u = 0; u < flat.size(); ++u) {
        const FlatNode& node = flat.nodes[u];
        if (node.kind != NodeKind::Token) {
            first[u] = last[u] = push_node(out, node);
            continue;
        }
        const std::u32string cps = utf8::decode(node.token.text);
        for (std::size_t k = 0; k < cps.size(); ++k) {
            std::string ch;
            utf8::append(ch, cps[k]);
            const NodeId id = push_node(out, FlatNode{NodeKind::Token, Token(ch), node.origin});
            if (k == 0) {
                first[u] = id;
            } else {
                add_edge(out.successors, id - 1, id);
            }
            last[u] = id;
        }
    }
    for (NodeId u = 0; u < flat.size(); ++u) {
        for (NodeId v : flat.successors[u]) {
            add_edge(out.successors, last[u], first[v]);
        }
    }
    finalize_edges(out);
    return out;
}

std::vector<Token> split_chars(std::span<const Token> tokens)
{
    std::vector<Token> out;
    for (const Token& token : tokens) {
        for (char32_t cp : utf8::decode(token.text)) {
            std::string ch;
            utf8::append(ch, cp);
            out.emplace_back(ch);
        }
    }
    return out;
}

ScoreTuple& ScoreTuple::operator+=(const ScoreTuple& other)
{
    word_errors = saturating_add(word_errors, other.word_errors);
    correct_matches = saturating_add(correct_matches, other.correct_matches);
    char_errors = saturating_add(char_errors, other.char_errors);
    return *this;
}

int CostConfig::compare(const ScoreTuple& a, const ScoreTuple& b) const
{
    if (a.word_errors != b.word_errors) {
        return a.word_errors < b.word_errors ? -1 : 1;
    }
    for (TieBreak rule : tie_breaks) {
        switch (rule) {
        case TieBreak::MaxCorrectMatches:
            if (a.correct_matches != b.correct_matches) {
                return a.correct_matches > b.correct_matches ? -1 : 1;
            }
            break;
        case TieBreak::MinCharErrors:
            if (a.char_errors != b.char_errors) {
                return a.char_errors < b.char_errors ? -1 : 1;
            }
            break;
        }
    }
    return 0;
}

std::string_view step_kind_name(StepKind kind)
{
    switch (kind) {
    case StepKind::Correct: return "correct";
    case StepKind::Replacement: return "replacement";
    case StepKind::Insertion: return "insertion";
    case StepKind::Deletion: return "deletion";
    case StepKind::WildcardAbsorbed: return "wildcard";
    }
    return "unknown";
}

StepKind parse_step_kind(std::string_view name)
{
    for (StepKind kind : {StepKind::Correct, StepKind::Replacement, StepKind::Insertion, StepKind::Deletion,
                          StepKind::WildcardAbsorbed}) {
        if (step_kind_name(kind) == name) {
            return kind;
        }
    }
    throw Error(ErrorCode::InvalidInput, "unknown step kind '" + std::string(name) + "'");
}

bool is_error(StepKind kind)
{
    return kind == StepKind::Replacement || kind == StepKind::Insertion || kind == StepKind::Deletion;
}

std::size_t char_distance(std::u32string_view a, std::u32string_view b)
{
    if (a.size() < b.size()) {
        std::swap(a, b);
    }
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) {
        row[j] = j;
    }
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = std::min({up + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
            diag = up;
        }
    }
    return row[b.size()];
}

std::uint32_t char_cost(const Token& ref_token, const Token* hyp_token, StepKind kind, GapCharCost gap)
{
    switch (kind) {
    case StepKind::Correct:
    case StepKind::WildcardAbsorbed:
        return 0;
    case StepKind::Replacement:
        return static_cast<std::uint32_t>(
            char_distance(utf8::decode(ref_token.text), utf8::decode(hyp_token != nullptr ? hyp_token->text : "")));
    case StepKind::Insertion:
        if (gap == GapCharCost::Zero) {
            return 0;
        }
        return static_cast<std::uint32_t>(utf8::length(hyp_token != nullptr ? hyp_token->text : ref_token.text));
    case StepKind::Deletion:
        return gap == GapCharCost::Zero ? 0 : static_cast<std::uint32_t>(utf8::length(ref_token.text));
    }
    return 0;
}

namespace {

enum Move : std::uint32_t { Diagonal = 0, Vertical = 1, Horizontal = 2 };

constexpr std::uint32_t move_shift = 30;
constexpr std::uint32_t pred_mask = (1u << move_shift) - 1;
constexpr std::uint32_t uncached = std::numeric_limits<std::uint32_t>::max();

// Replacement character costs between interned elements, filled lazily.
class ReplacementCosts {
public:
    ReplacementCosts(const std::vector<std::u32string>& vocab, std::size_t ref_vocab, std::size_t hyp_vocab)
        : vocab_(vocab)
    {
        constexpr std::size_t max_table = std::size_t{1} << 24;
        if (ref_vocab * hyp_vocab <= max_table) {
            stride_ = hyp_vocab;
            table_.assign(ref_vocab * hyp_vocab, uncached);
        }
    }

    std::uint32_t get(std::uint32_t ref_id, std::uint32_t ref_local, std::uint32_t hyp_id, std::uint32_t hyp_local)
    {
        if (table_.empty()) {
            return distance(ref_id, hyp_id);
        }
        std::uint32_t& slot = table_[ref_local * stride_ + hyp_local];
        if (slot == uncached) {
            slot = distance(ref_id, hyp_id);
        }
        return slot;
    }

private:
    std::uint32_t distance(std::uint32_t a, std::uint32_t b) const
    {
        return static_cast<std::uint32_t>(char_distance(vocab_[a], vocab_[b]));
    }

    const std::vector<std::u32string>& vocab_;
    std::vector<std::uint32_t> table_;
    std::size_t stride_ = 0;
};

struct Interner {
    std::unordered_map<std::string, std::uint32_t> ids;
    std::vector<std::u32string> text;

    std::uint32_t intern(const std::string& s)
    {
        auto [it, inserted] = ids.emplace(s, static_cast<std::uint32_t>(text.size()));
        if (inserted) {
            text.push_back(utf8::decode(s));
        }
        return it->second;
    }
};

} // namespace

Alignment align(const FlatView& flat, std::span<const Token> hypothesis, const CostConfig& cost)
{
    if (flat.size() < 2 || flat.nodes.front().kind != NodeKind::Start || flat.nodes.back().kind != NodeKind::End) {
        throw Error(ErrorCode::EmptyFlatView, "flat view lacks start/end sentinels");
    }
    if (flat.size() > pred_mask) {
        throw Error(ErrorCode::InvalidInput, "reference too long");
    }
    for (std::size_t j = 0; j < hypothesis.size(); ++j) {
        if (is_wildcard_text(hypothesis[j].text)) {
            throw Error(ErrorCode::WildcardInHypothesis, "hypothesis token #" + std::to_string(j) + " is '<*>'");
        }
    }

    const std::size_t n_nodes = flat.size();
    const std::size_t n_hyp = hypothesis.size();
    const std::size_t width = n_hyp + 1;
    const bool gap_chars = cost.gap_char_cost == GapCharCost::TokenLength;

    // Intern elements so that equality and replacement costs are cheap.
    Interner interner;
    std::vector<std::uint32_t> ref_id(n_nodes, 0);
    std::vector<std::uint32_t> ref_local(n_nodes, 0);
    std::vector<std::uint32_t> ref_len(n_nodes, 0);
    std::unordered_map<std::uint32_t, std::uint32_t> ref_locals;
    for (NodeId v = 0; v < n_nodes; ++v) {
        if (flat.nodes[v].kind == NodeKind::Token) {
            ref_id[v] = interner.intern(flat.nodes[v].token.text);
            ref_len[v] = static_cast<std::uint32_t>(interner.text[ref_id[v]].size());
            ref_local[v] = ref_locals.emplace(ref_id[v], static_cast<std::uint32_t>(ref_locals.size())).first->second;
        }
    }
    std::vector<std::uint32_t> hyp_id(n_hyp);
    std::vector<std::uint32_t> hyp_local(n_hyp);
    std::vector<std::uint32_t> hyp_len(n_hyp);
    std::unordered_map<std::uint32_t, std::uint32_t> hyp_locals;
    for (std::size_t j = 0; j < n_hyp; ++j) {
        hyp_id[j] = interner.intern(hypothesis[j].text);
        hyp_len[j] = static_cast<std::uint32_t>(interner.text[hyp_id[j]].size());
        hyp_local[j] = hyp_locals.emplace(hyp_id[j], static_cast<std::uint32_t>(hyp_locals.size())).first->second;
    }
    ReplacementCosts replacement(interner.text, ref_locals.size(), hyp_locals.size());

    // Score rows are released once every successor has been filled; the
    // back-pointer matrix is kept whole for traceback.
    std::vector<NodeId> last_use(n_nodes, 0);
    for (NodeId u = 0; u < n_nodes; ++u) {
        last_use[u] = flat.successors[u].empty() ? u : flat.successors[u].back();
    }
    std::vector<std::vector<ScoreTuple>> rows(n_nodes);
    std::vector<std::uint32_t> back(n_nodes * width);

    // Start row: leading insertions.
    rows[0].resize(width);
    back[0] = (Vertical << move_shift);
    for (std::size_t j = 1; j < width; ++j) {
        ScoreTuple step{1, 0, gap_chars ? hyp_len[j - 1] : 0};
        rows[0][j] = rows[0][j - 1] + step;
        back[j] = (Horizontal << move_shift);
    }

    for (NodeId v = 1; v < n_nodes; ++v) {
        const NodeKind kind = flat.nodes[v].kind;
        const auto& preds = flat.predecessors[v];
        auto& row = rows[v];
        row.resize(width);
        std::uint32_t* back_row = back.data() + static_cast<std::size_t>(v) * width;

        ScoreTuple vertical_step{};
        if (kind == NodeKind::Token) {
            vertical_step = ScoreTuple{1, 0, gap_chars ? ref_len[v] : 0};
        }

        for (std::size_t j = 0; j < width; ++j) {
            ScoreTuple best{};
            std::uint32_t best_back = 0;
            bool have = false;
            auto consider = [&](const ScoreTuple& candidate, std::uint32_t move, NodeId pred) {
                if (!have || cost.compare(candidate, best) < 0) {
                    best = candidate;
                    best_back = (move << move_shift) | pred;
                    have = true;
                }
            };

            // On ties the first candidate wins: gaps before matches, so the
            // traceback (which runs backwards) leaves gaps at the tail.
            for (NodeId u : preds) {
                consider(rows[u][j] + vertical_step, Vertical, u);
            }
            if (kind != NodeKind::End && j > 0) {
                ScoreTuple step{};
                if (kind != NodeKind::Wildcard) {
                    step = ScoreTuple{1, 0, gap_chars ? hyp_len[j - 1] : 0};
                }
                consider(row[j - 1] + step, Horizontal, v);
            }
            if (kind == NodeKind::Token && j > 0) {
                const bool equal = ref_id[v] == hyp_id[j - 1];
                ScoreTuple step = equal
                                      ? ScoreTuple{0, 1, 0}
                                      : ScoreTuple{1, 0, replacement.get(ref_id[v], ref_local[v], hyp_id[j - 1],
                                                                         hyp_local[j - 1])};
                for (NodeId u : preds) {
                    consider(rows[u][j - 1] + step, Diagonal, u);
                }
            }
            row[j] = best;
            back_row[j] = best_back;
        }

        for (NodeId u : preds) {
            if (last_use[u] == v) {
                std::vector<ScoreTuple>().swap(rows[u]);
            }
        }
    }

    Alignment result;
    const NodeId end = flat.end();
    result.score = rows[end][n_hyp];

    NodeId v = end;
    std::size_t j = n_hyp;
    result.ref_path.push_back(end);
    while (!(v == 0 && j == 0)) {
        const std::uint32_t packed = back[static_cast<std::size_t>(v) * width + j];
        const auto move = static_cast<Move>(packed >> move_shift);
        const NodeId pred = packed & pred_mask;
        const FlatNode& node = flat.nodes[v];
        switch (move) {
        case Diagonal: {
            const Token& hyp = hypothesis[j - 1];
            const StepKind step_kind = ref_id[v] == hyp_id[j - 1] ? StepKind::Correct : StepKind::Replacement;
            result.steps.push_back(AlignmentStep{step_kind, node.token, hyp, v});
            v = pred;
            --j;
            result.ref_path.push_back(v);
            break;
        }
        case Vertical:
            if (node.kind == NodeKind::Token) {
                result.steps.push_back(AlignmentStep{StepKind::Deletion, node.token, std::nullopt, v});
            }
            v = pred;
            result.ref_path.push_back(v);
            break;
        case Horizontal:
            if (node.kind == NodeKind::Wildcard) {
                result.steps.push_back(AlignmentStep{StepKind::WildcardAbsorbed, std::nullopt, hypothesis[j - 1], v});
            } else {
                result.steps.push_back(AlignmentStep{StepKind::Insertion, std::nullopt, hypothesis[j - 1], std::nullopt});
            }
            --j;
            break;
        }
    }
    std::reverse(result.steps.begin(), result.steps.end());
    std::reverse(result.ref_path.begin(), result.ref_path.end());
    return result;
}

Alignment align_chars(const FlatView& flat, std::span<const Token> hypothesis, const CostConfig& cost)
{
    for (std::size_t j = 0; j < hypothesis.size(); ++j) {
        if (is_wildcard_text(hypothesis[j].text)) {
            throw Error(ErrorCode::WildcardInHypothesis, "hypothesis token #" + std::to_string(j) + " is '<*>'");
        }
    }
    const FlatView chars = expand_chars(flat);
    const std::vector<Token> hyp_chars = split_chars(hypothesis);
    return align(chars, hyp_chars, cost);
}

} // namespace mwer
