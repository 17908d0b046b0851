#pragma once

#include "mwer/annotation.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mwer {

using NodeId = std::uint32_t;

enum class NodeKind { Start, End, Token, Wildcard };

// Where a flat-view node came from in the annotation.
struct NodeOrigin {
    std::size_t segment = 0;
    std::optional<std::size_t> option; // set for tokens inside a block
    std::size_t offset = 0;            // token index within the option
};

struct FlatNode {
    NodeKind kind = NodeKind::Token;
    Token token;
    NodeOrigin origin;
};

/// Reference DAG: node 0 is the start sentinel, the last node is the end
/// sentinel, and every edge points from a lower to a higher index.
struct FlatView {
    std::vector<FlatNode> nodes;
    std::vector<std::vector<NodeId>> successors;
    std::vector<std::vector<NodeId>> predecessors;

    NodeId start() const { return 0; }
    NodeId end() const { return static_cast<NodeId>(nodes.size() - 1); }
    std::size_t size() const { return nodes.size(); }
    bool has_edge(NodeId from, NodeId to) const;
};

FlatView flatten(const Annotation& annotation);

// Character-level view: each token node becomes a chain of one-character nodes.
FlatView expand_chars(const FlatView& flat);
std::vector<Token> split_chars(std::span<const Token> tokens);

/// Lexicographic alignment cost. Word errors always dominate; the remaining
/// components break ties in the order configured by CostConfig.
struct ScoreTuple {
    std::uint32_t word_errors = 0;
    std::uint32_t correct_matches = 0;
    std::uint32_t char_errors = 0;

    friend bool operator==(const ScoreTuple&, const ScoreTuple&) = default;
    ScoreTuple& operator+=(const ScoreTuple& other);
    friend ScoreTuple operator+(ScoreTuple a, const ScoreTuple& b) { return a += b; }
};

enum class TieBreak { MaxCorrectMatches, MinCharErrors };

enum class GapCharCost { TokenLength, Zero };

struct CostConfig {
    std::vector<TieBreak> tie_breaks{TieBreak::MaxCorrectMatches, TieBreak::MinCharErrors};
    GapCharCost gap_char_cost = GapCharCost::TokenLength;

    // Negative if a is better than b, positive if worse, zero on a full tie.
    int compare(const ScoreTuple& a, const ScoreTuple& b) const;
};

enum class StepKind { Correct, Replacement, Insertion, Deletion, WildcardAbsorbed };

std::string_view step_kind_name(StepKind kind);
StepKind parse_step_kind(std::string_view name);
bool is_error(StepKind kind);

struct AlignmentStep {
    StepKind kind = StepKind::Correct;
    std::optional<Token> ref_token;
    std::optional<Token> hyp_token;
    std::optional<NodeId> ref_node;
};

struct Alignment {
    std::vector<AlignmentStep> steps;
    ScoreTuple score;
    std::vector<NodeId> ref_path; // start and end sentinels included
};

std::size_t char_distance(std::u32string_view a, std::u32string_view b);

std::uint32_t char_cost(const Token& ref_token, const Token* hyp_token, StepKind kind,
                        GapCharCost gap = GapCharCost::TokenLength);

// Optimal alignment of a plain hypothesis against the reference DAG.
// Throws WildcardInHypothesis if a hypothesis token is the wildcard symbol.
Alignment align(const FlatView& flat, std::span<const Token> hypothesis, const CostConfig& cost = {});

// Same engine with characters as elements; word boundaries are dropped.
Alignment align_chars(const FlatView& flat, std::span<const Token> hypothesis, const CostConfig& cost = {});

} // namespace mwer
