#include "doctest.h"

#include "mwer/align.hpp"
#include "mwer/error.hpp"
#include "oracles.hpp"

#include <set>

using namespace mwer;

namespace {

Alignment align_text(std::string_view ref, std::string_view hyp, const CostConfig& cost = {})
{
    return align(flatten(parse_annotation(ref)), tokenize(hyp), cost);
}

std::vector<StepKind> kinds(const Alignment& a)
{
    std::vector<StepKind> out;
    for (const auto& s : a.steps) {
        out.push_back(s.kind);
    }
    return out;
}

void check_invariants(const FlatView& flat, const std::vector<Token>& hyp, const Alignment& a)
{
    std::vector<std::string> hyp_seen;
    std::size_t errors = 0;
    std::size_t correct = 0;
    for (const auto& s : a.steps) {
        if (s.hyp_token) {
            hyp_seen.push_back(s.hyp_token->text);
        }
        switch (s.kind) {
        case StepKind::Correct:
        case StepKind::Replacement:
            CHECK((s.ref_token && s.hyp_token && s.ref_node));
            break;
        case StepKind::Insertion:
            CHECK((!s.ref_token && s.hyp_token));
            break;
        case StepKind::Deletion:
            CHECK((s.ref_token && !s.hyp_token));
            break;
        case StepKind::WildcardAbsorbed:
            CHECK((!s.ref_token && s.hyp_token && s.ref_node));
            CHECK(flat.nodes[*s.ref_node].kind == NodeKind::Wildcard);
            break;
        }
        errors += is_error(s.kind) ? 1 : 0;
        correct += s.kind == StepKind::Correct ? 1 : 0;
    }
    CHECK(hyp_seen == oracle::texts(hyp));
    CHECK(a.score.word_errors == errors);
    CHECK(a.score.correct_matches == correct);
    REQUIRE(a.ref_path.size() >= 2);
    CHECK(a.ref_path.front() == flat.start());
    CHECK(a.ref_path.back() == flat.end());
    for (std::size_t i = 1; i < a.ref_path.size(); ++i) {
        CHECK(flat.has_edge(a.ref_path[i - 1], a.ref_path[i]));
    }
}

} // namespace

TEST_CASE("flat view of {A|B} {C} D has the optional-block jump")
{
    const FlatView flat = flatten(parse_annotation("{A|B} {C} D"));
    REQUIRE(flat.size() == 6);
    CHECK(flat.nodes[1].token.text == "a");
    CHECK(flat.nodes[4].token.text == "d");
    CHECK(flat.successors[0] == std::vector<NodeId>{1, 2});
    CHECK(flat.successors[1] == std::vector<NodeId>{3, 4});
    CHECK(flat.successors[2] == std::vector<NodeId>{3, 4});
    CHECK(flat.successors[3] == std::vector<NodeId>{4});
    CHECK(flat.successors[4] == std::vector<NodeId>{5});
    CHECK(flat.has_edge(1, 4));
    CHECK(flat.nodes[3].origin.option == std::optional<std::size_t>{0});
}

TEST_CASE("flat view of single token and lone wildcard")
{
    const FlatView one = flatten(parse_annotation("hello"));
    REQUIRE(one.size() == 3);
    CHECK(one.successors[0] == std::vector<NodeId>{1});
    CHECK(one.successors[1] == std::vector<NodeId>{2});

    const FlatView wild = flatten(parse_annotation("<*>"));
    REQUIRE(wild.size() == 3);
    CHECK(wild.nodes[1].kind == NodeKind::Wildcard);
    CHECK(wild.successors[0] == std::vector<NodeId>{1, 2});
    CHECK(wild.successors[1] == std::vector<NodeId>{2});
}

TEST_CASE("consecutive wildcards merge into one node")
{
    const FlatView flat = flatten(parse_annotation("a <*> <*> b"));
    CHECK(flat.size() == 5);
}

TEST_CASE("sibling options never connect")
{
    const FlatView flat = flatten(parse_annotation("{a b|c d}"));
    // a=1 b=2 c=3 d=4
    CHECK(flat.has_edge(1, 2));
    CHECK_FALSE(flat.has_edge(1, 4));
    CHECK_FALSE(flat.has_edge(2, 3));
    CHECK(flat.has_edge(3, 4));
}

TEST_CASE("multivariant aligns to multivariate, not to though")
{
    const Alignment a = align_text("multivariate though", "multivariant");
    REQUIRE(a.steps.size() == 2);
    CHECK(a.steps[0].kind == StepKind::Replacement);
    CHECK(a.steps[0].ref_token->text == "multivariate");
    CHECK(a.steps[0].hyp_token->text == "multivariant");
    CHECK(a.steps[1].kind == StepKind::Deletion);
    CHECK(a.steps[1].ref_token->text == "though");
    CHECK(a.score.word_errors == 2);
    // lev(multivariate, multivariant) = 2, plus the 6-char deletion
    CHECK(a.score.char_errors == 8);
}

TEST_CASE("identical sequences align as all-correct")
{
    const Alignment a = align_text("the quick brown fox", "the quick brown fox");
    CHECK(kinds(a) == std::vector<StepKind>(4, StepKind::Correct));
    CHECK(a.score == ScoreTuple{0, 4, 0});
}

TEST_CASE("wildcard absorbs a filler span")
{
    const Alignment a = align_text("a <*> b", "a x y z b");
    CHECK(kinds(a) == std::vector<StepKind>{StepKind::Correct, StepKind::WildcardAbsorbed, StepKind::WildcardAbsorbed,
                                            StepKind::WildcardAbsorbed, StepKind::Correct});
    CHECK(a.score == ScoreTuple{0, 2, 0});
    CHECK(oracle::wildcard_distance({"a", "<*>", "b"}, {"a", "x", "y", "z", "b"}) == 0);
}

TEST_CASE("block option chosen by the hypothesis")
{
    const Alignment a = align_text("{one|1}", "1");
    REQUIRE(a.steps.size() == 1);
    CHECK(a.steps[0].kind == StepKind::Correct);
    CHECK(a.score == ScoreTuple{0, 1, 0});
    CHECK(oracle::expansion_distance(parse_annotation("{one|1}"), {"1"}) == 0);
}

TEST_CASE("hello vs hey costs one word error and three character errors")
{
    const Token hey("hey");
    CHECK(char_cost(Token("hello"), &hey, StepKind::Replacement) == 3);
    const Alignment a = align_text("hello", "hey");
    REQUIRE(a.steps.size() == 1);
    CHECK(a.steps[0].kind == StepKind::Replacement);
    CHECK(a.score == ScoreTuple{1, 0, 3});
}

TEST_CASE("char_cost rules")
{
    const Token abc("abc");
    const Token x("x");
    CHECK(char_cost(abc, nullptr, StepKind::Deletion) == 3);
    CHECK(char_cost(x, &x, StepKind::Correct) == 0);
    CHECK(char_cost(abc, &x, StepKind::Insertion) == 1);
    CHECK(char_cost(abc, nullptr, StepKind::Deletion, GapCharCost::Zero) == 0);
    CHECK(char_cost(x, &abc, StepKind::WildcardAbsorbed) == 0);
    const Token cyr("привет");
    CHECK(char_cost(cyr, nullptr, StepKind::Deletion) == 6);
}

TEST_CASE("character-level alignment")
{
    const FlatView ab = flatten(parse_annotation("ab"));
    const Alignment same = align_chars(ab, tokenize("ab"));
    CHECK(kinds(same) == std::vector<StepKind>{StepKind::Correct, StepKind::Correct});
    CHECK(same.score == ScoreTuple{0, 2, 0});

    const Alignment diff = align_chars(ab, tokenize("ax"));
    CHECK(kinds(diff) == std::vector<StepKind>{StepKind::Correct, StepKind::Replacement});
    CHECK(diff.score.word_errors == 1);

    const Alignment block = align_chars(flatten(parse_annotation("{one|1}")), tokenize("one"));
    CHECK(kinds(block) == std::vector<StepKind>(3, StepKind::Correct));

    // word boundaries are not elements
    const Alignment joined = align_chars(flatten(parse_annotation("ab cd")), tokenize("abcd"));
    CHECK(joined.score.word_errors == 0);
}

TEST_CASE("character-level matches the expansion oracle")
{
    oracle::Generator gen(5);
    for (int i = 0; i < 200; ++i) {
        const auto a = parse_annotation(gen.annotation(3, 3));
        const auto hyp = tokenize(oracle::Generator::join(gen.words(0, 5)));
        std::u32string hyp_chars;
        for (const auto& t : hyp) hyp_chars += oracle::widen(t.text);
        std::size_t best = SIZE_MAX;
        for (const auto& e : oracle::expansions(a)) {
            std::u32string ref_chars;
            for (const auto& w : e) ref_chars += oracle::widen(w);
            best = std::min(best, oracle::char_lev(ref_chars, hyp_chars));
        }
        CHECK(align_chars(flatten(a), hyp).score.word_errors == best);
    }
}

TEST_CASE("wildcard in hypothesis is rejected")
{
    const FlatView flat = flatten(parse_annotation("a b"));
    CHECK_THROWS_AS(align(flat, tokenize("a <*> b")), Error);
    try {
        align(flat, tokenize("<*>"));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::WildcardInHypothesis);
    }
    CHECK_THROWS_AS(align_chars(flat, tokenize("<*>")), Error);
}

TEST_CASE("empty hypothesis and empty reference")
{
    const Alignment dels = align_text("a b c", "");
    CHECK(kinds(dels) == std::vector<StepKind>(3, StepKind::Deletion));
    Annotation empty;
    const Alignment ins = align(flatten(empty), tokenize("x y"));
    CHECK(kinds(ins) == std::vector<StepKind>(2, StepKind::Insertion));
    CHECK(align(flatten(empty), {}).steps.empty());
}

TEST_CASE("word errors equal the expansion oracle on random annotations")
{
    oracle::Generator gen(1234);
    for (int i = 0; i < 1000; ++i) {
        const auto a = parse_annotation(gen.annotation(4, 3));
        const auto hyp_words = gen.words(0, 12);
        const auto hyp = tokenize(oracle::Generator::join(hyp_words));
        const FlatView flat = flatten(a);
        const Alignment al = align(flat, hyp);
        REQUIRE_MESSAGE(al.score.word_errors == oracle::expansion_distance(a, hyp_words),
                        serialize(a) << " / " << oracle::Generator::join(hyp_words));
        check_invariants(flat, hyp, al);
    }
}

TEST_CASE("full score tuple is the lexicographic optimum")
{
    oracle::Generator gen(99);
    for (int i = 0; i < 300; ++i) {
        const auto a = parse_annotation(gen.annotation(2, 2));
        const auto hyp_words = gen.words(0, 4);
        oracle::Tuple best{SIZE_MAX, 0, 0};
        for (const auto& e : oracle::expansions(a)) {
            if (e.size() <= 6) {
                best = std::min(best, oracle::tuple_optimum(e, hyp_words));
            }
        }
        if (std::get<0>(best) == SIZE_MAX) {
            continue;
        }
        bool all_small = true;
        for (const auto& e : oracle::expansions(a)) all_small = all_small && e.size() <= 6;
        if (!all_small) continue;
        const Alignment al = align(flatten(a), tokenize(oracle::Generator::join(hyp_words)));
        CHECK(al.score.word_errors == std::get<0>(best));
        CHECK(static_cast<long>(al.score.correct_matches) == -std::get<1>(best));
        CHECK(al.score.char_errors == std::get<2>(best));
    }
}

TEST_CASE("plain references reduce to Wagner-Fischer")
{
    oracle::Generator gen(3);
    for (int i = 0; i < 300; ++i) {
        const auto ref = gen.words(1, 10);
        const auto hyp = gen.words(0, 10);
        const Alignment al = align_text(oracle::Generator::join(ref), oracle::Generator::join(hyp));
        CHECK(al.score.word_errors == oracle::levenshtein(ref, hyp));
    }
}

TEST_CASE("wildcards agree with the exhaustive wildcard oracle")
{
    oracle::Generator gen(77);
    for (int i = 0; i < 300; ++i) {
        auto ref = gen.words(1, 5);
        ref.insert(ref.begin() + static_cast<long>(gen.uniform(0, ref.size())), "<*>");
        const auto hyp = gen.words(0, 7);
        const Alignment al = align_text(oracle::Generator::join(ref), oracle::Generator::join(hyp));
        CHECK(al.score.word_errors == oracle::wildcard_distance(ref, hyp));
    }
}

TEST_CASE("tie-break plug-ins never change the word error optimum")
{
    oracle::Generator gen(42);
    CostConfig only_chars;
    only_chars.tie_breaks = {TieBreak::MinCharErrors};
    CostConfig none;
    none.tie_breaks = {};
    CostConfig reversed;
    reversed.tie_breaks = {TieBreak::MinCharErrors, TieBreak::MaxCorrectMatches};
    for (int i = 0; i < 200; ++i) {
        const auto a = parse_annotation(gen.annotation(3, 3));
        const auto hyp = tokenize(oracle::Generator::join(gen.words(0, 8)));
        const FlatView flat = flatten(a);
        const auto base = align(flat, hyp).score.word_errors;
        CHECK(align(flat, hyp, only_chars).score.word_errors == base);
        CHECK(align(flat, hyp, none).score.word_errors == base);
        CHECK(align(flat, hyp, reversed).score.word_errors == base);
    }
}

TEST_CASE("alignment is deterministic")
{
    const FlatView flat = flatten(parse_annotation("{a|b} c {d e|f} <*> g"));
    const auto hyp = tokenize("b x c f q q g");
    const Alignment first = align(flat, hyp);
    for (int i = 0; i < 5; ++i) {
        const Alignment again = align(flat, hyp);
        CHECK(kinds(again) == kinds(first));
        CHECK(again.ref_path == first.ref_path);
    }
}

TEST_CASE("score arithmetic saturates")
{
    ScoreTuple big{UINT32_MAX - 1, 0, UINT32_MAX};
    big += ScoreTuple{5, 1, 5};
    CHECK(big.word_errors == UINT32_MAX);
    CHECK(big.char_errors == UINT32_MAX);
    CHECK(big.correct_matches == 1);
}

TEST_CASE("ties leave gaps at the tail")
{
    const auto del = align(flatten(parse_annotation("a a")), tokenize("a"));
    REQUIRE(del.steps.size() == 2);
    CHECK(del.steps[0].kind == StepKind::Correct);
    CHECK(del.steps[1].kind == StepKind::Deletion);

    const auto ins = align(flatten(parse_annotation("a")), tokenize("a a"));
    REQUIRE(ins.steps.size() == 2);
    CHECK(ins.steps[0].kind == StepKind::Correct);
    CHECK(ins.steps[1].kind == StepKind::Insertion);
}
