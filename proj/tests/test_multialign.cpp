#include "doctest.h"

#include "mwer/error.hpp"
#include "mwer/multialign.hpp"
#include "oracles.hpp"

using namespace mwer;

namespace {

std::vector<std::size_t> reference_columns(const MultiAlignment& ma)
{
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < ma.columns.size(); ++c) {
        if (ma.columns[c].kind != ColumnKind::Slot) {
            out.push_back(c);
        }
    }
    return out;
}

// Non-empty cells of one row in column order.
std::vector<Cell> project(const MultiRow& row)
{
    std::vector<Cell> out;
    for (const auto& cell : row.cells) {
        if (cell) {
            out.push_back(*cell);
        }
    }
    return out;
}

void check_projection(const MultiRow& row)
{
    const auto cells = project(row);
    const auto& steps = row.alignment.steps;
    REQUIRE(cells.size() == steps.size());
    for (std::size_t i = 0; i < steps.size(); ++i) {
        CHECK(cells[i].kind == steps[i].kind);
        CHECK(cells[i].ref_node == steps[i].ref_node);
        CHECK(cells[i].hyp == (steps[i].hyp_token ? std::optional(steps[i].hyp_token->text) : std::nullopt));
    }
}

} // namespace

TEST_CASE("single hypothesis spine follows its path")
{
    const Annotation a = parse_annotation("the {cat|dog} sat");
    const MultiAlignment ma = multi_align(a, {{"m", "the dog sat down"}});
    REQUIRE(ma.rows.size() == 1);
    const auto refs = reference_columns(ma);
    const auto& path = ma.rows[0].alignment.ref_path;
    REQUIRE(refs.size() == path.size() - 2);
    for (std::size_t i = 0; i < refs.size(); ++i) {
        const NodeId v = path[i + 1];
        CHECK(ma.columns[refs[i]].segment == ma.flat.nodes[v].origin.segment);
    }
    check_projection(ma.rows[0]);
    CHECK(ma.columns.back().kind == ColumnKind::Slot);
    CHECK(ma.rows[0].cells.back()->kind == StepKind::Insertion);
    CHECK(ma.rows[0].report.counts == evaluate_sample(a, "the dog sat down").counts);
}

TEST_CASE("identical hypotheses give identical rows")
{
    const Annotation a = parse_annotation("a b c");
    const MultiAlignment ma = multi_align(a, {{"x", "a q c"}, {"y", "a q c"}});
    REQUIRE(ma.rows.size() == 2);
    const auto p = project(ma.rows[0]);
    const auto q = project(ma.rows[1]);
    REQUIRE(p.size() == q.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(p[i].kind == q[i].kind);
        CHECK(p[i].hyp == q[i].hyp);
    }
}

TEST_CASE("different options of one block share a column")
{
    const Annotation a = parse_annotation("{one|1} apple");
    const MultiAlignment ma = multi_align(a, {{"words", "one apple"}, {"digits", "1 apple"}});
    const auto refs = reference_columns(ma);
    REQUIRE(refs.size() == 2);
    const SpineColumn& block = ma.columns[refs[0]];
    REQUIRE(block.labels.size() == 2);
    CHECK(block.labels[0].option == 0u);
    CHECK(block.labels[0].token == "one");
    CHECK(block.labels[1].option == 1u);
    CHECK(block.labels[1].token == "1");
    const auto& c0 = ma.rows[0].cells[refs[0]];
    const auto& c1 = ma.rows[1].cells[refs[0]];
    REQUIRE(c0);
    REQUIRE(c1);
    CHECK(c0->kind == StepKind::Correct);
    CHECK(c1->kind == StepKind::Correct);
    CHECK(c0->option == 0u);
    CHECK(c1->option == 1u);
}

TEST_CASE("insertion slots are padded to the longest run")
{
    const Annotation a = parse_annotation("a b");
    const MultiAlignment ma = multi_align(a, {{"one", "a x b"}, {"three", "a x y z b"}, {"none", "a b"}});
    const auto refs = reference_columns(ma);
    REQUIRE(refs.size() == 2);
    CHECK(refs[1] - refs[0] - 1 == 3);
    for (std::size_t c = refs[0] + 1; c < refs[1]; ++c) {
        CHECK(ma.columns[c].kind == ColumnKind::Slot);
        CHECK(ma.columns[c].anchor == refs[0]);
    }
    for (const auto& row : ma.rows) {
        check_projection(row);
    }
}

TEST_CASE("wildcard absorption goes to slots after the wildcard column")
{
    const Annotation a = parse_annotation("hello <*> world");
    const MultiAlignment ma = multi_align(a, {{"m", "hello big wide world"}, {"n", "hello world"}});
    const auto refs = reference_columns(ma);
    REQUIRE(refs.size() == 3);
    CHECK(ma.columns[refs[1]].kind == ColumnKind::Wildcard);
    CHECK(refs[2] - refs[1] - 1 == 2);
    CHECK(ma.rows[0].cells[refs[1] + 1]->kind == StepKind::WildcardAbsorbed);
    CHECK_FALSE(ma.rows[1].cells[refs[1] + 1].has_value());
    CHECK(disagreement_report(ma, 0.0).empty());
}

TEST_CASE("every hypothesis token lands in exactly one cell")
{
    oracle::Generator gen(31);
    for (int i = 0; i < 200; ++i) {
        std::string text = gen.annotation(4, 3, true);
        if (i % 4 == 0) {
            text += " <*> d";
        }
        const Annotation a = parse_annotation(text);
        std::vector<std::pair<std::string, std::string>> hyps;
        for (int h = 0; h < 4; ++h) {
            hyps.emplace_back("m" + std::to_string(h), oracle::Generator::join(gen.words(0, 9)));
        }
        const MultiAlignment ma = multi_align(a, hyps);
        for (std::size_t r = 0; r < ma.rows.size(); ++r) {
            const auto& row = ma.rows[r];
            REQUIRE(row.cells.size() == ma.columns.size());
            check_projection(row);
            oracle::Words seen;
            for (std::size_t c = 0; c < row.cells.size(); ++c) {
                const auto& cell = row.cells[c];
                if (!cell) continue;
                if (cell->hyp) seen.push_back(*cell->hyp);
                if (cell->kind == StepKind::Insertion || cell->kind == StepKind::WildcardAbsorbed) {
                    CHECK(ma.columns[c].kind == ColumnKind::Slot);
                } else {
                    CHECK(ma.columns[c].kind == ColumnKind::Reference);
                    const FlatNode& node = ma.flat.nodes[*cell->ref_node];
                    CHECK(ma.columns[c].segment == node.origin.segment);
                }
            }
            CHECK(seen == oracle::texts(tokenize(hyps[r].second)));
        }
        // Reference columns follow the segment order of the annotation.
        const auto refs = reference_columns(ma);
        for (std::size_t k = 1; k < refs.size(); ++k) {
            const auto& p = ma.columns[refs[k - 1]];
            const auto& q = ma.columns[refs[k]];
            CHECK(std::pair(p.segment, p.offset) < std::pair(q.segment, q.offset));
        }
    }
}

TEST_CASE("disagreement report")
{
    const Annotation a = parse_annotation("the colour red");
    std::vector<std::pair<std::string, std::string>> hyps;
    for (int i = 0; i < 5; ++i) {
        hyps.emplace_back("m" + std::to_string(i), "the color red");
    }
    hyps.emplace_back("good", "the colour red");
    const MultiAlignment ma = multi_align(a, hyps);
    const auto report = disagreement_report(ma, 0.5);
    REQUIRE(report.size() == 1);
    CHECK(report[0].fraction == doctest::Approx(5.0 / 6.0));
    CHECK(ma.columns[report[0].column].labels[0].token == "colour");
    CHECK(disagreement_report(ma, 0.9).empty());

    const MultiAlignment perfect = multi_align(a, {{"x", "the colour red"}});
    CHECK(disagreement_report(perfect, 0.0).empty());

    const MultiAlignment mixed = multi_align(a, {{"x", "a colour"}, {"y", "the colour red extra"}});
    CHECK(disagreement_report(mixed, 0.0).size() == 3);
}

TEST_CASE("multi_align needs a hypothesis")
{
    CHECK_THROWS_AS(multi_align(parse_annotation("a"), {}), Error);
}
