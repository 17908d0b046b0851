#include "doctest.h"

#include "mwer/corpus.hpp"
#include "mwer/error.hpp"
#include "mwer/json_io.hpp"
#include "streaming_fixtures.hpp"
#include "temp_dir.hpp"

#include <sstream>

using namespace mwer;

TEST_CASE("history round trip")
{
    EchoMock echo({{"r", {"a", "b"}}, {"s", {"c"}}});
    VirtualClock clock;
    const SessionHistory h = run_session(echo, {AudioPlan{"r", {0.5, 0.5}}, AudioPlan{"s", {0.25}}}, clock);
    std::stringstream buf;
    write_history(buf, h);
    const SessionHistory back = read_history(buf);
    REQUIRE(back.inputs.size() == h.inputs.size());
    REQUIRE(back.outputs.size() == h.outputs.size());
    REQUIRE(back.processing.intervals.size() == h.processing.intervals.size());
    for (std::size_t i = 0; i < h.outputs.size(); ++i) {
        CHECK(back.outputs[i].text == h.outputs[i].text);
        CHECK(back.outputs[i].emit_time == h.outputs[i].emit_time);
        CHECK(back.outputs[i].chunk_seq == h.outputs[i].chunk_seq);
    }
    CHECK(back.recordings() == h.recordings());
}

TEST_CASE("history errors carry the line number")
{
    std::stringstream buf;
    buf << R"({"type":"input","recording_id":"r","seq":0,"duration":0.5,"send_time":0})" << '\n'
        << R"({"type":"bogus"})" << '\n';
    try {
        read_history(buf);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("timed words round trip and validation")
{
    const auto words = fixture::timed({"one", "two", "three"});
    const auto back = timed_words_from_json(to_json(words));
    REQUIRE(back.size() == 3);
    CHECK(back[1].word.text == "two");
    CHECK(back[2].start == words[2].start);
    CHECK_THROWS_AS(timed_words_from_json(json::parse(R"([{"word":"a b","start":0,"end":1}])")), Error);
    CHECK_THROWS_AS(timed_words_from_json(json::parse(R"([{"word":"a","start":1,"end":0.5}])")), Error);
    CHECK_THROWS_AS(timed_words_from_json(json::parse(R"([{"word":"a","start":1,"end":2},{"word":"b","start":0,"end":3}])")),
                    Error);
}

TEST_CASE("corpus load keeps bad lines as failures")
{
    TempDir dir("json");
    const auto path = dir.write("c.jsonl", R"({"v":1,"id":"a","annotation":"x","hypotheses":{"m":"x"}})"
                                           "\n\nnot json\n"
                                           R"({"v":1,"id":"a","annotation":"y","hypotheses":{}})"
                                           "\n"
                                           R"({"id":"b","annotation":"y","hypotheses":{}})"
                                           "\n");
    const Corpus c = load_corpus(path);
    REQUIRE(c.records.size() == 1);
    REQUIRE(c.failures.size() == 3);
    CHECK(c.failures[0].line == 3);
    CHECK(c.failures[1].line == 4);
    CHECK(c.failures[2].line == 5);
    CHECK_THROWS_AS(load_corpus(dir.path / "missing.jsonl"), Error);
}

TEST_CASE("saving rewrites only edited lines")
{
    TempDir dir("json");
    const std::string first = R"({"v":1, "id":"a", "annotation":"x", "hypotheses":{"m":"x"}, "extra":[1, 2]})";
    const std::string second = R"({"v":1,   "id":"b","annotation":"y","hypotheses":{}})";
    const auto path = dir.write("c.jsonl", first + "\n" + second + "\n");
    Corpus c = load_corpus(path);
    set_annotation(*c.find("a"), "{x|z}");
    save_corpus(c);
    const std::string text = slurp(path);
    CHECK(text == R"({"v":1,"id":"a","annotation":"{x|z}","hypotheses":{"m":"x"},"extra":[1,2]})" "\n" + second + "\n");
}

TEST_CASE("dumps are stable")
{
    const json j{{"b", 1}, {"a", 0.1}};
    CHECK(dump_line(j) == R"({"b":1,"a":0.1})");
    CHECK(dump_pretty(j) == "{\n  \"b\": 1,\n  \"a\": 0.1\n}\n");
}
