#include "doctest.h"

#include "cli_helpers.hpp"
#include "mwer/corpus.hpp"
#include "mwer/error.hpp"
#include "oracles.hpp"
#include "streaming_fixtures.hpp"
#include "temp_dir.hpp"

#include <fstream>

using namespace mwer;

namespace {

std::string record(const std::string& id, const std::string& annotation,
                   const std::vector<std::pair<std::string, std::string>>& hyps)
{
    json h = json::object();
    for (const auto& [k, v] : hyps) h[k] = v;
    return dump_line(json{{"v", 1}, {"id", id}, {"annotation", annotation}, {"hypotheses", h}}) + "\n";
}

json read_json(const std::filesystem::path& p)
{
    return json::parse(slurp(p));
}

} // namespace

TEST_CASE("align")
{
    const CliRun ok = run({"align", "--ref", "{one|1}", "--hyp", "1", "--json"});
    CHECK(ok.code == 0);
    const json j = json::parse(ok.out);
    CHECK(j["report"]["wer"].get<double>() == 0.0);
    CHECK(j["alignment"]["steps"].size() == 1);

    const CliRun bad = run({"align", "--ref", "{a", "--hyp", "a"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("UnbalancedBrace") != std::string::npos);
    CHECK(bad.err.find("^^") != std::string::npos);

    CHECK(run({"align", "--ref", "a", "--hyp", "b <*>"}).code == 2);
    CHECK(run({"align", "--ref", "a"}).code == 2);
    CHECK(run({"align", "--ref", "a", "--hyp", "a", "--insertion-cap", "lots"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"--help"}).code == 0);

    const CliRun pretty = run({"align", "--ref", "hello world", "--hyp", "hey world"});
    CHECK(pretty.code == 0);
    CHECK(pretty.out.find("REF:") != std::string::npos);
    CHECK(pretty.out.find("WER 0.5000") != std::string::npos);
}

TEST_CASE("eval on a perfect corpus")
{
    TempDir dir("cli");
    const auto corpus = dir.write("c.jsonl", record("a", "the cat", {{"m", "the cat"}})
                                                 + record("b", "{one|1} two", {{"m", "1 two"}})
                                                 + record("c", "x <*> y", {{"m", "x q r y"}}));
    const CliRun r = run({"eval", corpus.string(), "--out", (dir.path / "out").string()});
    CHECK(r.code == 0);
    const json agg = read_json(dir.path / "out" / "aggregate.json");
    REQUIRE(agg["models"].size() == 1);
    CHECK(agg["models"][0]["report"]["wer"].get<double>() == 0.0);
    CHECK(agg["failures"].empty());
    CHECK(agg["v"] == 1);
}

TEST_CASE("eval on a mixed corpus matches the oracle")
{
    TempDir dir("cli");
    oracle::Generator gen(11);
    std::string lines;
    std::vector<std::pair<Annotation, std::string>> samples;
    for (int i = 0; i < 40; ++i) {
        const std::string ann = gen.annotation(4, 3);
        const std::string hyp = gen.join(gen.words(0, 8));
        lines += record("s" + std::to_string(i), ann, {{"m", hyp}});
        samples.emplace_back(parse_annotation(ann), hyp);
    }
    const auto corpus = dir.write("c.jsonl", lines);
    REQUIRE(run({"eval", corpus.string(), "--out", (dir.path / "p").string()}).code == 0);
    REQUIRE(run({"eval", corpus.string(), "--out", (dir.path / "s").string(), "--mode", "strict"}).code == 0);

    std::ifstream in(dir.path / "p" / "reports.jsonl");
    std::string line;
    std::size_t errors = 0;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        const json j = json::parse(line);
        const auto& [a, hyp] = samples.at(n);
        const std::size_t expected = oracle::expansion_distance(a, oracle::texts(tokenize(hyp)));
        const json& c = j["report"]["counts"];
        const std::size_t got = c["replacements"].get<std::size_t>() + c["deletions"].get<std::size_t>()
                                + c["insertions_raw"].get<std::size_t>();
        CHECK(got == expected);
        errors += got;
        ++n;
    }
    CHECK(n == samples.size());

    const json p = read_json(dir.path / "p" / "aggregate.json");
    const json s = read_json(dir.path / "s" / "aggregate.json");
    CHECK(s["models"][0]["report"]["wer"].get<double>() >= p["models"][0]["report"]["wer"].get<double>());
    CHECK(s["config"]["mode"] == "strict");
}

TEST_CASE("eval collects record failures and keeps going")
{
    TempDir dir("cli");
    const auto corpus = dir.write("c.jsonl", record("a", "the cat", {{"m", "the cat"}, {"n", "a <*>"}})
                                                 + record("b", "{broken", {{"m", "x"}}) + "garbage\n"
                                                 + record("c", "dog", {{"m", "dog"}}));
    const CliRun r = run({"eval", corpus.string(), "--out", (dir.path / "out").string()});
    CHECK(r.code == 1);
    const json agg = read_json(dir.path / "out" / "aggregate.json");
    CHECK(agg["failures"].size() == 3);
    CHECK(agg["models"][0]["report"]["samples"] == 2);
    CHECK(run({"eval", (dir.path / "nope.jsonl").string(), "--out", (dir.path / "x").string()}).code == 2);
}

TEST_CASE("eval is deterministic")
{
    TempDir dir("cli");
    oracle::Generator gen(3);
    std::string lines;
    for (int i = 0; i < 60; ++i) {
        lines += record("s" + std::to_string(i), gen.annotation(3, 3),
                        {{"b", gen.join(gen.words(0, 6))}, {"a", gen.join(gen.words(0, 6))}});
    }
    const auto corpus = dir.write("c.jsonl", lines);
    for (const char* out : {"1", "2"}) {
        REQUIRE(run({"eval", corpus.string(), "--out", (dir.path / out).string(), "--weighting", "macro"}).code == 0);
    }
    REQUIRE(run({"eval", corpus.string(), "--out", (dir.path / "3").string(), "--weighting", "macro", "--threads",
                 "1"}).code == 0);
    for (const char* f : {"reports.jsonl", "aggregate.json"}) {
        CHECK(slurp(dir.path / "1" / f) == slurp(dir.path / "2" / f));
        CHECK(slurp(dir.path / "1" / f) == slurp(dir.path / "3" / f));
    }
    const json agg = read_json(dir.path / "1" / "aggregate.json");
    CHECK(agg["models"][0]["name"] == "b");
    CHECK(agg["models"][0]["report"]["wer_ci"].size() == 2);
}

namespace {

struct StreamFiles {
    std::filesystem::path history;
    std::filesystem::path words;
    std::string annotation = "the {cat|kitten} sat on the mat";
    std::string final_text;
};

StreamFiles stream_files(const TempDir& dir, Pacing pacing, const std::string& name)
{
    const auto words = fixture::timed({"the", "cat", "sat", "on", "the", "mat"});
    ContextMock mock({{"r", words}}, 0.5, hashed_cost(1, 0.0, 0.2), true);
    VirtualClock clock;
    SessionOptions opts;
    opts.pacing = pacing;
    const SessionHistory h = run_session(mock, {AudioPlan{"r", fixture::chunks_covering(4.0, 0.25)}}, clock, opts);
    std::ostringstream buf;
    write_history(buf, h);
    StreamFiles f;
    f.history = dir.write(name + ".jsonl", buf.str());
    f.words = dir.write("words.json", dump_pretty(to_json(words)));
    f.final_text = merge_parts(h.outputs, session_end(h.inputs, h.outputs));
    return f;
}

} // namespace

TEST_CASE("stream-eval")
{
    TempDir dir("cli");
    const StreamFiles f = stream_files(dir, Pacing::Realtime, "real");
    const std::string out = (dir.path / "out").string();
    const CliRun r = run({"stream-eval", "--history", f.history.string(), "--timed-words", f.words.string(),
                          "--annotation", f.annotation, "--rows", "1", "--out", out});
    REQUIRE(r.code == 0);
    const json j = read_json(dir.path / "out" / "streaming.json");
    REQUIRE(j["samples"].size() == 1);
    REQUIRE(j["samples"][0]["rows"].size() == 1);
    const MetricReport offline = evaluate_sample(parse_annotation(f.annotation), f.final_text);
    const json& c = j["samples"][0]["rows"][0]["counts"];
    CHECK(c["replacements"] == offline.counts.replacements);
    CHECK(c["deletions"] == offline.counts.deletions);
    CHECK(c["insertions_raw"] == offline.counts.insertions_raw);
    CHECK(std::filesystem::exists(dir.path / "out" / "histogram.svg"));
    CHECK(std::filesystem::exists(dir.path / "out" / "diagram-r.svg"));
    CHECK(slurp(dir.path / "out" / "histogram.svg").rfind("<svg", 0) == 0);

    CHECK(run({"stream-eval", "--history", f.history.string(), "--out", out}).code == 2);
    CHECK(run({"stream-eval", "--history", f.history.string(), "--timed-words", f.words.string(), "--annotation",
               "{oops", "--out", out}).code == 2);
    CHECK(run({"stream-eval", "--history", f.history.string(), "--timed-words", f.words.string(), "--annotation",
               "the cat sat", "--out", out}).code == 2);
}

TEST_CASE("stream-eval --remap of a flood history matches the realtime run")
{
    TempDir dir("cli");
    const StreamFiles real = stream_files(dir, Pacing::Realtime, "real");
    const StreamFiles flood = stream_files(dir, Pacing::Flood, "flood");
    const auto base = std::vector<std::string>{"--timed-words", real.words.string(), "--annotation", real.annotation,
                                               "--rows", "8", "--recording", "r"};
    auto with = [&](std::vector<std::string> extra) {
        extra.insert(extra.begin(), "stream-eval");
        extra.insert(extra.end(), base.begin(), base.end());
        return run(extra);
    };
    REQUIRE(with({"--history", real.history.string(), "--out", (dir.path / "a").string()}).code == 0);
    REQUIRE(with({"--history", flood.history.string(), "--remap", "--out", (dir.path / "b").string()}).code == 0);
    const json a = read_json(dir.path / "a" / "streaming.json")["samples"][0]["rows"];
    const json b = read_json(dir.path / "b" / "streaming.json")["samples"][0]["rows"];
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i]["eval_time"].get<double>() == doctest::Approx(b[i]["eval_time"].get<double>()).epsilon(1e-6));
        CHECK(a[i]["hypothesis"] == b[i]["hypothesis"]);
        CHECK(a[i]["counts"] == b[i]["counts"]);
    }
}

TEST_CASE("stream-eval --remap rejects overlapping busy intervals")
{
    TempDir dir("cli");
    const StreamFiles f = stream_files(dir, Pacing::Realtime, "real");
    const auto bad = dir.write("bad.jsonl",
                               R"({"type":"input","recording_id":"r","seq":0,"duration":0.5,"send_time":0})" "\n"
                               R"({"type":"input","recording_id":"r","seq":1,"duration":0.5,"send_time":0})" "\n"
                               R"({"type":"busy","recording_id":"r","seq":0,"busy_start":0,"busy_end":0.4})" "\n"
                               R"({"type":"busy","recording_id":"r","seq":1,"busy_start":0.2,"busy_end":0.6})" "\n");
    const CliRun r = run({"stream-eval", "--history", bad.string(), "--timed-words", f.words.string(), "--annotation",
                          f.annotation, "--remap", "--out", (dir.path / "o").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("OverlappingBusyIntervals") != std::string::npos);
}
