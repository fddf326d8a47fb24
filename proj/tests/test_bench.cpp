#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include <l2g/bench.hpp>
#include <l2g/corpus.hpp>
#include <l2g/errors.hpp>

#include "oracles.hpp"

using namespace l2g;
using Catch::Matchers::WithinAbs;

namespace {

StreamEntry make_entry(Interner& docs, std::string qid, std::vector<std::string> ids) {
    StreamEntry entry;
    entry.query = QueryRecord{qid, std::nullopt};
    entry.pool.qid = std::move(qid);
    for (const auto& id : ids)
        entry.pool.docs.push_back(docs.intern(id));
    return entry;
}

} // namespace

TEST_CASE("phase summaries") {
    SECTION("odd counts take the middle value") {
        auto s = detail::summarize_phase({3.0, 1.0, 2.0});
        CHECK_THAT(s.median, WithinAbs(2.0, 1e-12));
        CHECK_THAT(s.mean, WithinAbs(2.0, 1e-12));
        CHECK_THAT(s.p95, WithinAbs(3.0, 1e-12));
    }
    SECTION("even counts average the middle pair") {
        auto s = detail::summarize_phase({4.0, 1.0, 3.0, 2.0});
        CHECK_THAT(s.median, WithinAbs(2.5, 1e-12));
        CHECK_THAT(s.mean, WithinAbs(2.5, 1e-12));
        CHECK_THAT(s.p95, WithinAbs(4.0, 1e-12));
    }
    SECTION("twenty values put p95 at the nineteenth") {
        std::vector<double> values;
        for (int i = 20; i >= 1; --i)
            values.push_back(i);
        auto s = detail::summarize_phase(values);
        CHECK_THAT(s.median, WithinAbs(10.5, 1e-12));
        CHECK_THAT(s.p95, WithinAbs(19.0, 1e-12));
    }
    SECTION("singletons and empties") {
        auto one = detail::summarize_phase({5.0});
        CHECK_THAT(one.median, WithinAbs(5.0, 1e-12));
        CHECK_THAT(one.p95, WithinAbs(5.0, 1e-12));
        auto none = detail::summarize_phase({});
        CHECK(none.median == 0.0);
        CHECK(none.mean == 0.0);
        CHECK(none.p95 == 0.0);
    }
}

TEST_CASE("bench walks the stream once per query") {
    Interner docs;
    QueryStream stream = oracle::random_stream(docs, 5, 30, 60, 3);
    BenchConfig cfg;
    cfg.gar.pool_size = 20;
    cfg.warmup = 2;

    BenchResult bench = bench_stream(stream, docs, cfg);
    REQUIRE(bench.records.size() == 5);
    CHECK(bench.summary.measured == 3);
    CHECK(bench.summary.warmup == 2);

    std::uint64_t prev_bytes = 0;
    for (std::size_t i = 0; i < bench.records.size(); ++i) {
        const auto& rec = bench.records[i];
        CHECK(rec.query_index == i);
        CHECK(rec.pool_size == 20);
        CHECK(rec.new_docs <= rec.pool_size);
        CHECK(rec.ingest_seconds >= 0.0);
        CHECK(rec.propagate_seconds >= 0.0);
        CHECK(rec.neighbors_seconds >= 0.0);
        CHECK(rec.graph_bytes >= prev_bytes);
        prev_bytes = rec.graph_bytes;
    }
    CHECK(bench.records[0].new_docs == 20);
    CHECK(bench.summary.peak_bytes == prev_bytes);
}

TEST_CASE("bench counts fresh docs against the pre-ingest graph") {
    Interner docs;
    QueryStream stream;
    stream.entries.push_back(make_entry(docs, "q1", {"a", "b", "c"}));
    stream.entries.push_back(make_entry(docs, "q2", {"b", "c", "d"}));
    BenchConfig cfg;
    cfg.warmup = 0;

    BenchResult bench = bench_stream(stream, docs, cfg);
    REQUIRE(bench.records.size() == 2);
    CHECK(bench.records[0].new_docs == 3);
    CHECK(bench.records[0].pool_size == 3);
    CHECK(bench.records[1].new_docs == 1);
    CHECK(bench.summary.measured == 2);
}

TEST_CASE("warmup larger than the stream leaves nothing measured") {
    Interner docs;
    QueryStream stream;
    stream.entries.push_back(make_entry(docs, "q1", {"a", "b"}));
    BenchConfig cfg;
    cfg.warmup = 5;

    BenchResult bench = bench_stream(stream, docs, cfg);
    CHECK(bench.summary.measured == 0);
    CHECK(bench.summary.ingest.median == 0.0);
    CHECK(bench.summary.peak_bytes == bench.records[0].graph_bytes);
}

TEST_CASE("extra passes keep sizes stable") {
    Interner docs;
    QueryStream stream = oracle::random_stream(docs, 4, 15, 40, 11);
    BenchConfig once;
    once.gar.pool_size = 15;
    BenchConfig thrice = once;
    thrice.repetitions = 3;

    BenchResult a = bench_stream(stream, docs, once);
    BenchResult b = bench_stream(stream, docs, thrice);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].graph_bytes == b.records[i].graph_bytes);
        CHECK(a.records[i].pool_size == b.records[i].pool_size);
        CHECK(a.records[i].new_docs == b.records[i].new_docs);
    }
}

TEST_CASE("bench input validation") {
    Interner docs;
    QueryStream stream;
    BenchConfig cfg;
    SECTION("empty stream") {
        CHECK_THROWS_AS(bench_stream(stream, docs, cfg), InputError);
    }
    SECTION("zero repetitions") {
        stream.entries.push_back(make_entry(docs, "q1", {"a"}));
        cfg.repetitions = 0;
        CHECK_THROWS_AS(bench_stream(stream, docs, cfg), ConfigError);
    }
    SECTION("invalid window config") {
        stream.entries.push_back(make_entry(docs, "q1", {"a"}));
        cfg.gar.step = cfg.gar.window + 1;
        CHECK_THROWS_AS(bench_stream(stream, docs, cfg), ConfigError);
    }
}

TEST_CASE("bench report prints rows then a summary block") {
    Interner docs;
    QueryStream stream;
    stream.entries.push_back(make_entry(docs, "q1", {"a", "b", "c"}));
    BenchConfig cfg;
    cfg.warmup = 0;

    BenchResult bench = bench_stream(stream, docs, cfg);
    std::ostringstream out;
    report_bench(bench, out);
    std::string text = out.str();

    CHECK(text.rfind("q,ingest_s,prop_s,nbr_s,bytes,pool,new_docs\n", 0) == 0);
    CHECK(text.find("\n0,") != std::string::npos);
    CHECK(text.find("# summary measured=1 warmup=0\n") != std::string::npos);
    CHECK(text.find("# ingest_s median=") != std::string::npos);
    CHECK(text.find("# prop_s median=") != std::string::npos);
    CHECK(text.find("# nbr_s median=") != std::string::npos);
    CHECK(text.find("# peak_bytes=" +
                    std::to_string(bench.summary.peak_bytes) + "\n") !=
          std::string::npos);

    std::size_t lines = 0;
    for (char c : text)
        lines += c == '\n';
    CHECK(lines == 1 + bench.records.size() + 5);
}
