#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include <l2g/graph.hpp>
#include <l2g/run_io.hpp>

#include "oracles.hpp"

using namespace l2g;
using Catch::Matchers::WithinAbs;

namespace {

RankedList make_list(Interner& docs, const std::string& qid,
                     const std::vector<std::string>& ids) {
    RankedList list;
    list.qid = qid;
    for (const auto& id : ids)
        list.docs.push_back(docs.intern(id));
    return list;
}

// q1: [d1, d2, d3], q2: [d2, d3, d4]; by hand the raw cells are
//   d1: 9 6 3 0 / d2: 6 13 8 3 / d3: 3 8 5 2 / d4: 0 3 2 1.
struct Toy {
    Interner docs;
    AffinityGraph graph;
    DocRef d1, d2, d3, d4;

    Toy() {
        auto q1 = make_list(docs, "q1", {"d1", "d2", "d3"});
        auto q2 = make_list(docs, "q2", {"d2", "d3", "d4"});
        graph.ingest(q1);
        graph.ingest(q2);
        d1 = *docs.find("d1");
        d2 = *docs.find("d2");
        d3 = *docs.find("d3");
        d4 = *docs.find("d4");
    }
};

} // namespace

TEST_CASE("rank weights count down from list length") {
    Interner docs;
    auto list = make_list(docs, "q", {"a", "b", "c"});
    auto sv = score_vector(list);
    REQUIRE(sv.entries.size() == 3);
    CHECK(sv.entries[0].second == 3);
    CHECK(sv.entries[1].second == 2);
    CHECK(sv.entries[2].second == 1);
    CHECK(sv.weight_of(list.docs[2]) == 1);

    auto dup = make_list(docs, "q2", {"a", "a"});
    CHECK_THROWS_AS(score_vector(dup), InputError);
    RankedList empty;
    empty.qid = "q3";
    CHECK_THROWS_AS(score_vector(empty), InputError);
}

TEST_CASE("toy graph matches hand-computed cells") {
    Toy toy;
    auto& g = toy.graph;
    CHECK(g.raw(toy.d1, toy.d1) == 9);
    CHECK(g.raw(toy.d1, toy.d2) == 6);
    CHECK(g.raw(toy.d1, toy.d3) == 3);
    CHECK(g.raw(toy.d1, toy.d4) == 0);
    CHECK(g.raw(toy.d2, toy.d2) == 13);
    CHECK(g.raw(toy.d2, toy.d3) == 8);
    CHECK(g.raw(toy.d2, toy.d4) == 3);
    CHECK(g.raw(toy.d3, toy.d3) == 5);
    CHECK(g.raw(toy.d3, toy.d4) == 2);
    CHECK(g.raw(toy.d4, toy.d4) == 1);
    CHECK(g.raw(toy.d3, toy.d2) == 8); // symmetric

    CHECK(g.df(toy.d1) == 1);
    CHECK(g.df(toy.d2) == 2);
    CHECK(g.df(toy.d3) == 2);
    CHECK(g.df(toy.d4) == 1);
    CHECK(g.queries_ingested() == 2);
    CHECK(g.doc_count() == 4);
    CHECK(g.edge_count() == 5);
    CHECK(g.stored_cells() == 9);
}

TEST_CASE("idf weights and weighted affinities") {
    Toy toy;
    auto& g = toy.graph;
    CHECK_THAT(g.idf_weight(toy.d1), WithinAbs(1.442695040889, 1e-9));
    CHECK_THAT(g.idf_weight(toy.d2), WithinAbs(0.910239226627, 1e-9));
    CHECK_THAT(g.weighted_affinity(toy.d1, toy.d2), WithinAbs(7.879185709663, 1e-9));
    CHECK_THAT(g.weighted_affinity(toy.d2, toy.d3), WithinAbs(6.628283597522, 1e-9));

    // Changing the log base rescales weights uniformly.
    double scale = g.idf_weight(toy.d1, 10.0) / g.idf_weight(toy.d1);
    CHECK_THAT(g.idf_weight(toy.d2, 10.0) / g.idf_weight(toy.d2), WithinAbs(scale, 1e-12));

    Interner other;
    other.intern("ghost");
    AffinityGraph fresh;
    CHECK_THROWS_AS(fresh.idf_weight(DocRef{0}), NotFoundError);
}

TEST_CASE("incremental graph equals dense gram oracle on random streams") {
    Interner docs;
    auto stream = oracle::random_stream(docs, 40, 12, 120, 7);
    AffinityGraph graph;
    oracle::DenseGram dense(docs.size());
    for (const auto& entry : stream.entries) {
        graph.ingest(entry.pool);
        dense.add(entry.pool);
    }
    for (std::uint32_t a = 0; a < docs.size(); ++a)
        for (std::uint32_t b = 0; b < docs.size(); ++b)
            REQUIRE(graph.raw(DocRef{a}, DocRef{b}) == dense.at(a, b));
    for (std::uint32_t a = 0; a < docs.size(); ++a)
        REQUIRE(graph.df(DocRef{a}) == dense.df(a));
}

TEST_CASE("batch update equals one-by-one ingest and any permutation") {
    Interner docs;
    auto stream = oracle::random_stream(docs, 24, 10, 60, 11);
    std::vector<RankedList> lists;
    for (const auto& entry : stream.entries)
        lists.push_back(entry.pool);

    AffinityGraph one_by_one;
    for (const auto& list : lists)
        one_by_one.ingest(list);

    AffinityGraph batched;
    std::vector<RankedList> chunk1(lists.begin(), lists.begin() + 9);
    std::vector<RankedList> chunk2(lists.begin() + 9, lists.end());
    batched.batch_update(chunk1);
    batched.batch_update(chunk2);
    CHECK(batched == one_by_one);

    AffinityGraph permuted;
    std::vector<RankedList> reversed(lists.rbegin(), lists.rend());
    permuted.batch_update(reversed);
    CHECK(permuted == one_by_one);
}

TEST_CASE("batch report attributes cells to old/new blocks") {
    Interner docs;
    AffinityGraph graph;
    graph.ingest(make_list(docs, "q1", {"a", "b"}));

    // One new doc c joining old docs a, b: cells aa/ab/bb old-old, ac/bc
    // old-new, cc new-new.
    auto report = graph.batch_update({make_list(docs, "q2", {"a", "b", "c"})});
    CHECK(report.new_docs == 1);
    CHECK(report.touched_cells == 6);
    CHECK(report.old_old_cells == 3);
    CHECK(report.old_new_cells == 2);
    CHECK(report.new_new_cells == 1);
}

TEST_CASE("duplicate qid ingests are counted, not dropped") {
    Interner docs;
    AffinityGraph graph;
    graph.ingest(make_list(docs, "q1", {"a", "b"}));
    graph.ingest(make_list(docs, "q1", {"a", "b"}));
    CHECK(graph.duplicate_qid_count() == 1);
    CHECK(graph.queries_ingested() == 2);
    CHECK(graph.raw(*docs.find("a"), *docs.find("b")) == 4);
}

TEST_CASE("stats sizes the sparse structure, empty graph is all zeros") {
    Interner docs;
    AffinityGraph empty;
    auto zero = stats(empty, docs);
    CHECK(zero.doc_count == 0);
    CHECK(zero.edge_count == 0);
    CHECK(zero.queries_ingested == 0);
    CHECK(zero.estimated_bytes == 0);

    Toy toy;
    auto s = stats(toy.graph, toy.docs);
    CHECK(s.doc_count == 4);
    CHECK(s.edge_count == 5);
    CHECK(s.queries_ingested == 2);
    // 8 id bytes + 4*16 + 4*4 + 5*8 + 9*12 = 236.
    CHECK(s.estimated_bytes == 236);
}

TEST_CASE("restore rebuilds an identical graph") {
    Toy toy;
    std::vector<std::tuple<std::uint32_t, std::uint32_t, std::int64_t>> cells;
    for (std::uint32_t a = 0; a < 4; ++a)
        for (std::uint32_t b = a; b < 4; ++b) {
            auto v = toy.graph.raw(DocRef{a}, DocRef{b});
            if (v != 0)
                cells.emplace_back(a, b, v);
        }
    auto rebuilt = AffinityGraph::restore({1, 2, 2, 1}, 2, cells);
    CHECK(rebuilt == toy.graph);
    CHECK(toy.graph == rebuilt);
}
