// Minimal end-to-end walkthrough: synthesize a small query stream, run it
// once with plain sliding windows and once graph-adaptively, and print the
// call budgets plus a few learned neighbor lists.

#include <iostream>
#include <sstream>

#include <l2g/l2g.hpp>

int main() {
    // Three queries over a shared candidate space; q1 and q2 agree on the
    // d* docs, so the graph should tie those together.
    const char* run_text =
        "q1 Q0 d1 1 9.0 demo\n"
        "q1 Q0 d2 2 8.0 demo\n"
        "q1 Q0 d3 3 7.0 demo\n"
        "q1 Q0 e1 4 6.0 demo\n"
        "q1 Q0 e2 5 5.0 demo\n"
        "q2 Q0 d2 1 9.0 demo\n"
        "q2 Q0 d3 2 8.0 demo\n"
        "q2 Q0 d1 3 7.0 demo\n"
        "q2 Q0 e3 4 6.0 demo\n"
        "q2 Q0 e4 5 5.0 demo\n"
        "q3 Q0 e1 1 9.0 demo\n"
        "q3 Q0 d1 2 8.0 demo\n"
        "q3 Q0 e3 3 7.0 demo\n"
        "q3 Q0 d2 4 6.0 demo\n"
        "q3 Q0 e2 5 5.0 demo\n";

    l2g::Interner docs;
    std::istringstream in(run_text);
    auto lists = l2g::parse_run_file(in, docs);
    auto stream = l2g::to_stream(std::move(lists));

    l2g::GarConfig cfg;
    cfg.window = 4;
    cfg.step = 2;
    cfg.pool_size = 5;
    cfg.neighbors_per_doc = 2;

    l2g::IdentityReranker identity;

    cfg.mode = l2g::Mode::sliding;
    l2g::AffinityGraph graph;
    auto plain = l2g::run_stream(stream, cfg, identity, graph);
    std::cout << "sliding: " << plain.reranker_calls << " window calls over "
              << plain.results.size() << " queries\n";

    // The graph grown by the first pass now steers a second, adaptive pass.
    cfg.mode = l2g::Mode::gar_l2g;
    l2g::IdentityReranker identity2;
    auto adaptive = l2g::run_stream(stream, cfg, identity2, graph);
    std::cout << "gar_l2g: " << adaptive.reranker_calls << " window calls\n";

    auto d1 = docs.find("d1");
    l2g::PoolView view(graph, stream.entries[0].pool.docs, cfg.propagation);
    std::cout << "neighbors of d1 in q1's pool:";
    for (const auto& [doc, score] : view.neighbors(*d1, 3))
        std::cout << " " << docs.external_id(doc);
    std::cout << "\n";

    std::ostringstream out;
    std::vector<l2g::RankedList> rankings;
    for (auto& r : adaptive.results)
        rankings.push_back(std::move(r.ranking));
    l2g::write_run_file(out, rankings, docs, "demo");
    std::cout << out.str();
    return 0;
}
