// Command-line front end: build affinity graphs from run files, rerank query
// streams under a fixed window budget, evaluate with nDCG, benchmark the
// graph pipeline, and inspect files.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <l2g/l2g.hpp>

namespace {

constexpr int kExitParse = 2;
constexpr int kExitConfig = 3;
constexpr int kExitReranker = 4;
constexpr int kExitIo = 5;

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw l2g::IoError("cannot open '" + path + "' for reading");
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw l2g::IoError("cannot open '" + path + "' for writing");
    return out;
}

std::vector<l2g::RankedList> load_run(const std::string& path, l2g::Interner& docs) {
    auto in = open_input(path);
    try {
        return l2g::parse_run_file(in, docs);
    } catch (const l2g::ParseError& e) {
        throw l2g::ParseError(path + ": " + e.what());
    }
}

l2g::Qrels load_qrels(const std::string& path) {
    auto in = open_input(path);
    try {
        return l2g::parse_qrels(in);
    } catch (const l2g::ParseError& e) {
        throw l2g::ParseError(path + ": " + e.what());
    }
}

l2g::AffinityGraph load_graph(const std::string& path, l2g::Interner& docs) {
    auto in = open_input(path);
    return l2g::load_graph(in, docs);
}

void save_graph_file(const l2g::AffinityGraph& graph, const l2g::Interner& docs,
                     const std::string& path) {
    auto out = open_output(path);
    l2g::save_graph(graph, docs, out);
}

// identity | oracle | noisy:<swaps> | random | external:<command>
std::unique_ptr<l2g::Reranker> make_reranker(const std::string& spec,
                                             const l2g::Qrels* qrels,
                                             const l2g::Interner& docs,
                                             std::uint64_t seed,
                                             std::uint64_t timeout_ms) {
    if (spec == "identity")
        return std::make_unique<l2g::IdentityReranker>();
    if (spec == "random")
        return std::make_unique<l2g::RandomReranker>(seed);
    if (spec == "oracle" || spec.rfind("noisy:", 0) == 0) {
        if (!qrels)
            throw l2g::ConfigError("reranker '" + spec + "' needs --qrels");
        l2g::OracleConfig cfg;
        cfg.qrels = qrels;
        cfg.seed = seed;
        if (spec.rfind("noisy:", 0) == 0) {
            try {
                cfg.noise_swaps = std::stoul(spec.substr(6));
            } catch (const std::exception&) {
                throw l2g::ConfigError("bad swap count in reranker spec '" + spec + "'");
            }
        }
        return std::make_unique<l2g::OracleReranker>(cfg, docs);
    }
    if (spec.rfind("external:", 0) == 0) {
        std::string command = spec.substr(9);
        if (command.empty())
            throw l2g::ConfigError("external reranker spec has no command");
        return std::make_unique<l2g::ExternalReranker>(command, docs, timeout_ms);
    }
    throw l2g::ConfigError(
        "unknown reranker '" + spec +
        "' (expected identity|oracle|noisy:<swaps>|random|external:<command>)");
}

l2g::OrderPolicy order_policy_from_flag(std::string value) {
    for (auto& c : value)
        if (c == '-')
            c = '_';
    return l2g::parse_order_policy(value);
}

struct SharedFlags {
    std::string run_path;
    std::string qrels_path;
    std::string graph_path;
    std::string out_path;
    std::string mode = "sliding";
    std::string reranker = "identity";
    std::string order = "dataset";
    std::string fill = "alternate";
    std::string direction = "top_down";
    std::string gain = "exponential";
    std::size_t window = 20;
    std::size_t step = 10;
    std::size_t pool = 100;
    int hops = 3;
    std::size_t neighbors = 10;
    std::uint64_t seed = 0;
    std::uint64_t timeout_ms = 60000;
    bool no_idf = false;
    double log_base = 0.0;
};

l2g::GarConfig gar_config(const SharedFlags& flags) {
    l2g::GarConfig cfg;
    cfg.window = flags.window;
    cfg.step = flags.step;
    cfg.pool_size = flags.pool;
    cfg.mode = l2g::parse_mode(flags.mode);
    cfg.propagation.hops = flags.hops;
    cfg.propagation.use_idf = !flags.no_idf;
    cfg.propagation.log_base = flags.log_base;
    cfg.neighbors_per_doc = flags.neighbors;
    cfg.fill = l2g::parse_fill_policy(flags.fill);
    cfg.direction = l2g::parse_direction(flags.direction);
    cfg.seed = flags.seed;
    l2g::validate(cfg);
    return cfg;
}

int cmd_build_graph(const std::vector<std::string>& runs, const std::string& append,
                    const std::string& out_path) {
    l2g::Interner docs;
    l2g::AffinityGraph graph;
    if (!append.empty())
        graph = load_graph(append, docs);
    for (const auto& path : runs)
        for (const auto& list : load_run(path, docs))
            graph.ingest(list);
    save_graph_file(graph, docs, out_path);
    auto s = l2g::stats(graph, docs);
    std::cout << "docs=" << s.doc_count << " edges=" << s.edge_count
              << " queries=" << s.queries_ingested << " bytes=" << s.estimated_bytes
              << "\n";
    if (graph.duplicate_qid_count() > 0)
        std::cerr << "warning: " << graph.duplicate_qid_count()
                  << " duplicate qid(s) ingested\n";
    return 0;
}

int cmd_rerank(const SharedFlags& flags, const std::string& provenance_path,
               std::size_t threads) {
    l2g::Interner docs;
    auto lists = load_run(flags.run_path, docs);
    l2g::QueryStream stream = l2g::to_stream(std::move(lists));
    l2g::OrderPolicy order = order_policy_from_flag(flags.order);
    if (order != l2g::OrderPolicy::dataset)
        stream = l2g::order_stream(stream, order, flags.pool);

    l2g::GarConfig cfg = gar_config(flags);
    l2g::Qrels qrels;
    bool have_qrels = !flags.qrels_path.empty();
    if (have_qrels)
        qrels = load_qrels(flags.qrels_path);

    l2g::AffinityGraph graph;
    if (cfg.mode == l2g::Mode::gar_file) {
        if (flags.graph_path.empty())
            throw l2g::ConfigError("mode gar_file needs --graph");
        graph = load_graph(flags.graph_path, docs);
    }

    l2g::StreamRunResult result;
    if (threads > 1) {
        if (flags.reranker.rfind("external:", 0) == 0)
            throw l2g::ConfigError("--parallel cannot drive an external reranker");
        auto factory = [&](const std::string& qid) {
            return make_reranker(flags.reranker, have_qrels ? &qrels : nullptr, docs,
                                 l2g::rng::mix_seed(flags.seed, qid), flags.timeout_ms);
        };
        result = l2g::run_stream_parallel(stream, cfg, factory, graph, threads);
    } else {
        auto reranker = make_reranker(flags.reranker, have_qrels ? &qrels : nullptr,
                                      docs, flags.seed, flags.timeout_ms);
        result = l2g::run_stream(stream, cfg, *reranker, graph);
    }

    std::vector<l2g::RankedList> out_lists;
    out_lists.reserve(result.results.size());
    for (auto& r : result.results)
        out_lists.push_back(std::move(r.ranking));
    {
        auto out = open_output(flags.out_path);
        l2g::write_run_file(out, out_lists, docs, l2g::to_string(cfg.mode));
    }
    if (!provenance_path.empty()) {
        auto out = open_output(provenance_path);
        out << "qid,docid,rank,source\n";
        for (std::size_t i = 0; i < result.results.size(); ++i) {
            const auto& list = out_lists[i];
            const auto& prov = result.results[i].provenance;
            for (std::size_t r = 0; r < list.docs.size(); ++r)
                out << list.qid << "," << docs.external_id(list.docs[r]) << ","
                    << (r + 1) << "," << l2g::to_string(prov[r]) << "\n";
        }
    }
    if (!flags.graph_path.empty() && cfg.mode != l2g::Mode::gar_file)
        save_graph_file(graph, docs, flags.graph_path);

    std::cout << "queries=" << result.results.size()
              << " window_calls=" << result.reranker_calls << "\n";
    return 0;
}

int cmd_eval(const SharedFlags& flags, std::size_t k, const std::string& per_query_path) {
    l2g::Interner docs;
    auto run = load_run(flags.run_path, docs);
    auto qrels = load_qrels(flags.qrels_path);
    auto report = l2g::evaluate_run(run, qrels, docs, k, l2g::parse_gain(flags.gain));

    for (const auto& [qid, score] : report.per_query) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.4f", score);
        std::cout << qid << " " << buf << "\n";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", report.mean);
    std::cout << "mean_ndcg@" << report.k << "=" << buf
              << " scored=" << report.per_query.size() << " skipped=" << report.skipped;
    if (report.all_skipped)
        std::cout << " (all queries skipped)";
    std::cout << "\n";

    if (!flags.out_path.empty()) {
        auto out = open_output(flags.out_path);
        std::vector<std::pair<std::string, std::map<std::string, l2g::EvalReport>>> one;
        one.emplace_back(flags.run_path,
                         std::map<std::string, l2g::EvalReport>{{"run", report}});
        l2g::compare_runs(one, out);
    }
    if (!per_query_path.empty()) {
        auto out = open_output(per_query_path);
        l2g::write_per_query(report, out);
    }
    return 0;
}

int cmd_bench(const SharedFlags& flags, std::size_t warmup, std::size_t repetitions) {
    l2g::Interner docs;
    auto lists = load_run(flags.run_path, docs);
    l2g::QueryStream stream = l2g::to_stream(std::move(lists));
    l2g::BenchConfig cfg;
    cfg.gar = gar_config(flags);
    cfg.warmup = warmup;
    cfg.repetitions = repetitions;
    auto result = l2g::bench_stream(stream, docs, cfg);
    if (flags.out_path.empty()) {
        l2g::report_bench(result, std::cout);
    } else {
        auto out = open_output(flags.out_path);
        l2g::report_bench(result, out);
    }
    return 0;
}

int cmd_stats(const SharedFlags& flags) {
    if (!flags.graph_path.empty()) {
        l2g::Interner docs;
        auto graph = load_graph(flags.graph_path, docs);
        auto s = l2g::stats(graph, docs);
        std::cout << "docs,edges,queries,bytes\n"
                  << s.doc_count << "," << s.edge_count << "," << s.queries_ingested
                  << "," << s.estimated_bytes << "\n";
        return 0;
    }
    if (!flags.run_path.empty()) {
        l2g::Interner docs;
        auto lists = load_run(flags.run_path, docs);
        auto stream = l2g::to_stream(std::move(lists));
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.1f",
                      l2g::topc_overlap(stream, flags.pool));
        std::cout << "Query count: " << stream.size() << "\n"
                  << "Distinct docs: " << docs.size() << "\n"
                  << "Top-" << flags.pool << " overlap (%): " << buf << "\n";
        return 0;
    }
    throw l2g::ConfigError("stats needs --run or --graph");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Affinity graphs from listwise reranker outputs, and "
                 "graph-adaptive sliding-window reranking"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read key=value defaults from a file");

    SharedFlags flags;
    std::vector<std::string> run_paths;
    std::string append_path;
    std::string provenance_path;
    std::string per_query_path;
    std::size_t k = 10;
    std::size_t warmup = 3;
    std::size_t repetitions = 1;
    std::size_t threads = 1;

    auto add_graph_flags = [&](CLI::App* cmd) {
        cmd->add_option("--pool", flags.pool, "Top-c pool size per query");
        cmd->add_option("--hops", flags.hops, "Propagation hops (1..3)");
        cmd->add_option("--neighbors", flags.neighbors, "Graph neighbors pushed per committed doc");
        cmd->add_flag("--no-idf", flags.no_idf, "Disable IDF reweighting of affinities");
        cmd->add_option("--log-base", flags.log_base, "IDF log base (0 = natural)");
    };
    auto add_window_flags = [&](CLI::App* cmd) {
        cmd->add_option("--window", flags.window, "Window size w");
        cmd->add_option("--step", flags.step, "Window step s");
    };

    auto* build = app.add_subcommand("build-graph", "Ingest run files into a graph file");
    build->add_option("--run", run_paths, "TREC run file(s), ingested in order")
        ->required()
        ->expected(-1);
    build->add_option("--append", append_path, "Existing graph file to extend");
    build->add_option("--out", flags.out_path, "Output graph file")->required();

    auto* rerank = app.add_subcommand("rerank", "Rerank a run under a fixed window budget");
    rerank->add_option("--run", flags.run_path, "First-stage TREC run file")->required();
    rerank->add_option("--out", flags.out_path, "Output run file")->required();
    rerank->add_option("--mode", flags.mode, "sliding|gar_l2g|gar_file|gar_random");
    rerank->add_option("--reranker", flags.reranker,
                       "identity|oracle|noisy:<swaps>|random|external:<command>");
    rerank->add_option("--qrels", flags.qrels_path, "Qrels file (oracle rerankers)");
    rerank->add_option("--graph", flags.graph_path,
                       "Graph file: read-only source in gar_file, else feedback dump");
    rerank->add_option("--order", flags.order, "dataset|max-overlap|min-overlap");
    rerank->add_option("--fill", flags.fill,
                       "Window refill policy: alternate|frontier_first|residual_first");
    rerank->add_option("--direction", flags.direction,
                       "Sliding direction: top_down|bottom_up (sliding mode only)");
    rerank->add_option("--seed", flags.seed, "Seed for randomized rerankers/modes");
    rerank->add_option("--timeout-ms", flags.timeout_ms, "External reranker timeout");
    rerank->add_option("--provenance", provenance_path, "Per-doc source CSV path");
    rerank->add_option("--parallel", threads, "Worker threads (mode=sliding only)");
    add_window_flags(rerank);
    add_graph_flags(rerank);

    auto* eval = app.add_subcommand("eval", "Score a run file with nDCG@k");
    eval->add_option("--run", flags.run_path, "Run file to score")->required();
    eval->add_option("--qrels", flags.qrels_path, "Relevance judgments")->required();
    eval->add_option("-k", k, "Cutoff");
    eval->add_option("--gain", flags.gain, "exponential|linear");
    eval->add_option("--out", flags.out_path, "Summary CSV path");
    eval->add_option("--per-query", per_query_path, "Per-query TSV path");

    auto* bench = app.add_subcommand("bench", "Time the graph pipeline per query");
    bench->add_option("--run", flags.run_path, "Stream source run file")->required();
    bench->add_option("--out", flags.out_path, "CSV path (default stdout)");
    bench->add_option("--warmup", warmup, "Leading queries excluded from summary");
    bench->add_option("--repetitions", repetitions, "Fresh-graph passes, per-query min");
    add_window_flags(bench);
    add_graph_flags(bench);

    auto* stats = app.add_subcommand("stats", "Describe a run file or graph file");
    stats->add_option("--run", flags.run_path, "Run file to describe");
    stats->add_option("--graph", flags.graph_path, "Graph file to describe");
    stats->add_option("--pool", flags.pool, "Top-c cutoff for overlap");

    CLI11_PARSE(app, argc, argv);

    try {
        if (build->parsed())
            return cmd_build_graph(run_paths, append_path, flags.out_path);
        if (rerank->parsed())
            return cmd_rerank(flags, provenance_path, threads);
        if (eval->parsed())
            return cmd_eval(flags, k, per_query_path);
        if (bench->parsed())
            return cmd_bench(flags, warmup, repetitions);
        if (stats->parsed())
            return cmd_stats(flags);
    } catch (const l2g::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const l2g::GraphLoadError& e) {
        std::cerr << "graph load error: " << e.what() << "\n";
        return kExitParse;
    } catch (const l2g::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const l2g::RerankerError& e) {
        std::cerr << "reranker error: " << e.what() << "\n";
        return kExitReranker;
    } catch (const l2g::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const l2g::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
