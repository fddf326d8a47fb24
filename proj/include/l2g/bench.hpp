#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "l2g/corpus.hpp"
#include "l2g/errors.hpp"
#include "l2g/gar.hpp"
#include "l2g/graph.hpp"
#include "l2g/propagation.hpp"

namespace l2g {

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}

    double seconds() const {
        auto now = std::chrono::steady_clock::now();
        return std::chrono::duration<double>(now - start_).count();
    }

    void reset() { start_ = std::chrono::steady_clock::now(); }

private:
    std::chrono::steady_clock::time_point start_;
};

struct BenchRecord {
    std::size_t query_index = 0;
    double ingest_seconds = 0.0;
    double propagate_seconds = 0.0;
    double neighbors_seconds = 0.0;
    std::uint64_t graph_bytes = 0;
    std::size_t pool_size = 0;
    std::size_t new_docs = 0;
};

struct PhaseSummary {
    double median = 0.0;
    double mean = 0.0;
    double p95 = 0.0;
};

struct BenchSummary {
    PhaseSummary ingest;
    PhaseSummary propagate;
    PhaseSummary neighbors;
    std::uint64_t peak_bytes = 0;
    std::size_t measured = 0; // records feeding the phase summaries
    std::size_t warmup = 0;
};

struct BenchConfig {
    GarConfig gar;
    std::size_t warmup = 3;      // leading queries excluded from the summary
    std::size_t repetitions = 1; // fresh-graph passes; per-query minimum wins
};

struct BenchResult {
    std::vector<BenchRecord> records;
    BenchSummary summary;
};

namespace detail {

inline PhaseSummary summarize_phase(std::vector<double> values) {
    PhaseSummary s;
    if (values.empty())
        return s;
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    s.median = n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    double total = 0.0;
    for (double v : values)
        total += v;
    s.mean = total / static_cast<double>(n);
    std::size_t at = static_cast<std::size_t>(
        std::max<long long>(0, static_cast<long long>((n * 95 + 99) / 100) - 1));
    s.p95 = values[std::min(at, n - 1)];
    return s;
}

} // namespace detail

// Per-query cost of the graph-side pipeline: fold the pool in, propagate
// over it, query neighbors for the docs a first window would commit. Extra
// passes replay the stream on a fresh graph and keep each query's fastest
// phase times, damping scheduler noise. Sizes come from the first pass (the
// pipeline is deterministic).
inline BenchResult bench_stream(const QueryStream& stream, const Interner& docs,
                                const BenchConfig& cfg) {
    if (stream.empty())
        throw InputError("benchmark over an empty stream");
    validate(cfg.gar);
    if (cfg.repetitions == 0)
        throw ConfigError("benchmark needs at least one pass");

    const std::size_t n = stream.entries.size();
    BenchResult out;
    out.records.resize(n);

    for (std::size_t pass = 0; pass < cfg.repetitions; ++pass) {
        AffinityGraph graph;
        for (std::size_t i = 0; i < n; ++i) {
            RankedList pool = detail::truncated_pool(stream.entries[i].pool,
                                                     cfg.gar.pool_size);

            std::size_t fresh = 0;
            for (const auto& d : pool.docs)
                if (!graph.seen(d))
                    ++fresh;

            Stopwatch timer;
            graph.ingest(pool);
            double ingest_s = timer.seconds();

            timer.reset();
            PoolView view(graph, pool.docs, cfg.gar.propagation);
            double propagate_s = timer.seconds();

            timer.reset();
            const std::size_t probes = std::min(cfg.gar.step, pool.docs.size());
            for (std::size_t p = 0; p < probes; ++p)
                view.neighbors(pool.docs[p], cfg.gar.neighbors_per_doc);
            double neighbors_s = timer.seconds();

            BenchRecord& rec = out.records[i];
            if (pass == 0) {
                rec.query_index = i;
                rec.ingest_seconds = ingest_s;
                rec.propagate_seconds = propagate_s;
                rec.neighbors_seconds = neighbors_s;
                rec.graph_bytes = stats(graph, docs).estimated_bytes;
                rec.pool_size = pool.docs.size();
                rec.new_docs = fresh;
            } else {
                rec.ingest_seconds = std::min(rec.ingest_seconds, ingest_s);
                rec.propagate_seconds = std::min(rec.propagate_seconds, propagate_s);
                rec.neighbors_seconds = std::min(rec.neighbors_seconds, neighbors_s);
            }
        }
    }

    BenchSummary& summary = out.summary;
    summary.warmup = cfg.warmup;
    std::vector<double> ingest, propagate, neighbors;
    for (std::size_t i = 0; i < n; ++i) {
        summary.peak_bytes = std::max(summary.peak_bytes, out.records[i].graph_bytes);
        if (i < cfg.warmup)
            continue;
        ingest.push_back(out.records[i].ingest_seconds);
        propagate.push_back(out.records[i].propagate_seconds);
        neighbors.push_back(out.records[i].neighbors_seconds);
    }
    summary.measured = ingest.size();
    summary.ingest = detail::summarize_phase(std::move(ingest));
    summary.propagate = detail::summarize_phase(std::move(propagate));
    summary.neighbors = detail::summarize_phase(std::move(neighbors));
    return out;
}

namespace detail {

inline std::string format_seconds(double s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9f", s);
    return buf;
}

} // namespace detail

inline void report_bench(const BenchResult& bench, std::ostream& out) {
    out << "q,ingest_s,prop_s,nbr_s,bytes,pool,new_docs\n";
    for (const auto& r : bench.records) {
        out << r.query_index << "," << detail::format_seconds(r.ingest_seconds) << ","
            << detail::format_seconds(r.propagate_seconds) << ","
            << detail::format_seconds(r.neighbors_seconds) << "," << r.graph_bytes << ","
            << r.pool_size << "," << r.new_docs << "\n";
    }
    const BenchSummary& s = bench.summary;
    out << "# summary measured=" << s.measured << " warmup=" << s.warmup << "\n";
    auto phase = [&](const char* name, const PhaseSummary& p) {
        out << "# " << name << " median=" << detail::format_seconds(p.median)
            << " mean=" << detail::format_seconds(p.mean)
            << " p95=" << detail::format_seconds(p.p95) << "\n";
    };
    phase("ingest_s", s.ingest);
    phase("prop_s", s.propagate);
    phase("nbr_s", s.neighbors);
    out << "# peak_bytes=" << s.peak_bytes << "\n";
}

} // namespace l2g
