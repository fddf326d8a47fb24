#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "l2g/corpus.hpp"
#include "l2g/errors.hpp"
#include "l2g/graph.hpp"
#include "l2g/propagation.hpp"
#include "l2g/rerankers.hpp"

namespace l2g {

enum class Mode { sliding, gar_l2g, gar_file, gar_random };
enum class FillPolicy { alternate, frontier_first, residual_first };
enum class OrderPolicy { dataset, max_overlap, min_overlap };
enum class Provenance { first_stage, graph_frontier };
enum class Direction { top_down, bottom_up };

inline const char* to_string(Mode m) {
    switch (m) {
    case Mode::sliding: return "sliding";
    case Mode::gar_l2g: return "gar_l2g";
    case Mode::gar_file: return "gar_file";
    case Mode::gar_random: return "gar_random";
    }
    return "?";
}

inline const char* to_string(Provenance p) {
    return p == Provenance::graph_frontier ? "graph_frontier" : "first_stage";
}

inline Mode parse_mode(const std::string& s) {
    if (s == "sliding") return Mode::sliding;
    if (s == "gar_l2g") return Mode::gar_l2g;
    if (s == "gar_file") return Mode::gar_file;
    if (s == "gar_random") return Mode::gar_random;
    throw ConfigError("unknown mode '" + s +
                      "' (expected sliding|gar_l2g|gar_file|gar_random)");
}

inline FillPolicy parse_fill_policy(const std::string& s) {
    if (s == "alternate") return FillPolicy::alternate;
    if (s == "frontier_first") return FillPolicy::frontier_first;
    if (s == "residual_first") return FillPolicy::residual_first;
    throw ConfigError("unknown fill policy '" + s +
                      "' (expected alternate|frontier_first|residual_first)");
}

inline OrderPolicy parse_order_policy(const std::string& s) {
    if (s == "dataset") return OrderPolicy::dataset;
    if (s == "max_overlap") return OrderPolicy::max_overlap;
    if (s == "min_overlap") return OrderPolicy::min_overlap;
    throw ConfigError("unknown order policy '" + s +
                      "' (expected dataset|max_overlap|min_overlap)");
}

inline Direction parse_direction(const std::string& s) {
    if (s == "top_down") return Direction::top_down;
    if (s == "bottom_up") return Direction::bottom_up;
    throw ConfigError("unknown direction '" + s + "' (expected top_down|bottom_up)");
}

struct GarConfig {
    std::size_t window = 20;
    std::size_t step = 10;
    std::size_t pool_size = 100;
    Mode mode = Mode::sliding;
    PropagationConfig propagation;
    std::size_t neighbors_per_doc = 10;
    FillPolicy fill = FillPolicy::alternate;
    Direction direction = Direction::top_down; // sliding only; the adaptive
                                               // loop is top-down by nature
    std::uint64_t seed = 0;
};

inline void validate(const GarConfig& cfg) {
    if (cfg.window == 0 || cfg.step == 0)
        throw ConfigError("window and step must be positive");
    if (cfg.step > cfg.window)
        throw ConfigError("step " + std::to_string(cfg.step) +
                          " exceeds window " + std::to_string(cfg.window));
    if (cfg.pool_size == 0)
        throw ConfigError("pool size must be positive");
    if (cfg.neighbors_per_doc == 0)
        throw ConfigError("neighbors per doc must be positive");
}

// Reranker invocations needed to slide a w-wide window by steps of s across
// a list of `len` docs. Every mode issues exactly this many calls.
inline std::uint64_t budget(std::size_t len, std::size_t window, std::size_t step) {
    if (window == 0 || step == 0)
        throw ConfigError("window and step must be positive");
    if (step > window)
        throw ConfigError("step " + std::to_string(step) + " exceeds window " +
                          std::to_string(window));
    if (len <= window)
        return 1;
    return static_cast<std::uint64_t>((len - window + step - 1) / step) + 1;
}

struct RerankResult {
    RankedList ranking;                  // synthetic scores len - rank + 1
    std::uint64_t window_calls = 0;
    std::vector<Provenance> provenance;  // parallel to ranking.docs
};

namespace detail {

inline RerankResult finish(std::string qid, const char* tag, std::vector<DocRef> docs,
                           std::vector<Provenance> provenance, std::uint64_t calls) {
    RerankResult result;
    result.ranking.qid = std::move(qid);
    result.ranking.tag = tag;
    result.ranking.docs = std::move(docs);
    const std::size_t len = result.ranking.docs.size();
    result.ranking.scores.reserve(len);
    for (std::size_t i = 0; i < len; ++i)
        result.ranking.scores.push_back(static_cast<double>(len - i));
    result.window_calls = calls;
    result.provenance = std::move(provenance);
    return result;
}

} // namespace detail

// Baseline: rerank the working list in place. Top-down windows start at
// 1-based positions 1, 1+s, 1+2s, ... until a window reaches the end;
// bottom-up starts the window flush with the end and walks it to the front.
// Both directions issue the same number of calls.
inline RerankResult sliding_window(const QueryRecord& query, const RankedList& pool,
                                   Reranker& reranker, std::size_t window,
                                   std::size_t step,
                                   Direction direction = Direction::top_down) {
    const std::uint64_t calls = budget(pool.docs.size(), window, step);
    if (pool.docs.empty())
        throw InputError("sliding window over an empty pool");

    std::vector<DocRef> working = pool.docs;
    const std::size_t len = working.size();
    std::uint64_t issued = 0;
    auto pass = [&](std::size_t pos) {
        const std::size_t take = std::min(window, len - pos);
        std::vector<DocRef> order =
            reranker.rerank(query, std::span<const DocRef>(working.data() + pos, take));
        ++issued;
        std::copy(order.begin(), order.end(), working.begin() + pos);
        return take;
    };
    if (direction == Direction::top_down) {
        std::size_t pos = 0;
        while (true) {
            const std::size_t take = pass(pos);
            if (pos + take >= len)
                break;
            pos += step;
        }
    } else {
        std::size_t pos = len > window ? len - window : 0;
        while (true) {
            pass(pos);
            if (pos == 0)
                break;
            pos = pos > step ? pos - step : 0;
        }
    }
    if (issued != calls)
        throw Error("window accounting bug: issued " + std::to_string(issued) +
                    ", budget " + std::to_string(calls));

    return detail::finish(pool.qid, "sliding",
                          std::move(working),
                          std::vector<Provenance>(len, Provenance::first_stage), issued);
}

// Where a graph-adaptive pass gets its candidate neighbors from. All
// implementations stay inside the query's top-c pool.
class NeighborSource {
public:
    virtual ~NeighborSource() = default;

    // Up to n (doc, key) pairs for d, key descending. Seen-ness is the
    // caller's concern; sources just rank candidates.
    virtual std::vector<std::pair<DocRef, double>> neighbors(DocRef d, std::size_t n) = 0;
};

// Propagated (optionally IDF-weighted) affinities over the pool-restricted
// graph. Docs the graph has never seen have no neighbors, so a cold graph
// degrades to the sliding baseline.
class GraphNeighborSource final : public NeighborSource {
public:
    GraphNeighborSource(const AffinityGraph& graph, const std::vector<DocRef>& pool,
                        const PropagationConfig& cfg)
        : view_(graph, pool, cfg) {}

    std::vector<std::pair<DocRef, double>> neighbors(DocRef d, std::size_t n) override {
        return view_.neighbors(d, n);
    }

    const PoolView& view() const { return view_; }

private:
    PoolView view_;
};

// Uniform draws from the pool under a per-doc derived seed; the control arm
// that separates graph signal from the extra window plumbing.
class RandomNeighborSource final : public NeighborSource {
public:
    RandomNeighborSource(std::vector<DocRef> pool, std::uint64_t seed)
        : pool_(std::move(pool)), seed_(seed) {}

    std::vector<std::pair<DocRef, double>> neighbors(DocRef d, std::size_t n) override {
        std::vector<std::pair<DocRef, double>> out;
        if (n == 0 || pool_.size() <= 1)
            return out;
        std::vector<DocRef> cands;
        cands.reserve(pool_.size());
        for (const auto& p : pool_)
            if (!(p == d))
                cands.push_back(p);
        std::mt19937_64 engine(rng::mix_seed(seed_, std::to_string(d.handle)));
        const std::size_t take = std::min(n, cands.size());
        out.reserve(take);
        for (std::size_t i = 0; i < take; ++i) {
            std::size_t j = i + static_cast<std::size_t>(
                                    rng::bounded(engine, cands.size() - i));
            std::swap(cands[i], cands[j]);
            // Descending synthetic keys keep draw order stable in the queue.
            out.emplace_back(cands[i], static_cast<double>(take - i));
        }
        return out;
    }

private:
    std::vector<DocRef> pool_;
    std::uint64_t seed_;
};

namespace detail {

// Max-key frontier with keep-max dedup and lazy deletion; ties break toward
// the smaller handle.
class Frontier {
public:
    void push(DocRef d, double key) {
        auto it = best_.find(d.handle);
        if (it != best_.end() && it->second >= key)
            return;
        best_[d.handle] = key;
        heap_.push(Entry{key, d.handle});
    }

    // Highest-keyed doc not yet accepted by `taken`; nullopt when drained.
    std::optional<DocRef> pop(const std::unordered_set<std::uint32_t>& taken) {
        while (!heap_.empty()) {
            Entry top = heap_.top();
            heap_.pop();
            auto it = best_.find(top.handle);
            if (it == best_.end() || it->second != top.key)
                continue; // superseded by a later keep-max push
            best_.erase(it);
            if (taken.count(top.handle))
                continue;
            return DocRef{top.handle};
        }
        return std::nullopt;
    }

private:
    struct Entry {
        double key;
        std::uint32_t handle;
    };
    struct Worse {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.key != b.key)
                return a.key < b.key;
            return a.handle > b.handle;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, Worse> heap_;
    std::unordered_map<std::uint32_t, double> best_;
};

} // namespace detail

// Graph-adaptive pass under the exact sliding-window call budget. Loop: rerank
// the window, commit its top s docs, push each committed doc's top-b unseen
// pool neighbors into the frontier, then refill the (w - s) carry back to w
// docs drawn from frontier and residual first-stage order per the fill
// policy. After the last window the carry is appended in working order, then
// never-drawn pool docs in first-stage order.
inline RerankResult gar_rerank(const QueryRecord& query, const RankedList& pool,
                               NeighborSource& source, Reranker& reranker,
                               const GarConfig& cfg) {
    validate(cfg);
    if (pool.docs.empty())
        throw InputError("graph-adaptive rerank over an empty pool");
    const std::size_t len = pool.docs.size();
    const std::uint64_t windows = budget(len, cfg.window, cfg.step);

    std::unordered_set<std::uint32_t> seen;   // docs that entered some window
    std::unordered_map<std::uint32_t, Provenance> origin;
    detail::Frontier frontier;
    std::size_t residual = 0; // next first-stage index to consider

    auto draw_residual = [&]() -> std::optional<DocRef> {
        while (residual < len) {
            DocRef d = pool.docs[residual++];
            if (seen.insert(d.handle).second) {
                origin.emplace(d.handle, Provenance::first_stage);
                return d;
            }
        }
        return std::nullopt;
    };
    auto draw_frontier = [&]() -> std::optional<DocRef> {
        auto d = frontier.pop(seen);
        if (d) {
            seen.insert(d->handle);
            origin.emplace(d->handle, Provenance::graph_frontier);
        }
        return d;
    };

    std::vector<DocRef> working;
    working.reserve(cfg.window);
    while (working.size() < cfg.window) {
        auto d = draw_residual();
        if (!d)
            break;
        working.push_back(*d);
    }

    std::vector<DocRef> final_order;
    final_order.reserve(len);
    std::uint64_t issued = 0;

    for (std::uint64_t win = 0; win < windows; ++win) {
        std::vector<DocRef> order = reranker.rerank(
            query, std::span<const DocRef>(working.data(), working.size()));
        ++issued;
        const bool last = win + 1 == windows;
        const std::size_t commit = std::min(cfg.step, order.size());
        for (std::size_t i = 0; i < commit; ++i)
            final_order.push_back(order[i]);
        if (last) {
            for (std::size_t i = commit; i < order.size(); ++i)
                final_order.push_back(order[i]);
            break;
        }

        for (std::size_t i = 0; i < commit; ++i) {
            auto ranked = source.neighbors(order[i], len);
            std::size_t pushed = 0;
            for (const auto& [nbr, key] : ranked) {
                if (pushed == cfg.neighbors_per_doc)
                    break;
                if (seen.count(nbr.handle))
                    continue;
                frontier.push(nbr, key);
                ++pushed;
            }
        }

        std::vector<DocRef> next(order.begin() + commit, order.end());
        const std::size_t want = cfg.window > next.size() ? cfg.window - next.size() : 0;
        bool frontier_turn = cfg.fill != FillPolicy::residual_first;
        for (std::size_t i = 0; i < want; ++i) {
            std::optional<DocRef> d;
            if (frontier_turn) {
                d = draw_frontier();
                if (!d)
                    d = draw_residual();
            } else {
                d = draw_residual();
                if (!d)
                    d = draw_frontier();
            }
            if (!d)
                break;
            next.push_back(*d);
            if (cfg.fill == FillPolicy::alternate)
                frontier_turn = !frontier_turn;
        }
        working = std::move(next);
    }
    if (issued != windows)
        throw Error("window accounting bug: issued " + std::to_string(issued) +
                    ", budget " + std::to_string(windows));

    // Never-drawn pool docs close the ranking in first-stage order.
    for (const auto& d : pool.docs)
        if (!seen.count(d.handle)) {
            seen.insert(d.handle);
            origin.emplace(d.handle, Provenance::first_stage);
            final_order.push_back(d);
        }

    std::vector<Provenance> provenance;
    provenance.reserve(final_order.size());
    for (const auto& d : final_order)
        provenance.push_back(origin.at(d.handle));
    return detail::finish(pool.qid, to_string(cfg.mode), std::move(final_order),
                          std::move(provenance), issued);
}

namespace detail {

inline RankedList truncated_pool(const RankedList& list, std::size_t c) {
    RankedList pool;
    pool.qid = list.qid;
    pool.tag = list.tag;
    const std::size_t take = std::min(c, list.docs.size());
    pool.docs.assign(list.docs.begin(), list.docs.begin() + take);
    if (list.scores.size() >= take)
        pool.scores.assign(list.scores.begin(), list.scores.begin() + take);
    return pool;
}

inline RerankResult rerank_one(const StreamEntry& entry, const GarConfig& cfg,
                               Reranker& reranker, const AffinityGraph& graph) {
    RankedList pool = truncated_pool(entry.pool, cfg.pool_size);
    if (cfg.mode != Mode::sliding && cfg.direction != Direction::top_down)
        throw ConfigError("adaptive modes slide top-down only");
    switch (cfg.mode) {
    case Mode::sliding:
        return sliding_window(entry.query, pool, reranker, cfg.window, cfg.step,
                              cfg.direction);
    case Mode::gar_l2g:
    case Mode::gar_file: {
        GraphNeighborSource source(graph, pool.docs, cfg.propagation);
        return gar_rerank(entry.query, pool, source, reranker, cfg);
    }
    case Mode::gar_random: {
        RandomNeighborSource source(pool.docs,
                                    rng::mix_seed(cfg.seed, entry.query.qid));
        return gar_rerank(entry.query, pool, source, reranker, cfg);
    }
    }
    throw ConfigError("unhandled mode");
}

[[noreturn]] inline void rethrow_with_qid(const std::string& qid) {
    try {
        throw;
    } catch (const RerankerError& e) {
        throw RerankerError("query '" + qid + "': " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError("query '" + qid + "': " + e.what());
    } catch (const NotFoundError& e) {
        throw NotFoundError("query '" + qid + "': " + e.what());
    } catch (const InputError& e) {
        throw InputError("query '" + qid + "': " + e.what());
    }
}

} // namespace detail

struct StreamRunResult {
    std::vector<RerankResult> results; // stream order
    std::uint64_t reranker_calls = 0;
};

// Streaming loop: rerank each query with the current graph, then fold the
// produced ranking back in. The reranked lists are the only listwise signal;
// feedback costs zero extra reranker calls.
inline StreamRunResult run_stream(const QueryStream& stream, const GarConfig& cfg,
                                  Reranker& reranker, AffinityGraph& graph) {
    validate(cfg);
    StreamRunResult out;
    out.results.reserve(stream.entries.size());
    for (const auto& entry : stream.entries) {
        try {
            RerankResult result = detail::rerank_one(entry, cfg, reranker, graph);
            graph.ingest(result.ranking);
            out.results.push_back(std::move(result));
        } catch (const Error&) {
            detail::rethrow_with_qid(entry.query.qid);
        }
    }
    out.reranker_calls = reranker.call_count();
    return out;
}

// Parallel variant, sliding mode only: the graph feeds on results but never
// influences them, so queries are independent. Each query gets its own
// reranker so outputs do not depend on the thread schedule.
inline StreamRunResult run_stream_parallel(
    const QueryStream& stream, const GarConfig& cfg,
    const std::function<std::unique_ptr<Reranker>(const std::string& qid)>& make_reranker,
    AffinityGraph& graph, std::size_t threads) {
    validate(cfg);
    if (cfg.mode != Mode::sliding)
        throw ConfigError("parallel streams require mode=sliding; graph feedback "
                          "makes the adaptive modes order-dependent");
    if (threads == 0)
        throw ConfigError("thread count must be positive");

    const std::size_t n = stream.entries.size();
    StreamRunResult out;
    out.results.resize(n);
    if (n == 0)
        return out;

    std::atomic<std::size_t> next{0};
    std::atomic<std::uint64_t> calls{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto worker = [&]() {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (first_error)
                    return;
            }
            const auto& entry = stream.entries[i];
            try {
                auto reranker = make_reranker(entry.query.qid);
                out.results[i] = detail::rerank_one(entry, cfg, *reranker, graph);
                calls.fetch_add(reranker->call_count());
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) {
                    try {
                        try {
                            throw;
                        } catch (const Error&) {
                            detail::rethrow_with_qid(entry.query.qid);
                        }
                    } catch (...) {
                        first_error = std::current_exception();
                    }
                }
            }
        }
    };

    std::vector<std::thread> crew;
    const std::size_t count = std::min(threads, n);
    crew.reserve(count);
    for (std::size_t t = 0; t < count; ++t)
        crew.emplace_back(worker);
    for (auto& t : crew)
        t.join();
    if (first_error)
        std::rethrow_exception(first_error);

    // Feedback after the fact; graph state is order-invariant anyway.
    for (const auto& result : out.results)
        graph.ingest(result.ranking);
    out.reranker_calls = calls.load();
    return out;
}

// Replays the stream in a deterministic order. Greedy overlap policies seed
// with the best (or worst) overlapping pool pair, then repeatedly append the
// query whose pool overlaps the processed union most (or least). Ties fall
// to the ascending qid.
inline QueryStream order_stream(const QueryStream& stream, OrderPolicy policy,
                                std::size_t c) {
    if (stream.entries.empty())
        throw InputError("ordering an empty stream");
    if (policy == OrderPolicy::dataset || stream.entries.size() == 1)
        return stream;

    const std::size_t n = stream.entries.size();
    std::vector<std::unordered_set<std::uint32_t>> pools(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& docs = stream.entries[i].pool.docs;
        const std::size_t take = std::min(c, docs.size());
        for (std::size_t j = 0; j < take; ++j)
            pools[i].insert(docs[j].handle);
    }

    // Candidate scan order: ascending qid, so "first wins" breaks ties.
    std::vector<std::size_t> by_qid(n);
    for (std::size_t i = 0; i < n; ++i)
        by_qid[i] = i;
    std::sort(by_qid.begin(), by_qid.end(), [&](std::size_t a, std::size_t b) {
        return stream.entries[a].query.qid < stream.entries[b].query.qid;
    });

    const bool maximize = policy == OrderPolicy::max_overlap;
    auto better = [&](std::size_t candidate, std::size_t best) {
        return maximize ? candidate > best : candidate < best;
    };
    auto intersection = [&](const std::unordered_set<std::uint32_t>& a,
                            const std::unordered_set<std::uint32_t>& b) {
        const auto& small = a.size() <= b.size() ? a : b;
        const auto& large = a.size() <= b.size() ? b : a;
        std::size_t hits = 0;
        for (auto h : small)
            hits += large.count(h);
        return hits;
    };

    std::size_t seed_a = 0, seed_b = 1;
    bool have_pair = false;
    std::size_t best_overlap = 0;
    for (std::size_t ai = 0; ai < n; ++ai)
        for (std::size_t bi = ai + 1; bi < n; ++bi) {
            std::size_t a = by_qid[ai], b = by_qid[bi];
            std::size_t overlap = intersection(pools[a], pools[b]);
            if (!have_pair || better(overlap, best_overlap)) {
                have_pair = true;
                best_overlap = overlap;
                seed_a = a;
                seed_b = b;
            }
        }

    std::vector<bool> placed(n, false);
    std::vector<std::size_t> order{seed_a, seed_b};
    placed[seed_a] = placed[seed_b] = true;
    std::unordered_set<std::uint32_t> covered = pools[seed_a];
    covered.insert(pools[seed_b].begin(), pools[seed_b].end());

    while (order.size() < n) {
        bool have = false;
        std::size_t pick = 0, pick_overlap = 0;
        for (std::size_t i : by_qid) {
            if (placed[i])
                continue;
            std::size_t overlap = intersection(pools[i], covered);
            if (!have || better(overlap, pick_overlap)) {
                have = true;
                pick = i;
                pick_overlap = overlap;
            }
        }
        placed[pick] = true;
        order.push_back(pick);
        covered.insert(pools[pick].begin(), pools[pick].end());
    }

    QueryStream out;
    out.entries.reserve(n);
    for (std::size_t i : order)
        out.entries.push_back(stream.entries[i]);
    return out;
}

} // namespace l2g
