#pragma once

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "l2g/corpus.hpp"
#include "l2g/errors.hpp"
#include "l2g/graph.hpp"

namespace l2g {

inline constexpr int kMaxPropagationHops = 3;

struct PropagationConfig {
    int hops = 3;                 // 1..3; more invites rank collapse
    bool include_diagonal = true; // keep self-loops during propagation
    bool use_idf = true;          // propagate IDF-weighted affinities
    double log_base = 0.0;        // 0 = natural log
};

// Pool-restricted propagated affinity matrix. Built once per query, then
// queried per doc. Rows of the underlying walk matrix are L1-normalized
// after every multiplication; rows with no pool-internal mass stay zero.
//
// Hop recurrence: M1 = rownorm(W restricted to pool); M_{j+1} = rownorm(M_j * M1).
class PoolView {
public:
    PoolView(const AffinityGraph& graph, const std::vector<DocRef>& pool,
             const PropagationConfig& cfg)
        : hops_(cfg.hops) {
        if (pool.empty())
            throw InputError("propagation over an empty pool");
        if (cfg.hops < 1 || cfg.hops > kMaxPropagationHops)
            throw ConfigError("propagation hops must be in [1, " +
                              std::to_string(kMaxPropagationHops) + "], got " +
                              std::to_string(cfg.hops));

        // Deduplicate, drop docs the graph has never seen, sort by handle.
        std::vector<std::uint32_t> kept;
        kept.reserve(pool.size());
        std::size_t distinct = 0;
        {
            std::unordered_map<std::uint32_t, bool> uniq;
            for (const auto& d : pool) {
                if (!uniq.emplace(d.handle, true).second)
                    continue;
                ++distinct;
                if (graph.seen(d))
                    kept.push_back(d.handle);
            }
        }
        dropped_ = distinct - kept.size();
        std::sort(kept.begin(), kept.end());
        docs_.reserve(kept.size());
        for (auto h : kept) {
            index_.emplace(h, docs_.size());
            docs_.push_back(DocRef{h});
        }
        const std::size_t n = docs_.size();
        matrix_.assign(n * n, 0.0);
        if (n == 0)
            return;

        // Assemble the pool-restricted (optionally IDF-weighted) submatrix
        // by walking each pool doc's sparse row.
        std::vector<double> idf(n, 1.0);
        if (cfg.use_idf)
            for (std::size_t i = 0; i < n; ++i)
                idf[i] = graph.idf_weight(docs_[i], cfg.log_base);
        for (std::size_t i = 0; i < n; ++i) {
            const auto* row = graph.row(docs_[i]);
            if (!row)
                continue;
            for (const auto& [col, weight] : *row) {
                auto it = index_.find(col);
                if (it == index_.end())
                    continue;
                std::size_t j = it->second;
                if (i == j && !cfg.include_diagonal)
                    continue;
                matrix_[i * n + j] = static_cast<double>(weight) * idf[i] * idf[j];
            }
        }

        normalize_rows(matrix_, n);
        if (hops_ > 1) {
            std::vector<double> base = matrix_;
            std::vector<double> next(n * n);
            for (int hop = 2; hop <= hops_; ++hop) {
                multiply(matrix_, base, next, n);
                normalize_rows(next, n);
                matrix_.swap(next);
            }
        }
    }

    const std::vector<DocRef>& docs() const { return docs_; }
    std::size_t size() const { return docs_.size(); }
    std::size_t dropped() const { return dropped_; }

    bool contains(DocRef d) const { return index_.count(d.handle) > 0; }

    // Propagated affinity of the ordered pair (from, to); 0 when either doc
    // fell out of the pool.
    double affinity(DocRef from, DocRef to) const {
        auto i = index_.find(from.handle);
        auto j = index_.find(to.handle);
        if (i == index_.end() || j == index_.end())
            return 0.0;
        return matrix_[i->second * docs_.size() + j->second];
    }

    // Top-n pool members by d's propagated row: self excluded, zero scores
    // excluded, score descending, ties by ascending handle. Empty when d is
    // not part of the view.
    std::vector<std::pair<DocRef, double>> neighbors(DocRef d, std::size_t n) const {
        std::vector<std::pair<DocRef, double>> out;
        auto it = index_.find(d.handle);
        if (it == index_.end() || n == 0)
            return out;
        const std::size_t row = it->second;
        const std::size_t size = docs_.size();
        out.reserve(size);
        for (std::size_t j = 0; j < size; ++j) {
            if (j == row)
                continue;
            double score = matrix_[row * size + j];
            if (score > 0.0)
                out.emplace_back(docs_[j], score);
        }
        std::partial_sort(out.begin(), out.begin() + std::min(n, out.size()), out.end(),
                          [](const auto& a, const auto& b) {
                              if (a.second != b.second)
                                  return a.second > b.second;
                              return a.first.handle < b.first.handle;
                          });
        if (out.size() > n)
            out.resize(n);
        return out;
    }

    // Row-major propagated matrix over docs(); exposed for dense checks.
    const std::vector<double>& matrix() const { return matrix_; }

private:
    static void normalize_rows(std::vector<double>& m, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < n; ++j)
                sum += m[i * n + j];
            if (sum <= 0.0)
                continue;
            for (std::size_t j = 0; j < n; ++j)
                m[i * n + j] /= sum;
        }
    }

    static void multiply(const std::vector<double>& a, const std::vector<double>& b,
                         std::vector<double>& out, std::size_t n) {
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                double aik = a[i * n + k];
                if (aik == 0.0)
                    continue;
                const double* brow = b.data() + k * n;
                double* orow = out.data() + i * n;
                for (std::size_t j = 0; j < n; ++j)
                    orow[j] += aik * brow[j];
            }
        }
    }

    std::vector<DocRef> docs_;
    std::unordered_map<std::uint32_t, std::size_t> index_;
    std::vector<double> matrix_;
    std::size_t dropped_ = 0;
    int hops_ = 1;
};

inline PoolView propagate(const AffinityGraph& graph, const std::vector<DocRef>& pool,
                          const PropagationConfig& cfg) {
    return PoolView(graph, pool, cfg);
}

// Strict single-shot neighbor query; prefer a shared PoolView when querying
// several docs of the same pool.
inline std::vector<std::pair<DocRef, double>> neighbors(const AffinityGraph& graph,
                                                        DocRef d, std::size_t n,
                                                        const std::vector<DocRef>& pool,
                                                        const PropagationConfig& cfg) {
    bool in_pool = false;
    for (const auto& p : pool)
        if (p == d) {
            in_pool = true;
            break;
        }
    if (!in_pool)
        throw NotFoundError("neighbor query for a document outside the pool");
    if (!graph.seen(d))
        throw NotFoundError("neighbor query for a document never ingested");
    PoolView view(graph, pool, cfg);
    return view.neighbors(d, n);
}

} // namespace l2g
