#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "l2g/corpus.hpp"
#include "l2g/errors.hpp"

namespace l2g {

// Rank-derived weights for one list: the rank-r doc of a length-k list gets
// weight k - r + 1. Docs outside the list read as 0.
struct ScoreVector {
    std::vector<std::pair<DocRef, std::int64_t>> entries; // list order

    std::int64_t weight_of(DocRef d) const {
        for (const auto& [doc, w] : entries)
            if (doc == d)
                return w;
        return 0;
    }
};

inline ScoreVector score_vector(const RankedList& list) {
    if (list.docs.empty())
        throw InputError("score vector of an empty list");
    std::unordered_set<std::uint32_t> seen;
    ScoreVector sv;
    sv.entries.reserve(list.docs.size());
    const auto k = static_cast<std::int64_t>(list.docs.size());
    for (std::size_t r = 0; r < list.docs.size(); ++r) {
        if (!seen.insert(list.docs[r].handle).second)
            throw InputError("duplicate document in ranked list for qid " + list.qid);
        sv.entries.emplace_back(list.docs[r], k - static_cast<std::int64_t>(r));
    }
    return sv;
}

struct GraphStats {
    std::uint64_t doc_count = 0;        // distinct docs ingested
    std::uint64_t edge_count = 0;       // strictly-upper-triangle nonzeros
    std::uint64_t queries_ingested = 0;
    std::uint64_t estimated_bytes = 0;  // sparse structure + id maps, see stats()
};

// Per-batch accounting: how many docs were new to the graph and how many
// distinct cells the batch touched, split by whether each endpoint existed
// before the batch (old-old / old-new / new-new blocks).
struct BatchReport {
    std::uint64_t new_docs = 0;
    std::uint64_t touched_cells = 0;
    std::uint64_t old_old_cells = 0;
    std::uint64_t old_new_cells = 0;
    std::uint64_t new_new_cells = 0;
};

// Sparse symmetric doc-doc co-occurrence accumulator. Entry (d, e) is the
// exact integer sum over ingested queries of the rank-weight products of d
// and e; the diagonal holds the sum of squared weights. df counts how many
// queries retrieved each doc. Ingest is O(k^2) per list, independent of the
// number of docs already in the graph.
//
// Single-writer: ingest mutates; all reads are const. Readers needing a
// stable view across concurrent ingests should copy the graph value.
class AffinityGraph {
public:
    // Accumulates one ranked list. Unseen docs join the pool on the fly.
    // Re-ingesting a qid is accumulated anyway and counted as a warning.
    void ingest(const RankedList& list) {
        ScoreVector sv = score_vector(list);
        if (!qids_.insert(list.qid).second)
            ++duplicate_qid_count_;
        grow(list.docs);
        for (const auto& [doc, w] : sv.entries) {
            if (df_[doc.handle] == 0)
                ++seen_docs_;
            ++df_[doc.handle];
        }
        const std::size_t k = sv.entries.size();
        for (std::size_t i = 0; i < k; ++i) {
            auto [di, wi] = sv.entries[i];
            for (std::size_t j = i; j < k; ++j) {
                auto [dj, wj] = sv.entries[j];
                add_cell(di.handle, dj.handle, wi * wj);
            }
        }
        ++queries_;
    }

    // Folds a batch of lists; the final state is identical to ingesting them
    // one by one. Returns block-attribution counts for cost studies.
    BatchReport batch_update(const std::vector<RankedList>& lists) {
        BatchReport report;
        std::unordered_set<std::uint64_t> touched;
        std::vector<bool> was_seen;
        was_seen.reserve(df_.size());
        for (auto df : df_)
            was_seen.push_back(df > 0);
        auto seen_before = [&](std::uint32_t h) {
            return h < was_seen.size() && was_seen[h];
        };

        const std::uint64_t docs_before = seen_docs_;
        for (const auto& list : lists) {
            for (const auto& d : list.docs) {
                for (const auto& e : list.docs) {
                    if (e.handle < d.handle)
                        continue;
                    std::uint64_t key =
                        (static_cast<std::uint64_t>(d.handle) << 32) | e.handle;
                    if (touched.insert(key).second) {
                        bool d_old = seen_before(d.handle);
                        bool e_old = seen_before(e.handle);
                        if (d_old && e_old)
                            ++report.old_old_cells;
                        else if (!d_old && !e_old)
                            ++report.new_new_cells;
                        else
                            ++report.old_new_cells;
                    }
                }
            }
            ingest(list);
        }
        report.new_docs = seen_docs_ - docs_before;
        report.touched_cells = touched.size();
        return report;
    }

    std::int64_t raw(DocRef a, DocRef b) const {
        if (a.handle >= adjacency_.size())
            return 0;
        const auto& row = adjacency_[a.handle];
        auto it = row.find(b.handle);
        return it == row.end() ? 0 : it->second;
    }

    std::uint32_t df(DocRef d) const {
        return d.handle < df_.size() ? df_[d.handle] : 0;
    }

    bool seen(DocRef d) const { return df(d) > 0; }

    // IDF de-biasing weight, 1 / ln(1 + df(d)). `log_base` rescales every
    // weight uniformly (argsorts are invariant to it); 0 means natural log.
    double idf_weight(DocRef d, double log_base = 0.0) const {
        std::uint32_t n = df(d);
        if (n == 0)
            throw NotFoundError("idf weight of a document never ingested");
        double w = 1.0 / std::log(1.0 + static_cast<double>(n));
        if (log_base > 0.0)
            w *= std::log(log_base);
        return w;
    }

    // raw(a, b) scaled by both endpoints' IDF weights. Symmetric.
    double weighted_affinity(DocRef a, DocRef b, double log_base = 0.0) const {
        double wa = idf_weight(a, log_base);
        double wb = idf_weight(b, log_base);
        return static_cast<double>(raw(a, b)) * wa * wb;
    }

    // Nonzero row of d (cells with either orientation), unordered.
    const std::unordered_map<std::uint32_t, std::int64_t>* row(DocRef d) const {
        if (d.handle >= adjacency_.size())
            return nullptr;
        return &adjacency_[d.handle];
    }

    std::uint64_t queries_ingested() const { return queries_; }
    std::uint64_t doc_count() const { return seen_docs_; }
    std::uint64_t stored_cells() const { return stored_cells_; } // upper + diagonal
    std::uint64_t edge_count() const { return stored_cells_ - diagonal_cells_; }
    std::uint64_t duplicate_qid_count() const { return duplicate_qid_count_; }
    std::size_t handle_space() const { return df_.size(); }

    // Rebuilds a graph from its persisted parts: per-handle df, query count,
    // and the upper-triangle cells (row <= col).
    static AffinityGraph restore(
        std::vector<std::uint32_t> df, std::uint64_t queries,
        const std::vector<std::tuple<std::uint32_t, std::uint32_t, std::int64_t>>& cells) {
        AffinityGraph g;
        g.queries_ = queries;
        g.df_ = std::move(df);
        g.adjacency_.resize(g.df_.size());
        for (auto v : g.df_)
            if (v > 0)
                ++g.seen_docs_;
        for (const auto& [row, col, val] : cells) {
            if (row >= g.df_.size() || col >= g.df_.size())
                throw InputError("restore cell outside the df handle space");
            g.add_cell(row, col, val);
        }
        return g;
    }

    bool operator==(const AffinityGraph& other) const {
        if (queries_ != other.queries_ || seen_docs_ != other.seen_docs_ ||
            stored_cells_ != other.stored_cells_)
            return false;
        std::size_t n = std::max(df_.size(), other.df_.size());
        for (std::size_t h = 0; h < n; ++h) {
            if (df(DocRef{static_cast<std::uint32_t>(h)}) !=
                other.df(DocRef{static_cast<std::uint32_t>(h)}))
                return false;
        }
        for (std::size_t h = 0; h < adjacency_.size(); ++h) {
            for (const auto& [col, val] : adjacency_[h]) {
                if (other.raw(DocRef{static_cast<std::uint32_t>(h)}, DocRef{col}) != val)
                    return false;
            }
        }
        return true;
    }

private:
    void grow(const std::vector<DocRef>& docs) {
        std::uint32_t max_handle = 0;
        for (const auto& d : docs)
            max_handle = std::max(max_handle, d.handle);
        if (max_handle >= df_.size()) {
            df_.resize(max_handle + 1, 0);
            adjacency_.resize(max_handle + 1);
        }
    }

    void add_cell(std::uint32_t a, std::uint32_t b, std::int64_t value) {
        auto [it, fresh] = adjacency_[a].try_emplace(b, 0);
        it->second += value;
        if (fresh) {
            ++stored_cells_;
            if (a == b)
                ++diagonal_cells_;
            else
                adjacency_[b].emplace(a, value);
        } else if (a != b) {
            adjacency_[b][a] += value;
        }
    }

    std::vector<std::unordered_map<std::uint32_t, std::int64_t>> adjacency_;
    std::vector<std::uint32_t> df_;
    std::unordered_set<std::string> qids_;
    std::uint64_t queries_ = 0;
    std::uint64_t seen_docs_ = 0;
    std::uint64_t stored_cells_ = 0;
    std::uint64_t diagonal_cells_ = 0;
    std::uint64_t duplicate_qid_count_ = 0;
};

// In-memory footprint estimate of the sparse structure plus id maps:
//   sum of external-id byte lengths over ingested docs
// + doc_count * 16   (id-map entry: handle, offset, length)
// + doc_count * 4    (df)
// + (doc_count + 1) * 8   (row offsets)
// + (edge_count + diagonal) * 12   (column + weight per stored cell)
inline GraphStats stats(const AffinityGraph& graph, const Interner& docs) {
    GraphStats s;
    s.doc_count = graph.doc_count();
    s.edge_count = graph.edge_count();
    s.queries_ingested = graph.queries_ingested();
    if (s.doc_count == 0)
        return s;
    std::uint64_t id_bytes = 0;
    for (std::uint32_t h = 0; h < graph.handle_space(); ++h) {
        DocRef d{h};
        if (graph.seen(d))
            id_bytes += docs.external_id(d).size();
    }
    s.estimated_bytes = id_bytes + s.doc_count * 16 + s.doc_count * 4 +
                        (s.doc_count + 1) * 8 + graph.stored_cells() * 12;
    return s;
}

} // namespace l2g
