#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "l2g/errors.hpp"

namespace l2g {

// Dense integer handle for an interned document id. Handles are assigned
// contiguously from 0 in first-seen order and are stable for the lifetime
// of the Interner that produced them.
struct DocRef {
    std::uint32_t handle = 0;

    friend bool operator==(DocRef a, DocRef b) { return a.handle == b.handle; }
    friend bool operator!=(DocRef a, DocRef b) { return a.handle != b.handle; }
    friend bool operator<(DocRef a, DocRef b) { return a.handle < b.handle; }
};

// Bijective string-id <-> handle map. Single writer; lookups are const.
class Interner {
public:
    DocRef intern(std::string_view external_id) {
        if (external_id.empty())
            throw InputError("cannot intern an empty document id");
        auto it = index_.find(external_id);
        if (it != index_.end())
            return DocRef{it->second};
        auto handle = static_cast<std::uint32_t>(ids_.size());
        ids_.emplace_back(external_id);
        index_.emplace(ids_.back(), handle);
        return DocRef{handle};
    }

    std::optional<DocRef> find(std::string_view external_id) const {
        auto it = index_.find(external_id);
        if (it == index_.end())
            return std::nullopt;
        return DocRef{it->second};
    }

    const std::string& external_id(DocRef d) const {
        if (d.handle >= ids_.size())
            throw NotFoundError("unknown document handle " + std::to_string(d.handle));
        return ids_[d.handle];
    }

    std::size_t size() const { return ids_.size(); }

private:
    std::vector<std::string> ids_;
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const {
            return std::hash<std::string_view>{}(s);
        }
    };
    struct Eq {
        using is_transparent = void;
        bool operator()(std::string_view a, std::string_view b) const { return a == b; }
    };
    std::unordered_map<std::string, std::uint32_t, Hash, Eq> index_;
};

struct QueryRecord {
    std::string qid;
    std::optional<std::string> text;
};

// One query's ordered candidate list, rank 1 first. `scores` is a side-band
// of first-stage scores parallel to `docs`; it may be empty (synthetic
// scores are generated on write).
struct RankedList {
    std::string qid;
    std::vector<DocRef> docs;
    std::vector<double> scores;
    std::string tag;

    std::size_t size() const { return docs.size(); }
};

struct StreamEntry {
    QueryRecord query;
    RankedList pool;
};

// Ordered sequence of (query, candidate list); each qid appears once.
struct QueryStream {
    std::vector<StreamEntry> entries;

    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }
};

// Relevance judgments: (qid, external doc id) -> grade. Missing pairs read
// as grade 0. Later duplicate assignments overwrite and are counted.
class Qrels {
public:
    void set(const std::string& qid, const std::string& docid, int grade) {
        if (grade < 0)
            throw InputError("negative relevance grade for " + qid + "/" + docid);
        auto& per_query = grades_[qid];
        auto [it, inserted] = per_query.try_emplace(docid, grade);
        if (!inserted) {
            it->second = grade;
            ++overwrites_;
        }
    }

    int grade(const std::string& qid, const std::string& docid) const {
        auto q = grades_.find(qid);
        if (q == grades_.end())
            return 0;
        auto d = q->second.find(docid);
        return d == q->second.end() ? 0 : d->second;
    }

    // All judged (docid, grade) pairs for a query; empty map if unjudged.
    const std::unordered_map<std::string, int>* judged(const std::string& qid) const {
        auto q = grades_.find(qid);
        return q == grades_.end() ? nullptr : &q->second;
    }

    std::size_t query_count() const { return grades_.size(); }
    std::size_t overwrite_count() const { return overwrites_; }

private:
    std::unordered_map<std::string, std::unordered_map<std::string, int>> grades_;
    std::size_t overwrites_ = 0;
};

// Share of top-c candidate occurrences that also occur in at least one other
// query's top-c pool, as a percentage. The statistic is symmetric in the
// queries and depends only on the multiset of pools. It is one of several
// plausible overlap measures; swap in another free function if a different
// definition is needed.
inline double topc_overlap(const QueryStream& stream, std::size_t c) {
    if (c == 0)
        throw InputError("top-c overlap requires c >= 1");
    if (stream.empty())
        throw InputError("top-c overlap is undefined on an empty stream");
    std::unordered_map<std::uint32_t, std::uint32_t> pool_freq;
    std::size_t total = 0;
    for (const auto& entry : stream.entries) {
        const auto& docs = entry.pool.docs;
        std::size_t n = std::min(c, docs.size());
        total += n;
        for (std::size_t i = 0; i < n; ++i)
            ++pool_freq[docs[i].handle];
    }
    if (total == 0)
        return 0.0;
    std::size_t shared = 0;
    for (const auto& [handle, freq] : pool_freq)
        if (freq >= 2)
            shared += freq;
    return 100.0 * static_cast<double>(shared) / static_cast<double>(total);
}

} // namespace l2g
