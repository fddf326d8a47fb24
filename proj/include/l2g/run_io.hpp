#pragma once

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "l2g/corpus.hpp"
#include "l2g/errors.hpp"

namespace l2g {

// TREC run format: `qid Q0 docid rank score tag`, whitespace-separated on
// read, single-space on write. One RankedList per qid, in first-seen qid
// order. Ranks must be strictly ascending within a qid; the score column is
// kept as a first-stage side-band.
inline std::vector<RankedList> parse_run_file(std::istream& in, Interner& docs) {
    std::vector<RankedList> lists;
    std::unordered_map<std::string, std::size_t> list_of_qid;
    std::unordered_map<std::string, std::unordered_set<std::uint32_t>> seen_docs;
    std::unordered_map<std::string, long long> last_rank;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::istringstream fields(line);
        std::string qid, q0, docid, tag;
        long long rank = 0;
        double score = 0.0;
        if (!(fields >> qid >> q0 >> docid >> rank >> score >> tag))
            throw ParseError("malformed run line: '" + line + "'", lineno);
        std::string extra;
        if (fields >> extra)
            throw ParseError("trailing field '" + extra + "' in run line", lineno);

        auto [it, fresh] = list_of_qid.try_emplace(qid, lists.size());
        if (fresh) {
            lists.push_back(RankedList{qid, {}, {}, tag});
            last_rank[qid] = 0;
        }
        if (rank <= last_rank[qid])
            throw ParseError("non-ascending rank " + std::to_string(rank) +
                                 " for qid " + qid,
                             lineno);
        last_rank[qid] = rank;
        DocRef d = docs.intern(docid);
        if (!seen_docs[qid].insert(d.handle).second)
            throw ParseError("duplicate document " + docid + " for qid " + qid, lineno);
        auto& list = lists[it->second];
        list.docs.push_back(d);
        list.scores.push_back(score);
    }
    return lists;
}

inline std::string format_run_score(double score) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", score);
    return buf;
}

// Emits `qid Q0 docid rank score tag` with ranks 1..n in list order. Lists
// without scores get synthetic strictly-decreasing ones (n - i).
inline void write_run_file(std::ostream& out, const std::vector<RankedList>& lists,
                           const Interner& docs, const std::string& tag) {
    for (const auto& list : lists) {
        const std::size_t n = list.docs.size();
        for (std::size_t i = 0; i < n; ++i) {
            double score = i < list.scores.size() ? list.scores[i]
                                                  : static_cast<double>(n - i);
            out << list.qid << " Q0 " << docs.external_id(list.docs[i]) << ' '
                << (i + 1) << ' ' << format_run_score(score) << ' ' << tag << '\n';
        }
    }
}

// Qrels format: `qid 0 docid grade`. Later duplicates overwrite earlier
// grades; the overwrite count is reported on the returned Qrels.
inline Qrels parse_qrels(std::istream& in) {
    Qrels qrels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::istringstream fields(line);
        std::string qid, iter, docid;
        long long grade = 0;
        if (!(fields >> qid >> iter >> docid >> grade))
            throw ParseError("malformed qrels line: '" + line + "'", lineno);
        std::string extra;
        if (fields >> extra)
            throw ParseError("trailing field '" + extra + "' in qrels line", lineno);
        if (grade < 0)
            throw ParseError("negative grade for " + qid + "/" + docid, lineno);
        qrels.set(qid, docid, static_cast<int>(grade));
    }
    return qrels;
}

// Wraps parsed run lists as a query stream (no query text).
inline QueryStream to_stream(std::vector<RankedList> lists) {
    QueryStream stream;
    stream.entries.reserve(lists.size());
    for (auto& list : lists) {
        StreamEntry entry;
        entry.query = QueryRecord{list.qid, std::nullopt};
        entry.pool = std::move(list);
        stream.entries.push_back(std::move(entry));
    }
    return stream;
}

} // namespace l2g
