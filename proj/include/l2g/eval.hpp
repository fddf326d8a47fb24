#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "l2g/corpus.hpp"
#include "l2g/errors.hpp"

namespace l2g {

enum class Gain { exponential, linear };

inline Gain parse_gain(const std::string& s) {
    if (s == "exponential") return Gain::exponential;
    if (s == "linear") return Gain::linear;
    throw ConfigError("unknown gain '" + s + "' (expected exponential|linear)");
}

struct EvalReport {
    std::map<std::string, double> per_query; // scored queries only
    double mean = 0.0;                       // macro-average over scored queries
    std::size_t skipped = 0;                 // queries with no relevant judgments
    std::size_t k = 0;
    bool all_skipped = false;
};

namespace detail {

inline double gain_of(int grade, Gain gain) {
    if (gain == Gain::linear)
        return static_cast<double>(grade);
    return std::exp2(static_cast<double>(grade)) - 1.0;
}

} // namespace detail

// nDCG@k with log2 position discounts. The ideal ranking draws on every
// judged doc for the qid, not just the docs present in the ranking; a query
// whose judgments carry no gain has no score (nullopt, "skipped").
inline std::optional<double> ndcg_at_k(const RankedList& ranking, const Qrels& qrels,
                                       const Interner& docs, std::size_t k,
                                       Gain gain = Gain::exponential) {
    if (k == 0)
        throw InputError("ndcg cutoff must be at least 1");

    const auto* judged = qrels.judged(ranking.qid);
    double ideal = 0.0;
    if (judged) {
        std::vector<int> grades;
        grades.reserve(judged->size());
        for (const auto& [docid, grade] : *judged)
            grades.push_back(grade);
        std::sort(grades.begin(), grades.end(), std::greater<int>());
        const std::size_t top = std::min(k, grades.size());
        for (std::size_t i = 0; i < top; ++i)
            ideal += detail::gain_of(grades[i], gain) / std::log2(static_cast<double>(i) + 2.0);
    }
    if (ideal == 0.0)
        return std::nullopt;

    double dcg = 0.0;
    const std::size_t depth = std::min(k, ranking.docs.size());
    for (std::size_t i = 0; i < depth; ++i) {
        int grade = qrels.grade(ranking.qid, docs.external_id(ranking.docs[i]));
        dcg += detail::gain_of(grade, gain) / std::log2(static_cast<double>(i) + 2.0);
    }
    return dcg / ideal;
}

inline EvalReport evaluate_run(const std::vector<RankedList>& run, const Qrels& qrels,
                               const Interner& docs, std::size_t k,
                               Gain gain = Gain::exponential) {
    EvalReport report;
    report.k = k;
    double total = 0.0;
    for (const auto& list : run) {
        auto score = ndcg_at_k(list, qrels, docs, k, gain);
        if (!score) {
            ++report.skipped;
            continue;
        }
        report.per_query[list.qid] = *score;
        total += *score;
    }
    if (report.per_query.empty()) {
        report.all_skipped = true;
        report.mean = 0.0;
    } else {
        report.mean = total / static_cast<double>(report.per_query.size());
    }
    return report;
}

// "0.584" -> "58.4"; percentages rounded to one decimal.
inline std::string format_percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f", fraction * 100.0);
    return buf;
}

// One row per method, one column per dataset plus the macro average across
// datasets. Dataset columns are the union of all keys, sorted.
inline void compare_runs(
    const std::vector<std::pair<std::string, std::map<std::string, EvalReport>>>& methods,
    std::ostream& out) {
    if (methods.empty())
        throw InputError("nothing to compare");

    std::vector<std::string> datasets;
    for (const auto& [method, per_dataset] : methods)
        for (const auto& [dataset, report] : per_dataset)
            if (std::find(datasets.begin(), datasets.end(), dataset) == datasets.end())
                datasets.push_back(dataset);
    std::sort(datasets.begin(), datasets.end());

    out << "method";
    for (const auto& d : datasets)
        out << "," << d;
    out << ",average\n";
    for (const auto& [method, per_dataset] : methods) {
        out << method;
        double total = 0.0;
        std::size_t cells = 0;
        for (const auto& d : datasets) {
            auto it = per_dataset.find(d);
            if (it == per_dataset.end()) {
                out << ",";
                continue;
            }
            out << "," << format_percent(it->second.mean);
            total += it->second.mean;
            ++cells;
        }
        out << "," << (cells ? format_percent(total / static_cast<double>(cells)) : "")
            << "\n";
    }
}

// `qid<TAB>ndcg` rows in qid order, skipped queries omitted.
inline void write_per_query(const EvalReport& report, std::ostream& out) {
    char buf[32];
    for (const auto& [qid, score] : report.per_query) {
        std::snprintf(buf, sizeof(buf), "%.6f", score);
        out << qid << "\t" << buf << "\n";
    }
}

} // namespace l2g
