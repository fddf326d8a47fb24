#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "l2g/corpus.hpp"
#include "l2g/errors.hpp"

namespace l2g {

namespace rng {

// Rejection-sampled bound keeps the draw exactly uniform and independent of
// the standard library's distribution implementations.
inline std::uint64_t bounded(std::mt19937_64& engine, std::uint64_t n) {
    if (n <= 1)
        return 0;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = engine();
    } while (x >= limit);
    return x % n;
}

inline double unit(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& engine) {
    for (std::size_t i = items.size(); i > 1; --i)
        std::swap(items[i - 1], items[bounded(engine, i)]);
}

inline std::uint64_t mix_seed(std::uint64_t seed, const std::string& salt) {
    std::uint64_t h = 1469598103934665603ull ^ seed;
    for (unsigned char c : salt) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace rng

// A listwise reranker: given a query and a window of documents, returns a
// permutation of that window. Invocations are counted; outputs are checked
// against the permutation contract and violations abort the run.
class Reranker {
public:
    virtual ~Reranker() = default;

    std::vector<DocRef> rerank(const QueryRecord& query, std::span<const DocRef> window) {
        ++calls_;
        std::vector<DocRef> out = rerank_window(query, window);
        validate(window, out);
        return out;
    }

    std::uint64_t call_count() const { return calls_; }

private:
    virtual std::vector<DocRef> rerank_window(const QueryRecord& query,
                                              std::span<const DocRef> window) = 0;

    static void validate(std::span<const DocRef> window, const std::vector<DocRef>& out) {
        if (out.size() != window.size())
            throw RerankerError("reranker returned " + std::to_string(out.size()) +
                                " docs for a window of " + std::to_string(window.size()));
        std::vector<std::uint32_t> a, b;
        a.reserve(window.size());
        b.reserve(out.size());
        for (const auto& d : window)
            a.push_back(d.handle);
        for (const auto& d : out)
            b.push_back(d.handle);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        if (a != b)
            throw RerankerError("reranker output is not a permutation of its window");
    }

    std::uint64_t calls_ = 0;
};

class IdentityReranker final : public Reranker {
private:
    std::vector<DocRef> rerank_window(const QueryRecord&,
                                      std::span<const DocRef> window) override {
        return {window.begin(), window.end()};
    }
};

struct OracleConfig {
    const Qrels* qrels = nullptr;
    std::size_t noise_swaps = 0; // random adjacent transpositions per window
    std::uint64_t seed = 0;
};

// Sorts each window by relevance grade descending (stable: ties and
// ungraded docs keep input order), then applies the configured number of
// seeded adjacent transpositions. noise_swaps = 0 is fully deterministic.
class OracleReranker final : public Reranker {
public:
    OracleReranker(OracleConfig cfg, const Interner& docs)
        : cfg_(cfg), docs_(docs), engine_(cfg.seed) {
        if (!cfg_.qrels)
            throw ConfigError("oracle reranker requires qrels");
    }

private:
    std::vector<DocRef> rerank_window(const QueryRecord& query,
                                      std::span<const DocRef> window) override {
        std::vector<DocRef> out(window.begin(), window.end());
        std::stable_sort(out.begin(), out.end(), [&](DocRef a, DocRef b) {
            return grade(query.qid, a) > grade(query.qid, b);
        });
        for (std::size_t i = 0; i < cfg_.noise_swaps && out.size() > 1; ++i) {
            std::size_t at = rng::bounded(engine_, out.size() - 1);
            std::swap(out[at], out[at + 1]);
        }
        return out;
    }

    int grade(const std::string& qid, DocRef d) const {
        return cfg_.qrels->grade(qid, docs_.external_id(d));
    }

    OracleConfig cfg_;
    const Interner& docs_;
    std::mt19937_64 engine_;
};

class RandomReranker final : public Reranker {
public:
    explicit RandomReranker(std::uint64_t seed) : engine_(seed) {}

private:
    std::vector<DocRef> rerank_window(const QueryRecord&,
                                      std::span<const DocRef> window) override {
        std::vector<DocRef> out(window.begin(), window.end());
        rng::shuffle(out, engine_);
        return out;
    }

    std::mt19937_64 engine_;
};

} // namespace l2g
