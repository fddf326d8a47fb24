#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include "l2g/corpus.hpp"
#include "l2g/errors.hpp"
#include "l2g/graph.hpp"

namespace l2g {

// Versioned little-endian binary graph format:
//   magic "L2GAFFGR", u32 version, u64 queries, u64 doc_count,
//   u64 id_count, u64 cells,
//   id_count x (u32 len + bytes)        interned ids, handle order
//   id_count x u32                      df
//   (id_count + 1) x u64                row offsets
//   cells x u32                         columns (col >= row, ascending)
//   cells x i64                         weights
//   u64                                 FNV-1a checksum of all prior bytes

namespace detail {

inline constexpr char kGraphMagic[8] = {'L', '2', 'G', 'A', 'F', 'F', 'G', 'R'};
inline constexpr std::uint32_t kGraphVersion = 1;

inline std::uint64_t fnv1a(const std::uint8_t* data, std::size_t size) {
    std::uint64_t hash = 1469598103934665603ull;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= data[i];
        hash *= 1099511628211ull;
    }
    return hash;
}

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_i64(std::vector<std::uint8_t>& out, std::int64_t v) {
    put_u64(out, static_cast<std::uint64_t>(v));
}

class Cursor {
public:
    Cursor(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i)
            v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i)
            v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }

    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }

    std::string bytes(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return s;
    }

    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) {
        if (pos_ + n > size_)
            throw GraphTruncatedError("graph file truncated at byte " +
                                      std::to_string(pos_));
    }

    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline void save_graph(const AffinityGraph& graph, const Interner& docs,
                       std::ostream& out) {
    const std::uint64_t id_count = docs.size();
    if (graph.handle_space() > id_count)
        throw InputError("graph references handles missing from the id map");

    std::vector<std::uint8_t> buf;
    buf.insert(buf.end(), std::begin(detail::kGraphMagic), std::end(detail::kGraphMagic));
    detail::put_u32(buf, detail::kGraphVersion);
    detail::put_u64(buf, graph.queries_ingested());
    detail::put_u64(buf, graph.doc_count());
    detail::put_u64(buf, id_count);
    detail::put_u64(buf, graph.stored_cells());

    for (std::uint32_t h = 0; h < id_count; ++h) {
        const std::string& id = docs.external_id(DocRef{h});
        detail::put_u32(buf, static_cast<std::uint32_t>(id.size()));
        buf.insert(buf.end(), id.begin(), id.end());
    }
    for (std::uint32_t h = 0; h < id_count; ++h)
        detail::put_u32(buf, graph.df(DocRef{h}));

    // CSR triangle: row offsets, then ascending upper columns per row.
    std::vector<std::uint64_t> row_ptr(id_count + 1, 0);
    std::vector<std::uint32_t> cols;
    std::vector<std::int64_t> vals;
    cols.reserve(graph.stored_cells());
    vals.reserve(graph.stored_cells());
    for (std::uint32_t h = 0; h < id_count; ++h) {
        row_ptr[h] = cols.size();
        const auto* row = graph.row(DocRef{h});
        if (row) {
            std::vector<std::pair<std::uint32_t, std::int64_t>> upper;
            for (const auto& [col, val] : *row)
                if (col >= h)
                    upper.emplace_back(col, val);
            std::sort(upper.begin(), upper.end());
            for (const auto& [col, val] : upper) {
                cols.push_back(col);
                vals.push_back(val);
            }
        }
    }
    row_ptr[id_count] = cols.size();
    for (auto p : row_ptr)
        detail::put_u64(buf, p);
    for (auto c : cols)
        detail::put_u32(buf, c);
    for (auto v : vals)
        detail::put_i64(buf, v);

    detail::put_u64(buf, detail::fnv1a(buf.data(), buf.size()));
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out)
        throw IoError("failed writing graph stream");
}

// Loads a graph saved by save_graph. The id map is interned into `docs` in
// stored handle order; ids already present must map to the same handles.
inline AffinityGraph load_graph(std::istream& in, Interner& docs) {
    std::vector<std::uint8_t> buf(std::istreambuf_iterator<char>(in), {});
    constexpr std::size_t header = 8 + 4 + 8 * 4;
    if (buf.size() < header + 8)
        throw GraphTruncatedError("graph file shorter than its header");
    if (!std::equal(std::begin(detail::kGraphMagic), std::end(detail::kGraphMagic),
                    buf.begin()))
        throw GraphVersionError("not a graph file (bad magic)");

    detail::Cursor cur(buf.data(), buf.size() - 8);
    cur.bytes(8);
    std::uint32_t version = cur.u32();
    if (version != detail::kGraphVersion)
        throw GraphVersionError("unsupported graph file version " +
                                std::to_string(version));
    const std::uint64_t queries = cur.u64();
    const std::uint64_t doc_count = cur.u64();
    const std::uint64_t id_count = cur.u64();
    const std::uint64_t cells = cur.u64();

    std::vector<std::string> ids;
    ids.reserve(id_count);
    for (std::uint64_t h = 0; h < id_count; ++h) {
        std::uint32_t len = cur.u32();
        ids.push_back(cur.bytes(len));
    }
    std::vector<std::uint32_t> df(id_count);
    for (auto& v : df)
        v = cur.u32();
    std::vector<std::uint64_t> row_ptr(id_count + 1);
    for (auto& v : row_ptr)
        v = cur.u64();
    std::vector<std::uint32_t> cols(cells);
    for (auto& v : cols)
        v = cur.u32();
    std::vector<std::int64_t> vals(cells);
    for (auto& v : vals)
        v = cur.i64();
    if (cur.pos() != buf.size() - 8)
        throw GraphTruncatedError("graph file has trailing bytes");
    std::uint64_t stored = detail::Cursor(buf.data() + buf.size() - 8, 8).u64();
    if (stored != detail::fnv1a(buf.data(), buf.size() - 8))
        throw GraphChecksumError("graph file checksum mismatch");

    if (row_ptr[0] != 0 || row_ptr[id_count] != cells)
        throw GraphTruncatedError("graph file row offsets are inconsistent");

    for (std::uint64_t h = 0; h < id_count; ++h) {
        DocRef d = docs.intern(ids[h]);
        if (d.handle != h)
            throw GraphLoadError("graph id map conflicts with already-interned ids");
    }

    std::vector<std::tuple<std::uint32_t, std::uint32_t, std::int64_t>> upper;
    upper.reserve(cells);
    for (std::uint64_t h = 0; h < id_count; ++h) {
        if (row_ptr[h] > row_ptr[h + 1] || row_ptr[h + 1] > cells)
            throw GraphTruncatedError("graph file row offsets are inconsistent");
        for (std::uint64_t i = row_ptr[h]; i < row_ptr[h + 1]; ++i) {
            if (cols[i] < h || cols[i] >= id_count)
                throw GraphLoadError("graph file column index out of range");
            upper.emplace_back(static_cast<std::uint32_t>(h), cols[i], vals[i]);
        }
    }
    AffinityGraph graph = AffinityGraph::restore(std::move(df), queries, upper);
    if (graph.doc_count() != doc_count)
        throw GraphLoadError("graph file doc count disagrees with df section");
    return graph;
}

} // namespace l2g
