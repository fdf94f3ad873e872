#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "flashchan/errors.hpp"

namespace flashchan {

// Sparse binary parity-check matrix with both adjacency directions.
struct ParityCheckMatrix {
    std::uint32_t n_bits = 0;
    std::uint32_t n_checks = 0;
    std::vector<std::vector<std::uint32_t>> check_bits;  // per check, bit indices
    std::vector<std::vector<std::uint32_t>> bit_checks;  // per bit, check indices

    static ParityCheckMatrix from_check_lists(std::uint32_t n_bits,
                                              std::vector<std::vector<std::uint32_t>> rows) {
        ParityCheckMatrix h;
        h.n_bits = n_bits;
        h.n_checks = static_cast<std::uint32_t>(rows.size());
        h.check_bits = std::move(rows);
        h.bit_checks.assign(n_bits, {});
        for (std::uint32_t c = 0; c < h.n_checks; ++c) {
            for (std::uint32_t b : h.check_bits[c]) {
                if (b >= n_bits) throw std::invalid_argument("parity check: bit index out of range");
                h.bit_checks[b].push_back(c);
            }
        }
        return h;
    }

    std::uint64_t n_edges() const {
        std::uint64_t e = 0;
        for (const auto& row : check_bits) e += row.size();
        return e;
    }
};

// Length of the shortest cycle of the Tanner graph, or 0 if it is a forest.
// Breadth-first search from every check node; any cycle alternates between
// the two sides, so rooting at checks covers all of them.
inline std::uint32_t girth(const ParityCheckMatrix& h) {
    const std::uint32_t nc = h.n_checks, nb = h.n_bits;
    const std::uint32_t n_nodes = nc + nb;
    std::uint32_t best = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> dist(n_nodes), parent(n_nodes);
    const std::uint32_t unset = std::numeric_limits<std::uint32_t>::max();
    std::deque<std::uint32_t> queue;

    auto neighbors = [&](std::uint32_t node) -> const std::vector<std::uint32_t>& {
        return node < nc ? h.check_bits[node] : h.bit_checks[node - nc];
    };
    auto to_node = [&](std::uint32_t node, std::uint32_t nb_idx) {
        return node < nc ? nb_idx + nc : nb_idx;
    };

    for (std::uint32_t root = 0; root < nc; ++root) {
        std::fill(dist.begin(), dist.end(), unset);
        std::fill(parent.begin(), parent.end(), unset);
        queue.clear();
        dist[root] = 0;
        queue.push_back(root);
        while (!queue.empty()) {
            std::uint32_t u = queue.front();
            queue.pop_front();
            if (2 * dist[u] + 1 >= best) continue;
            for (std::uint32_t raw : neighbors(u)) {
                std::uint32_t w = to_node(u, raw);
                if (w == parent[u]) continue;
                if (dist[w] == unset) {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else {
                    best = std::min(best, dist[u] + dist[w] + 1);
                }
            }
        }
    }
    return best == std::numeric_limits<std::uint32_t>::max() ? 0 : best;
}

// Rank of H over GF(2), by elimination on 64-bit packed rows.
inline std::uint32_t rank2(const ParityCheckMatrix& h) {
    const std::uint32_t words = (h.n_bits + 63) / 64;
    std::vector<std::vector<std::uint64_t>> rows(h.n_checks,
                                                 std::vector<std::uint64_t>(words, 0));
    for (std::uint32_t c = 0; c < h.n_checks; ++c)
        for (std::uint32_t b : h.check_bits[c]) rows[c][b >> 6] ^= 1ULL << (b & 63);
    std::uint32_t rank = 0;
    for (std::uint32_t col = 0; col < h.n_bits && rank < h.n_checks; ++col) {
        std::uint32_t word = col >> 6;
        std::uint64_t mask = 1ULL << (col & 63);
        std::uint32_t pivot = rank;
        while (pivot < h.n_checks && !(rows[pivot][word] & mask)) ++pivot;
        if (pivot == h.n_checks) continue;
        std::swap(rows[rank], rows[pivot]);
        for (std::uint32_t r = rank + 1; r < h.n_checks; ++r) {
            if (rows[r][word] & mask)
                for (std::uint32_t w = word; w < words; ++w) rows[r][w] ^= rows[rank][w];
        }
        ++rank;
    }
    return rank;
}

inline std::uint32_t k_effective(const ParityCheckMatrix& h) { return h.n_bits - rank2(h); }

// ---------------------------------------------------------------------------
// alist serialization (MacKay's format, zero-padded entries).
// ---------------------------------------------------------------------------

inline void write_alist(const ParityCheckMatrix& h, std::ostream& out) {
    std::size_t max_col = 0, max_row = 0;
    for (const auto& v : h.bit_checks) max_col = std::max(max_col, v.size());
    for (const auto& v : h.check_bits) max_row = std::max(max_row, v.size());
    out << h.n_bits << ' ' << h.n_checks << '\n';
    out << max_col << ' ' << max_row << '\n';
    for (std::uint32_t b = 0; b < h.n_bits; ++b)
        out << h.bit_checks[b].size() << (b + 1 < h.n_bits ? ' ' : '\n');
    for (std::uint32_t c = 0; c < h.n_checks; ++c)
        out << h.check_bits[c].size() << (c + 1 < h.n_checks ? ' ' : '\n');
    for (std::uint32_t b = 0; b < h.n_bits; ++b) {
        for (std::size_t i = 0; i < max_col; ++i) {
            std::uint64_t v = i < h.bit_checks[b].size() ? h.bit_checks[b][i] + 1 : 0;
            out << v << (i + 1 < max_col ? ' ' : '\n');
        }
    }
    for (std::uint32_t c = 0; c < h.n_checks; ++c) {
        for (std::size_t i = 0; i < max_row; ++i) {
            std::uint64_t v = i < h.check_bits[c].size() ? h.check_bits[c][i] + 1 : 0;
            out << v << (i + 1 < max_row ? ' ' : '\n');
        }
    }
}

inline void write_alist(const ParityCheckMatrix& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    write_alist(h, out);
}

inline ParityCheckMatrix read_alist(std::istream& in) {
    std::uint32_t n = 0, m = 0;
    std::size_t max_col = 0, max_row = 0;
    if (!(in >> n >> m >> max_col >> max_row)) throw FormatError("alist: bad header");
    std::vector<std::size_t> col_deg(n), row_deg(m);
    for (auto& d : col_deg)
        if (!(in >> d)) throw FormatError("alist: bad column degree list");
    for (auto& d : row_deg)
        if (!(in >> d)) throw FormatError("alist: bad row degree list");
    for (std::uint32_t b = 0; b < n; ++b)
        for (std::size_t i = 0; i < max_col; ++i) {
            std::uint64_t v;
            if (!(in >> v)) throw FormatError("alist: truncated column lists");
            if (i < col_deg[b] && (v == 0 || v > m)) throw FormatError("alist: bad check index");
        }
    std::vector<std::vector<std::uint32_t>> rows(m);
    for (std::uint32_t c = 0; c < m; ++c) {
        for (std::size_t i = 0; i < max_row; ++i) {
            std::uint64_t v;
            if (!(in >> v)) throw FormatError("alist: truncated row lists");
            if (i < row_deg[c]) {
                if (v == 0 || v > n) throw FormatError("alist: bad bit index");
                rows[c].push_back(static_cast<std::uint32_t>(v - 1));
            }
        }
        std::sort(rows[c].begin(), rows[c].end());
    }
    return ParityCheckMatrix::from_check_lists(n, std::move(rows));
}

inline ParityCheckMatrix read_alist(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    return read_alist(in);
}

}  // namespace flashchan
