#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "flashchan/ecc/parity_check.hpp"
#include "flashchan/errors.hpp"
#include "flashchan/rng.hpp"

namespace flashchan {

// Quasi-cyclic degree profile: column weight dv, check weight dc, circulant
// size z, block length n.
struct QcProfile {
    std::uint32_t z = 0;
    std::uint32_t dv = 0;
    std::uint32_t dc = 0;
    std::uint32_t n = 0;

    std::uint32_t block_cols() const { return n / z; }
    std::uint32_t n_checks() const { return dv * n / dc; }
    std::uint32_t block_rows() const { return n_checks() / z; }
    double design_rate() const { return 1.0 - static_cast<double>(n_checks()) / n; }
};

inline void validate(const QcProfile& p) {
    if (p.z == 0 || p.dv == 0 || p.dc == 0 || p.n == 0)
        throw std::invalid_argument("qc profile: all fields must be positive");
    if (p.n % p.z != 0) throw std::invalid_argument("qc profile: z must divide n");
    std::uint64_t edges = static_cast<std::uint64_t>(p.dv) * p.n;
    if (edges % p.dc != 0)
        throw std::invalid_argument("qc profile: dc must divide the edge count dv*n");
    std::uint64_t checks = edges / p.dc;
    if (checks % p.z != 0)
        throw std::invalid_argument("qc profile: z must divide the check count dv*n/dc");
    if (checks / p.z < p.dv)
        throw std::invalid_argument(
            "qc profile: fewer block rows than dv, cannot stack dv circulants per column");
    if (checks >= p.n) throw std::invalid_argument("qc profile: rate would be non-positive");
}

// Shift table of a quasi-cyclic code: shifts[i][j] >= 0 places the identity
// cyclically shifted by that amount in block (i, j); -1 marks a zero block.
// Bit u of block column j connects to check (u + shift) mod z of block row i.
struct QcLdpcCode {
    std::uint32_t z = 0;
    std::vector<std::vector<std::int32_t>> shifts;

    std::uint32_t block_rows() const { return static_cast<std::uint32_t>(shifts.size()); }
    std::uint32_t block_cols() const {
        return shifts.empty() ? 0 : static_cast<std::uint32_t>(shifts[0].size());
    }
    std::uint32_t n_bits() const { return z * block_cols(); }
    std::uint32_t n_checks() const { return z * block_rows(); }
};

inline ParityCheckMatrix expand(const QcLdpcCode& code) {
    std::vector<std::vector<std::uint32_t>> rows(code.n_checks());
    for (std::uint32_t i = 0; i < code.block_rows(); ++i) {
        for (std::uint32_t j = 0; j < code.block_cols(); ++j) {
            std::int32_t s = code.shifts[i][j];
            if (s < 0) continue;
            for (std::uint32_t u = 0; u < code.z; ++u) {
                std::uint32_t check = i * code.z + (u + static_cast<std::uint32_t>(s)) % code.z;
                rows[check].push_back(j * code.z + u);
            }
        }
    }
    for (auto& r : rows) std::sort(r.begin(), r.end());
    return ParityCheckMatrix::from_check_lists(code.n_bits(), std::move(rows));
}

namespace detail {

// Incrementally built Tanner adjacency used while placing circulants.
// Checks are nodes [0, n_checks), bits [n_checks, n_checks + n_bits).
struct PegGraph {
    std::uint32_t n_checks = 0;
    std::uint32_t n_bits = 0;
    std::vector<std::vector<std::uint32_t>> adj;

    PegGraph(std::uint32_t checks, std::uint32_t bits)
        : n_checks(checks), n_bits(bits), adj(checks + bits) {}

    void add_circulant(std::uint32_t block_row, std::uint32_t block_col, std::uint32_t z,
                       std::uint32_t shift) {
        for (std::uint32_t u = 0; u < z; ++u) {
            std::uint32_t check = block_row * z + (u + shift) % z;
            std::uint32_t bit = n_checks + block_col * z + u;
            adj[check].push_back(bit);
            adj[bit].push_back(check);
        }
    }

    // Shortest-path distances from one node to all others on the current
    // graph. `unset` marks unreachable nodes.
    void bfs(std::uint32_t from, std::vector<std::uint32_t>& dist) const {
        const std::uint32_t unset = std::numeric_limits<std::uint32_t>::max();
        dist.assign(adj.size(), unset);
        std::deque<std::uint32_t> queue{from};
        dist[from] = 0;
        while (!queue.empty()) {
            std::uint32_t u = queue.front();
            queue.pop_front();
            for (std::uint32_t w : adj[u]) {
                if (dist[w] != unset) continue;
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
};

}  // namespace detail

// Progressive edge-growth construction, one circulant at a time. For each
// block column the dv least-loaded block rows are used; every candidate
// shift is scored by the Tanner-graph distance between the column's
// representative bit and the check the shift would connect it to, and the
// most distant one wins, lowest shift on ties. Placed blocks are all
// circulants, so the partial graph is invariant under the cyclic shift
// automorphism and scoring one representative bit per block column is exact.
// Deterministic for fixed (profile, seed); `seed` rotates the candidate
// enumeration origin and is the retry knob for rare greedy dead ends.
inline QcLdpcCode peg_construct_qc(const QcProfile& profile, std::uint64_t seed) {
    validate(profile);
    const std::uint32_t z = profile.z;
    const std::uint32_t cols = profile.block_cols();
    const std::uint32_t rows = profile.block_rows();
    const std::uint32_t unset = std::numeric_limits<std::uint32_t>::max();

    QcLdpcCode code;
    code.z = z;
    code.shifts.assign(rows, std::vector<std::int32_t>(cols, -1));

    detail::PegGraph graph(profile.n_checks(), profile.n);
    std::vector<std::uint32_t> row_load(rows, 0);  // circulants placed per block row
    const std::uint32_t row_capacity = profile.dc;
    std::vector<std::uint32_t> dist;
    // seed = 0 enumerates shifts from 0, so ties resolve to the lowest shift;
    // other seeds rotate the enumeration origin.
    std::uint32_t origin = static_cast<std::uint32_t>(seed % z);

    for (std::uint32_t j = 0; j < cols; ++j) {
        std::vector<std::uint32_t> order(rows);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return row_load[a] < row_load[b]; });
        std::uint32_t placed = 0;
        for (std::uint32_t oi = 0; oi < rows && placed < profile.dv; ++oi) {
            std::uint32_t i = order[oi];
            if (row_load[i] >= row_capacity) continue;
            graph.bfs(graph.n_checks + j * z, dist);
            std::uint32_t best_shift = unset;
            std::uint32_t best_dist = 0;
            for (std::uint32_t k = 0; k < z; ++k) {
                std::uint32_t s = (k + origin) % z;
                std::uint32_t d = dist[i * z + s];
                if (best_shift == unset || d > best_dist) {
                    best_shift = s;
                    best_dist = d;
                }
            }
            code.shifts[i][j] = static_cast<std::int32_t>(best_shift);
            graph.add_circulant(i, j, z, best_shift);
            ++row_load[i];
            ++placed;
        }
        if (placed < profile.dv)
            throw std::runtime_error("peg_construct_qc: ran out of row capacity");
    }
    return code;
}

inline nlohmann::json code_to_json(const QcLdpcCode& code) {
    nlohmann::json j;
    j["z"] = code.z;
    j["shift_table"] = code.shifts;
    std::uint32_t dv = 0;
    if (!code.shifts.empty()) {
        for (std::uint32_t i = 0; i < code.block_rows(); ++i)
            if (code.shifts[i][0] >= 0) ++dv;
    }
    j["dv"] = dv;
    std::uint64_t circulants = 0;
    for (const auto& row : code.shifts)
        for (auto s : row)
            if (s >= 0) ++circulants;
    j["dc"] = code.block_rows() ? circulants / code.block_rows() : 0;
    return j;
}

inline QcLdpcCode code_from_json(const nlohmann::json& j) {
    QcLdpcCode code;
    code.z = j.at("z").get<std::uint32_t>();
    code.shifts = j.at("shift_table").get<std::vector<std::vector<std::int32_t>>>();
    if (code.z == 0 || code.shifts.empty() || code.shifts[0].empty())
        throw FormatError("qc code: empty shift table or zero circulant size");
    std::size_t width = code.shifts[0].size();
    for (const auto& row : code.shifts) {
        if (row.size() != width) throw FormatError("qc code: ragged shift table");
        for (auto s : row)
            if (s < -1 || s >= static_cast<std::int32_t>(code.z))
                throw FormatError("qc code: shift outside [-1, z)");
    }
    return code;
}

inline void save_code_json(const QcLdpcCode& code, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open " + path + " for writing");
    out << code_to_json(code).dump(2) << '\n';
}

inline QcLdpcCode load_code_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path);
    nlohmann::json j;
    in >> j;
    return code_from_json(j);
}

}  // namespace flashchan
