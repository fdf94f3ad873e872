#pragma once

// Reference implementations used only by the test suites. Each one computes
// the same quantity as a library routine through a different, slower route so
// the two can be checked against each other.

#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <stdexcept>
#include <vector>

#include "flashchan/channels.hpp"
#include "flashchan/ecc/parity_check.hpp"

namespace oracles {

// Distribution of the error count over an n-bit frame: enumerate every data
// word and every flip pattern and accumulate the pattern probabilities. Only
// practical for small n, but it makes no distributional shortcuts at all.
inline std::vector<double> k_pmf_bruteforce(const flashchan::BacParams& c, unsigned n) {
    if (n == 0 || n > 12) throw std::invalid_argument("k_pmf_bruteforce: n out of range");
    std::vector<double> pmf(n + 1, 0.0);
    const double data_weight = std::ldexp(1.0, -static_cast<int>(n));
    for (std::uint32_t x = 0; x < (1u << n); ++x) {
        for (std::uint32_t e = 0; e < (1u << n); ++e) {
            double pr = 1.0;
            for (unsigned i = 0; i < n; ++i) {
                const bool one_written = (x >> i) & 1u;
                const bool flipped = (e >> i) & 1u;
                const double f = one_written ? c.q : c.p;
                pr *= flipped ? f : 1.0 - f;
            }
            pmf[std::popcount(e)] += data_weight * pr;
        }
    }
    return pmf;
}

inline double binom_pmf(unsigned n, unsigned k, double p) {
    if (p == 0.0) return k == 0 ? 1.0 : 0.0;
    if (p == 1.0) return k == n ? 1.0 : 0.0;
    double lp = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                k * std::log(p) + (n - k) * std::log1p(-p);
    return std::exp(lp);
}

// Same distribution as a mixture over the number of zeros m in the data word:
// K given m is the sum of independent Binomial(m, p) and Binomial(n-m, q).
inline std::vector<double> k_pmf_mixture(const flashchan::BacParams& c, unsigned n) {
    std::vector<double> pmf(n + 1, 0.0);
    for (unsigned m = 0; m <= n; ++m) {
        const double wm = binom_pmf(n, m, 0.5);
        for (unsigned k = 0; k <= n; ++k) {
            double conv = 0.0;
            for (unsigned k0 = 0; k0 <= k; ++k0) {
                if (k0 > m || k - k0 > n - m) continue;
                conv += binom_pmf(m, k0, c.p) * binom_pmf(n - m, k - k0, c.q);
            }
            pmf[k] += wm * conv;
        }
    }
    return pmf;
}

// Shortest cycle length found by deleting each edge in turn and searching for
// the shortest remaining path between its endpoints. Quadratic in the edge
// count, so only suitable for small graphs.
inline std::uint32_t girth_by_edge_removal(const flashchan::ParityCheckMatrix& h) {
    const std::uint32_t nc = h.n_checks;
    const std::uint32_t nodes = nc + h.n_bits;
    std::uint32_t best = 0;
    std::vector<std::int32_t> dist(nodes);
    for (std::uint32_t c = 0; c < nc; ++c) {
        for (std::uint32_t b : h.check_bits[c]) {
            const std::uint32_t target = nc + b;
            std::fill(dist.begin(), dist.end(), -1);
            dist[c] = 0;
            std::deque<std::uint32_t> queue{c};
            while (!queue.empty()) {
                std::uint32_t u = queue.front();
                queue.pop_front();
                if (best != 0 && static_cast<std::uint32_t>(dist[u]) + 1 >= best) continue;
                if (u < nc) {
                    for (std::uint32_t nb : h.check_bits[u]) {
                        if (u == c && nb == b) continue;
                        if (dist[nc + nb] < 0) {
                            dist[nc + nb] = dist[u] + 1;
                            queue.push_back(nc + nb);
                        }
                    }
                } else {
                    for (std::uint32_t ch : h.bit_checks[u - nc]) {
                        if (u == target && ch == c) continue;
                        if (dist[ch] < 0) {
                            dist[ch] = dist[u] + 1;
                            queue.push_back(ch);
                        }
                    }
                }
            }
            if (dist[target] >= 0) {
                std::uint32_t cycle = static_cast<std::uint32_t>(dist[target]) + 1;
                if (best == 0 || cycle < best) best = cycle;
            }
        }
    }
    return best;
}

// Maximum-likelihood reference for codes small enough to enumerate all error
// patterns of weight <= 2. A pattern is uniquely ML-correctable exactly when
// it is the unique minimum-weight pattern with its syndrome.
struct MlTable {
    std::vector<std::uint64_t> col_syndrome;
    std::map<std::uint64_t, std::pair<unsigned, unsigned>> best;  // syndrome -> (weight, count)
};

inline MlTable build_ml_table(const flashchan::ParityCheckMatrix& h) {
    if (h.n_checks > 64) throw std::invalid_argument("build_ml_table: too many checks");
    MlTable t;
    t.col_syndrome.assign(h.n_bits, 0);
    for (std::uint32_t c = 0; c < h.n_checks; ++c)
        for (std::uint32_t b : h.check_bits[c]) t.col_syndrome[b] |= 1ull << c;
    auto note = [&](std::uint64_t s, unsigned w) {
        auto it = t.best.find(s);
        if (it == t.best.end())
            t.best.emplace(s, std::make_pair(w, 1u));
        else if (w < it->second.first)
            it->second = {w, 1u};
        else if (w == it->second.first)
            ++it->second.second;
    };
    note(0, 0);
    for (std::uint32_t i = 0; i < h.n_bits; ++i) note(t.col_syndrome[i], 1);
    for (std::uint32_t i = 0; i < h.n_bits; ++i)
        for (std::uint32_t j = i + 1; j < h.n_bits; ++j)
            note(t.col_syndrome[i] ^ t.col_syndrome[j], 2);
    return t;
}

inline bool ml_uniquely_corrects(const MlTable& t, std::uint64_t syndrome, unsigned weight) {
    auto it = t.best.find(syndrome);
    return it != t.best.end() && it->second.first == weight && it->second.second == 1;
}

}  // namespace oracles
