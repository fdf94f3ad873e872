#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "flashchan/rng.hpp"

namespace flashchan {

using BitVec = std::vector<std::uint8_t>;

enum class PageKind : std::uint8_t { lower = 0, upper = 1 };

inline const char* to_string(PageKind k) { return k == PageKind::lower ? "lower" : "upper"; }

inline PageKind page_kind_from_string(const std::string& s) {
    if (s == "lower") return PageKind::lower;
    if (s == "upper") return PageKind::upper;
    throw std::invalid_argument("unknown page kind: " + s);
}

// Gray mapping of the four cell levels. Level 0 is the erased state; the
// lower-page bit is the most significant one.
//   level:      0    1    2    3
//   (low,up):  11   10   00   01
inline std::uint8_t level_lower_bit(std::uint8_t level) {
    static constexpr std::uint8_t low[4] = {1, 1, 0, 0};
    return low[level & 3];
}

inline std::uint8_t level_upper_bit(std::uint8_t level) {
    static constexpr std::uint8_t up[4] = {1, 0, 0, 1};
    return up[level & 3];
}

inline std::uint8_t bits_to_level(std::uint8_t lower_bit, std::uint8_t upper_bit) {
    if (lower_bit && upper_bit) return 0;
    if (lower_bit) return 1;
    if (!upper_bit) return 2;
    return 3;
}

inline BitVec random_bits(Rng& rng, std::size_t n) {
    BitVec v(n);
    std::size_t i = 0;
    while (i < n) {
        std::uint64_t w = rng.next_u64();
        std::size_t take = std::min<std::size_t>(64, n - i);
        for (std::size_t b = 0; b < take; ++b) v[i + b] = static_cast<std::uint8_t>((w >> b) & 1u);
        i += take;
    }
    return v;
}

inline std::size_t count_ones(const BitVec& v) {
    std::size_t c = 0;
    for (auto b : v) c += b;
    return c;
}

inline std::size_t hamming_distance(const BitVec& a, const BitVec& b) {
    if (a.size() != b.size()) throw std::invalid_argument("hamming_distance: size mismatch");
    std::size_t c = 0;
    for (std::size_t i = 0; i < a.size(); ++i) c += (a[i] != b[i]);
    return c;
}

}  // namespace flashchan
