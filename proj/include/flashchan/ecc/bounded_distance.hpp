#pragma once

#include <cstdint>
#include <stdexcept>

namespace flashchan {

// Bounded-distance stand-in for an algebraic code: decoding succeeds exactly
// when the frame carries at most t errors. Captures a hard-decision BCH
// decoder without implementing its algebra; k is carried for rate bookkeeping
// only.
struct BoundedDistanceCode {
    std::uint64_t n = 0;
    std::uint64_t k = 0;
    std::uint64_t t = 0;
};

inline void validate(const BoundedDistanceCode& c) {
    if (c.n == 0) throw std::invalid_argument("bounded-distance code: n must be > 0");
    if (c.k == 0 || c.k >= c.n)
        throw std::invalid_argument("bounded-distance code: need 0 < k < n");
    if (c.t >= c.n) throw std::invalid_argument("bounded-distance code: t must be < n");
}

inline bool bd_decode_success(const BoundedDistanceCode& c, std::uint64_t errors) {
    return errors <= c.t;
}

}  // namespace flashchan
