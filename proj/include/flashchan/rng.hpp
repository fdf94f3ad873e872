#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace flashchan {

// 64-bit mixer used to derive independent seed values. Distinct inputs give
// decorrelated outputs, so (master_seed, stream_index) pairs can be mapped to
// engine seeds without coordination between streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t p : parts) h = splitmix64(h ^ p);
    return h;
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    static Rng stream(std::uint64_t master_seed, std::uint64_t stream_index) {
        return Rng(mix_seed({master_seed, stream_index}));
    }

    static Rng stream(std::uint64_t master_seed, std::uint64_t i, std::uint64_t j) {
        return Rng(mix_seed({master_seed, i, j}));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform double in (0, 1], safe as a log() argument.
    double uniform_pos() { return 1.0 - uniform(); }

    // Uniform integer in [0, bound) by rejection, bias-free.
    std::uint64_t uniform_below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        std::uint64_t threshold = (0 - bound) % bound;
        for (;;) {
            std::uint64_t r = engine_();
            if (r >= threshold) return r % bound;
        }
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace flashchan
