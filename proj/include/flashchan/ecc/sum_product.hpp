#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "flashchan/bits.hpp"
#include "flashchan/channels.hpp"
#include "flashchan/ecc/parity_check.hpp"

namespace flashchan {

inline constexpr double kLlrSaturation = 30.0;
inline constexpr double kMessageClip = 25.0;

enum class LlrMode {
    asymmetric,  // LLRs from the true (p, q) pair
    symmetric,   // BSC LLRs at the average crossover (p + q) / 2
};

// Channel log-likelihood ratios log(P(y | 0) / P(y | 1)) for the two
// received values, saturated to +-30.
struct ChannelLlr {
    double llr0 = 0.0;  // received 0
    double llr1 = 0.0;  // received 1
};

inline ChannelLlr channel_llr(const BacParams& c, LlrMode mode = LlrMode::asymmetric) {
    validate(c);
    double p = c.p, q = c.q;
    if (mode == LlrMode::symmetric) p = q = 0.5 * (p + q);
    ChannelLlr llr;
    llr.llr0 = std::clamp(std::log((1.0 - p) / q), -kLlrSaturation, kLlrSaturation);
    llr.llr1 = std::clamp(std::log(p / (1.0 - q)), -kLlrSaturation, kLlrSaturation);
    return llr;
}

inline std::vector<double> received_llrs(const BitVec& y, const ChannelLlr& llr) {
    std::vector<double> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] ? llr.llr1 : llr.llr0;
    return out;
}

struct SpResult {
    BitVec word;
    bool parity_ok = false;
    std::uint32_t iterations = 0;
};

// Sum-product decoder with tanh-rule check updates. Check extrinsics use
// forward/backward partial products, messages are clipped to +-25, and the
// hard decision is re-checked against H every iteration; with early
// termination the loop exits on the first satisfied syndrome. The edge
// structure is built once, so one instance can decode many frames.
class SpDecoder {
  public:
    explicit SpDecoder(const ParityCheckMatrix& h) : h_(&h) {
        offset_.assign(h.n_checks + 1, 0);
        for (std::uint32_t c = 0; c < h.n_checks; ++c)
            offset_[c + 1] = offset_[c] + static_cast<std::uint32_t>(h.check_bits[c].size());
        const std::uint32_t n_edges = offset_[h.n_checks];
        edge_bit_.resize(n_edges);
        bit_edges_.assign(h.n_bits, {});
        for (std::uint32_t c = 0; c < h.n_checks; ++c) {
            std::uint32_t base = offset_[c];
            for (std::uint32_t i = 0; i < h.check_bits[c].size(); ++i) {
                std::uint32_t b = h.check_bits[c][i];
                edge_bit_[base + i] = b;
                bit_edges_[b].push_back(base + i);
            }
        }
        msg_.resize(n_edges);
        ext_.resize(n_edges);
        totals_.resize(h.n_bits);
    }

    SpResult decode(const std::vector<double>& llr_in, std::uint32_t max_iter = 50,
                    bool early_term = true) {
        const ParityCheckMatrix& h = *h_;
        if (llr_in.size() != h.n_bits)
            throw std::invalid_argument("sp_decode: llr length does not match code length");

        SpResult res;
        res.word.assign(h.n_bits, 0);
        auto harden = [&](const std::vector<double>& v) {
            for (std::uint32_t b = 0; b < h.n_bits; ++b) res.word[b] = v[b] < 0.0 ? 1 : 0;
        };
        auto syndrome_ok = [&]() {
            for (std::uint32_t c = 0; c < h.n_checks; ++c) {
                std::uint8_t s = 0;
                for (std::uint32_t b : h.check_bits[c]) s ^= res.word[b];
                if (s) return false;
            }
            return true;
        };

        harden(llr_in);
        if (syndrome_ok()) {
            res.parity_ok = true;
            return res;
        }

        const std::uint32_t n_edges = offset_[h.n_checks];
        for (std::uint32_t e = 0; e < n_edges; ++e) msg_[e] = llr_in[edge_bit_[e]];

        std::uint32_t it = 0;
        for (it = 1; it <= max_iter; ++it) {
            for (std::uint32_t c = 0; c < h.n_checks; ++c) {
                std::uint32_t deg = offset_[c + 1] - offset_[c];
                if (deg == 0) continue;
                std::uint32_t base = offset_[c];
                tanh_buf_.resize(deg);
                fwd_.resize(deg + 1);
                fwd_[0] = 1.0;
                for (std::uint32_t i = 0; i < deg; ++i) {
                    tanh_buf_[i] = std::tanh(0.5 * msg_[base + i]);
                    fwd_[i + 1] = fwd_[i] * tanh_buf_[i];
                }
                double bwd = 1.0;
                for (std::uint32_t i = deg; i-- > 0;) {
                    double prod = fwd_[i] * bwd;
                    prod = std::clamp(prod, -(1.0 - 1e-15), 1.0 - 1e-15);
                    ext_[base + i] =
                        std::clamp(2.0 * std::atanh(prod), -kMessageClip, kMessageClip);
                    bwd *= tanh_buf_[i];
                }
            }
            for (std::uint32_t b = 0; b < h.n_bits; ++b) {
                double total = llr_in[b];
                for (std::uint32_t e : bit_edges_[b]) total += ext_[e];
                totals_[b] = total;
                for (std::uint32_t e : bit_edges_[b])
                    msg_[e] = std::clamp(total - ext_[e], -kMessageClip, kMessageClip);
            }
            harden(totals_);
            if (early_term && syndrome_ok()) break;
        }
        res.parity_ok = syndrome_ok();
        res.iterations = std::min(it, max_iter);
        return res;
    }

  private:
    const ParityCheckMatrix* h_;
    std::vector<std::uint32_t> offset_;
    std::vector<std::uint32_t> edge_bit_;
    std::vector<std::vector<std::uint32_t>> bit_edges_;
    std::vector<double> msg_, ext_, totals_, tanh_buf_, fwd_;
};

inline SpResult sp_decode(const ParityCheckMatrix& h, const std::vector<double>& llr_in,
                          std::uint32_t max_iter = 50, bool early_term = true) {
    SpDecoder dec(h);
    return dec.decode(llr_in, max_iter, early_term);
}

}  // namespace flashchan
