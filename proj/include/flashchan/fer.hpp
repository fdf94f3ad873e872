#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "flashchan/bits.hpp"
#include "flashchan/channels.hpp"
#include "flashchan/ecc/bounded_distance.hpp"
#include "flashchan/ecc/parity_check.hpp"
#include "flashchan/ecc/sum_product.hpp"
#include "flashchan/error_data.hpp"
#include "flashchan/rng.hpp"

namespace flashchan {

struct WilsonInterval {
    double lo = 0.0;
    double hi = 1.0;
};

// Wilson score interval for a binomial proportion, 95% by default.
inline WilsonInterval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                      double z = 1.959963984540054) {
    if (trials == 0) return {0.0, 1.0};
    double n = static_cast<double>(trials);
    double phat = static_cast<double>(successes) / n;
    double z2 = z * z;
    double denom = 1.0 + z2 / n;
    double center = (phat + z2 / (2.0 * n)) / denom;
    double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

enum class StopReason { min_errors_reached, frame_cap, data_exhausted };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::min_errors_reached: return "min_errors_reached";
        case StopReason::frame_cap: return "frame_cap";
        default: return "data_exhausted";
    }
}

struct StopRule {
    std::uint64_t min_frame_errors = 400;
    std::uint64_t max_frames = 100000000;
};

struct FerEstimate {
    std::uint64_t frames = 0;
    std::uint64_t errors = 0;
    double fer = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 1.0;
    StopReason reason = StopReason::frame_cap;
    std::uint64_t seed = 0;
    std::uint32_t workers = 1;
    std::string model;  // channel family the frames came from
    std::string code;   // decoder the frames went through
};

struct BdDecoder {
    BoundedDistanceCode code;
};

struct SpaDecoder {
    const ParityCheckMatrix* matrix = nullptr;
    ChannelLlr llr;
    std::uint32_t max_iter = 50;
    bool early_term = true;
};

using Decoder = std::variant<BdDecoder, SpaDecoder>;

inline std::uint64_t decoder_frame_length(const Decoder& dec) {
    if (const auto* bd = std::get_if<BdDecoder>(&dec)) return bd->code.n;
    return std::get<SpaDecoder>(dec).matrix->n_bits;
}

// Labels stay comma-free so they can sit inside csv fields unquoted.
inline std::string code_label(const Decoder& dec) {
    if (const auto* bd = std::get_if<BdDecoder>(&dec))
        return "bd(n=" + std::to_string(bd->code.n) + ";k=" + std::to_string(bd->code.k) +
               ";t=" + std::to_string(bd->code.t) + ")";
    const auto& spa = std::get<SpaDecoder>(dec);
    return "ldpc(n=" + std::to_string(spa.matrix->n_bits) +
           ";checks=" + std::to_string(spa.matrix->n_checks) + ")";
}

namespace detail {

// One simulated frame, fully determined by (master_seed, frame_index).
// The bounded-distance path only needs the error count; the soft path
// transmits a uniform random frame, applies its error vector to the all-zero
// codeword, and decodes: a frame fails when the decoder does not return the
// transmitted codeword.
struct FrameSim {
    const PageChannel* channel;
    const Decoder* decoder;
    std::uint64_t n;

    bool frame_failed(std::uint64_t master_seed, std::uint64_t frame_index,
                      SpDecoder* spa) const {
        Rng rng = Rng::stream(master_seed, frame_index);
        if (const auto* bd = std::get_if<BdDecoder>(decoder)) {
            DirCounts counts = draw_error_counts(*channel, n, rng);
            return !bd_decode_success(bd->code, counts.k());
        }
        const auto& spec = std::get<SpaDecoder>(*decoder);
        BitVec x = random_bits(rng, n);
        BitVec y = transmit(x, *channel, rng);
        BitVec received(n);
        for (std::uint64_t i = 0; i < n; ++i) received[i] = x[i] ^ y[i];
        SpResult r = spa->decode(received_llrs(received, spec.llr), spec.max_iter,
                                 spec.early_term);
        if (!r.parity_ok) return true;
        return count_ones(r.word) != 0;
    }
};

}  // namespace detail

// Monte-Carlo frame error rate. Frames are independent streams derived from
// (master_seed, frame_index) and the stopping rule is evaluated at fixed
// block boundaries, so the estimate is bit-identical for any worker count.
inline FerEstimate estimate_fer(const PageChannel& channel, const Decoder& decoder,
                                const StopRule& stop, std::uint64_t master_seed,
                                std::uint32_t workers = 1) {
    validate(channel);
    if (stop.max_frames == 0) throw std::invalid_argument("estimate_fer: max_frames must be > 0");
    if (workers == 0) throw std::invalid_argument("estimate_fer: workers must be > 0");
    const bool soft = std::holds_alternative<SpaDecoder>(decoder);
    if (soft && std::get<SpaDecoder>(decoder).matrix == nullptr)
        throw std::invalid_argument("estimate_fer: decoder has no parity-check matrix");
    const std::uint64_t n = decoder_frame_length(decoder);
    const std::uint64_t block = soft ? 64 : 16384;
    detail::FrameSim sim{&channel, &decoder, n};

    std::uint64_t frames = 0, errors = 0;
    FerEstimate est;
    est.seed = master_seed;
    est.workers = workers;
    est.model = model_family(channel);
    est.code = code_label(decoder);
    while (true) {
        std::uint64_t end = std::min(frames + block, stop.max_frames);
        if (workers == 1) {
            std::optional<SpDecoder> local;
            if (soft) local.emplace(*std::get<SpaDecoder>(decoder).matrix);
            for (std::uint64_t f = frames; f < end; ++f)
                if (sim.frame_failed(master_seed, f, local ? &*local : nullptr)) ++errors;
        } else {
            std::atomic<std::uint64_t> block_errors{0};
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (std::uint32_t w = 0; w < workers; ++w) {
                pool.emplace_back([&, w]() {
                    std::optional<SpDecoder> local;
                    if (soft) local.emplace(*std::get<SpaDecoder>(decoder).matrix);
                    std::uint64_t mine = 0;
                    for (std::uint64_t f = frames + w; f < end; f += workers)
                        if (sim.frame_failed(master_seed, f, local ? &*local : nullptr)) ++mine;
                    block_errors += mine;
                });
            }
            for (auto& t : pool) t.join();
            errors += block_errors.load();
        }
        frames = end;
        if (errors >= stop.min_frame_errors) {
            est.reason = StopReason::min_errors_reached;
            break;
        }
        if (frames >= stop.max_frames) {
            est.reason = StopReason::frame_cap;
            break;
        }
    }
    est.frames = frames;
    est.errors = errors;
    est.fer = frames ? static_cast<double>(errors) / static_cast<double>(frames) : 0.0;
    WilsonInterval ci = wilson_interval(errors, frames);
    est.ci_lo = ci.lo;
    est.ci_hi = ci.hi;
    return est;
}

// Frame error rate of recorded error vectors: every stored frame is applied
// to the all-zero codeword and decoded. The whole selection is consumed.
inline FerEstimate replay_fer(const ErrorDataset& ds, PageKind kind, std::uint64_t pe,
                              std::uint64_t n, const Decoder& decoder) {
    if (n != decoder_frame_length(decoder))
        throw std::invalid_argument("replay_fer: frame length does not match the decoder");
    FerEstimate est;
    est.workers = 1;
    est.model = "replay";
    est.code = code_label(decoder);
    if (const auto* bd = std::get_if<BdDecoder>(&decoder)) {
        FrameCounts fc = frame_error_counts(ds, kind, pe, n);
        est.frames = fc.k.size();
        for (auto k : fc.k)
            if (!bd_decode_success(bd->code, k)) ++est.errors;
    } else {
        const auto& spec = std::get<SpaDecoder>(decoder);
        auto frames = frame_error_positions(ds, kind, pe, n);
        SpDecoder spa(*spec.matrix);
        est.frames = frames.size();
        BitVec received(n);
        for (const auto& positions : frames) {
            std::fill(received.begin(), received.end(), 0);
            for (auto pos : positions) received[pos] = 1;
            SpResult r = spa.decode(received_llrs(received, spec.llr), spec.max_iter,
                                    spec.early_term);
            if (!r.parity_ok || count_ones(r.word) != 0) ++est.errors;
        }
    }
    est.reason = StopReason::data_exhausted;
    est.fer = est.frames ? static_cast<double>(est.errors) / static_cast<double>(est.frames)
                         : 0.0;
    WilsonInterval ci = wilson_interval(est.errors, est.frames);
    est.ci_lo = ci.lo;
    est.ci_hi = ci.hi;
    return est;
}

// ---------------------------------------------------------------------------
// FER curves over program/erase cycling.
// ---------------------------------------------------------------------------

struct CurveSpec {
    std::uint64_t pe = 0;
    PageChannel channel;
};

struct CurvePoint {
    std::uint64_t pe = 0;
    std::string model;
    std::string code;
    std::string page;
    FerEstimate est;
};

using FerCurve = std::vector<CurvePoint>;

inline FerCurve fer_curve(const std::vector<CurveSpec>& points, const Decoder& decoder,
                          const StopRule& stop, std::uint64_t master_seed,
                          std::uint32_t workers = 1, const std::string& code_label = "",
                          const std::string& page_label = "") {
    for (std::size_t i = 1; i < points.size(); ++i)
        if (points[i].pe <= points[i - 1].pe)
            throw std::invalid_argument("fer_curve: pe cycles must be strictly increasing");
    FerCurve curve;
    curve.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        CurvePoint cp;
        cp.pe = points[i].pe;
        cp.model = model_family(points[i].channel);
        cp.code = code_label.empty() ? flashchan::code_label(decoder) : code_label;
        cp.page = page_label;
        cp.est = estimate_fer(points[i].channel, decoder, stop,
                              mix_seed({master_seed, points[i].pe}), workers);
        curve.push_back(std::move(cp));
    }
    return curve;
}

inline void write_fer_csv(const FerCurve& curve, std::ostream& out) {
    out << "pe,model,code,page,frames,errors,fer,ci_lo,ci_hi,reason\n";
    for (const auto& p : curve) {
        out << p.pe << ',' << p.model << ',' << p.code << ',' << p.page << ',' << p.est.frames
            << ',' << p.est.errors << ',' << p.est.fer << ',' << p.est.ci_lo << ','
            << p.est.ci_hi << ',' << to_string(p.est.reason) << '\n';
    }
}

}  // namespace flashchan
