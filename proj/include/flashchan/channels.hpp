#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "flashchan/bits.hpp"
#include "flashchan/errors.hpp"
#include "flashchan/rng.hpp"
#include "flashchan/samplers.hpp"

namespace flashchan {

// ---------------------------------------------------------------------------
// Channel parameter types.
//
// All per-page models describe one read of one page as N independent bit
// positions written with uniform random data. p is the 0->1 crossover
// probability, q the 1->0 one. K^(0) and K^(1) denote the per-frame counts of
// 0->1 and 1->0 errors; K = K^(0) + K^(1).
// ---------------------------------------------------------------------------

struct BacParams {
    double p = 0.0;
    double q = 0.0;
};

inline void validate(const BacParams& c) {
    if (!(c.p >= 0.0 && c.p <= 1.0 && c.q >= 0.0 && c.q <= 1.0))
        throw std::invalid_argument("bac: p and q must lie in [0, 1]");
}

// Per-frame crossover probabilities drawn as p ~ Beta(a, b), q ~ Beta(c, d).
struct BbmParams {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
};

inline void validate(const BbmParams& m) {
    if (!(m.a > 0.0 && m.b > 0.0 && m.c > 0.0 && m.d > 0.0))
        throw std::invalid_argument("bbm: all four beta shape parameters must be > 0");
}

// Per-frame error counts drawn as rounded normals, placed uniformly.
struct NaBacParams {
    double mean0 = 0.0;
    double var0 = 0.0;
    double mean1 = 0.0;
    double var1 = 0.0;
};

inline void validate(const NaBacParams& m) {
    if (!(m.mean0 >= 0.0 && m.mean1 >= 0.0 && m.var0 >= 0.0 && m.var1 >= 0.0))
        throw std::invalid_argument("na_bac: means and variances must be >= 0");
}

// Per-frame error counts drawn as shifted Poissons, placed uniformly.
struct PaBacParams {
    double mean0 = 0.0;
    double var0 = 0.0;
    double mean1 = 0.0;
    double var1 = 0.0;
};

inline void validate(const PaBacParams& m) {
    if (!(m.mean0 >= 0.0 && m.mean1 >= 0.0 && m.var0 >= 0.0 && m.var1 >= 0.0))
        throw std::invalid_argument("pa_bac: means and variances must be >= 0");
}

using PageChannel = std::variant<BacParams, BbmParams, NaBacParams, PaBacParams>;

inline const char* model_family(const PageChannel& ch) {
    switch (ch.index()) {
        case 0: return "bac";
        case 1: return "bbm";
        case 2: return "nabac";
        default: return "pabac";
    }
}

inline void validate(const PageChannel& ch) {
    std::visit([](const auto& m) { validate(m); }, ch);
}

struct TwoPageModel {
    PageChannel lower;
    PageChannel upper;
    std::uint32_t frame_length = 0;
    std::uint32_t pe_cycles = 0;

    const PageChannel& page(PageKind k) const { return k == PageKind::lower ? lower : upper; }
};

// Full 4-ary cell-level channel: row-stochastic transition matrix over the
// levels, rows indexed by written level.
struct Dmc4Params {
    std::array<std::array<double, 4>, 4> t{};
};

inline void validate(const Dmc4Params& m) {
    for (int i = 0; i < 4; ++i) {
        double row = 0.0;
        for (int j = 0; j < 4; ++j) {
            if (!(m.t[i][j] >= 0.0)) throw std::invalid_argument("dmc4: negative entry");
            row += m.t[i][j];
        }
        if (std::fabs(row - 1.0) > 1e-9)
            throw std::invalid_argument("dmc4: row " + std::to_string(i) + " does not sum to 1");
    }
}

// ---------------------------------------------------------------------------
// Transmission.
// ---------------------------------------------------------------------------

inline BitVec bac_transmit(const BitVec& x, const BacParams& c, Rng& rng) {
    validate(c);
    BitVec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        double flip = x[i] ? c.q : c.p;
        std::uint8_t e = rng.uniform() < flip ? 1 : 0;
        y[i] = x[i] ^ e;
    }
    return y;
}

inline BacParams bbm_draw(const BbmParams& m, Rng& rng) {
    validate(m);
    return BacParams{beta_sample(rng, m.a, m.b), beta_sample(rng, m.c, m.d)};
}

inline BitVec bbm_transmit(const BitVec& x, const BbmParams& m, Rng& rng) {
    return bac_transmit(x, bbm_draw(m, rng), rng);
}

namespace detail {

// Flip `g` distinct positions of `y`, chosen uniformly among `candidates`.
// Partial Fisher-Yates over the candidate list.
inline void flip_random_subset(BitVec& y, std::vector<std::uint32_t>& candidates,
                               std::uint64_t g, Rng& rng) {
    for (std::uint64_t i = 0; i < g; ++i) {
        std::uint64_t j = i + rng.uniform_below(candidates.size() - i);
        std::swap(candidates[i], candidates[j]);
        y[candidates[i]] ^= 1;
    }
}

inline std::uint64_t clamp_count(double g, std::uint64_t hi) {
    if (!(g > 0.0)) return 0;
    double r = std::nearbyint(g);
    if (r <= 0.0) return 0;
    if (r >= static_cast<double>(hi)) return hi;
    return static_cast<std::uint64_t>(r);
}

inline std::uint64_t na_count(double mean, double var, std::uint64_t hi, Rng& rng) {
    return clamp_count(normal_sample(rng, mean, std::sqrt(var)), hi);
}

inline std::uint64_t pa_count(double mean, double var, std::uint64_t hi, Rng& rng) {
    double shift = var - mean;
    double g = static_cast<double>(poisson_sample(rng, var)) - shift;
    return clamp_count(g, hi);
}

template <typename Count0, typename Count1>
BitVec count_place_transmit(const BitVec& x, Count0&& draw0, Count1&& draw1, Rng& rng) {
    std::vector<std::uint32_t> zeros, ones;
    zeros.reserve(x.size());
    ones.reserve(x.size());
    for (std::uint32_t i = 0; i < x.size(); ++i) (x[i] ? ones : zeros).push_back(i);
    BitVec y = x;
    std::uint64_t g0 = draw0(zeros.size(), rng);
    std::uint64_t g1 = draw1(ones.size(), rng);
    flip_random_subset(y, zeros, g0, rng);
    flip_random_subset(y, ones, g1, rng);
    return y;
}

}  // namespace detail

inline BitVec na_bac_transmit(const BitVec& x, const NaBacParams& m, Rng& rng) {
    validate(m);
    return detail::count_place_transmit(
        x,
        [&m](std::uint64_t hi, Rng& r) { return detail::na_count(m.mean0, m.var0, hi, r); },
        [&m](std::uint64_t hi, Rng& r) { return detail::na_count(m.mean1, m.var1, hi, r); },
        rng);
}

inline BitVec pa_bac_transmit(const BitVec& x, const PaBacParams& m, Rng& rng) {
    validate(m);
    return detail::count_place_transmit(
        x,
        [&m](std::uint64_t hi, Rng& r) { return detail::pa_count(m.mean0, m.var0, hi, r); },
        [&m](std::uint64_t hi, Rng& r) { return detail::pa_count(m.mean1, m.var1, hi, r); },
        rng);
}

inline BitVec transmit_one(const BitVec& x, const BacParams& m, Rng& rng) {
    return bac_transmit(x, m, rng);
}
inline BitVec transmit_one(const BitVec& x, const BbmParams& m, Rng& rng) {
    return bbm_transmit(x, m, rng);
}
inline BitVec transmit_one(const BitVec& x, const NaBacParams& m, Rng& rng) {
    return na_bac_transmit(x, m, rng);
}
inline BitVec transmit_one(const BitVec& x, const PaBacParams& m, Rng& rng) {
    return pa_bac_transmit(x, m, rng);
}

inline BitVec transmit(const BitVec& x, const PageChannel& ch, Rng& rng) {
    return std::visit([&](const auto& m) { return transmit_one(x, m, rng); }, ch);
}

inline std::vector<std::uint8_t> dmc4_transmit(const std::vector<std::uint8_t>& levels,
                                               const Dmc4Params& m, Rng& rng) {
    validate(m);
    std::vector<std::uint8_t> out(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (levels[i] > 3) throw std::invalid_argument("dmc4_transmit: level outside 0..3");
        const auto& row = m.t[levels[i]];
        double u = rng.uniform();
        double cum = 0.0;
        std::uint8_t j = 3;
        for (std::uint8_t cand = 0; cand < 4; ++cand) {
            cum += row[cand];
            if (u < cum) {
                j = cand;
                break;
            }
        }
        out[i] = j;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Per-frame error-count sampling.
//
// Distributionally identical to transmitting one uniform random frame of
// length n and counting the 0->1 and 1->0 errors, but without materializing
// the frame. Used by count-only consumers (threshold decoding, statistic
// sampling), where it makes 10^8-frame runs practical.
// ---------------------------------------------------------------------------

struct DirCounts {
    std::uint64_t k0 = 0;
    std::uint64_t k1 = 0;
    std::uint64_t k() const { return k0 + k1; }
};

inline DirCounts draw_error_counts(const BacParams& c, std::uint64_t n, Rng& rng) {
    std::uint64_t m = binomial_sample(rng, n, 0.5);
    return DirCounts{binomial_sample(rng, m, c.p), binomial_sample(rng, n - m, c.q)};
}

inline DirCounts draw_error_counts(const BbmParams& m, std::uint64_t n, Rng& rng) {
    return draw_error_counts(bbm_draw(m, rng), n, rng);
}

inline DirCounts draw_error_counts(const NaBacParams& m, std::uint64_t n, Rng& rng) {
    std::uint64_t z = binomial_sample(rng, n, 0.5);
    return DirCounts{detail::na_count(m.mean0, m.var0, z, rng),
                     detail::na_count(m.mean1, m.var1, n - z, rng)};
}

inline DirCounts draw_error_counts(const PaBacParams& m, std::uint64_t n, Rng& rng) {
    std::uint64_t z = binomial_sample(rng, n, 0.5);
    return DirCounts{detail::pa_count(m.mean0, m.var0, z, rng),
                     detail::pa_count(m.mean1, m.var1, n - z, rng)};
}

inline DirCounts draw_error_counts(const PageChannel& ch, std::uint64_t n, Rng& rng) {
    return std::visit([&](const auto& m) { return draw_error_counts(m, n, rng); }, ch);
}

// ---------------------------------------------------------------------------
// Moments.
// ---------------------------------------------------------------------------

struct ChannelMoments {
    double mean = 0.0;
    double variance = 0.0;
};

inline ChannelMoments bac_moments(const BacParams& c, std::uint64_t n) {
    validate(c);
    double nd = static_cast<double>(n);
    double pq = c.p + c.q;
    ChannelMoments m;
    m.mean = 0.5 * nd * pq;
    m.variance = 0.5 * nd * (pq - c.p * c.q - 0.5 * (c.p * c.p + c.q * c.q));
    return m;
}

inline ChannelMoments bbm_moments(const BbmParams& m, std::uint64_t n) {
    validate(m);
    double nd = static_cast<double>(n);
    double ab = m.a + m.b, cd = m.c + m.d;
    double t0 = (m.a * ab * (m.a + 2.0 * m.b + 1.0) + nd * m.a * m.b) / (ab * ab * (ab + 1.0));
    double t1 = (m.c * cd * (m.c + 2.0 * m.d + 1.0) + nd * m.c * m.d) / (cd * cd * (cd + 1.0));
    double cross = 2.0 * m.a * m.c / (ab * cd);
    ChannelMoments out;
    out.mean = 0.5 * nd * (m.a / ab + m.c / cd);
    out.variance = 0.25 * nd * (t0 + t1 - cross);
    return out;
}

// Raw first and second moments of the directional counts: mu1 = E[K^(0)],
// mu2 = E[(K^(0))^2], mu3 = E[K^(1)], mu4 = E[(K^(1))^2].
struct SplitMoments {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double mu3 = 0.0;
    double mu4 = 0.0;
};

inline SplitMoments bbm_split_moments(const BbmParams& m, std::uint64_t n) {
    validate(m);
    double nd = static_cast<double>(n);
    double ab = m.a + m.b, cd = m.c + m.d;
    SplitMoments s;
    s.mu1 = 0.5 * nd * m.a / ab;
    s.mu2 = 0.25 * nd * (m.a * (m.a + 2.0 * m.b + 1.0) + nd * m.a * (m.a + 1.0)) /
            (ab * (ab + 1.0));
    s.mu3 = 0.5 * nd * m.c / cd;
    s.mu4 = 0.25 * nd * (m.c * (m.c + 2.0 * m.d + 1.0) + nd * m.c * (m.c + 1.0)) /
            (cd * (cd + 1.0));
    return s;
}

// ---------------------------------------------------------------------------
// Exact distribution of K.
// ---------------------------------------------------------------------------

inline double lchoose(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// Beta-binomial pmf: P(X = k) for X | r ~ Binomial(m, r), r ~ Beta(alpha, beta).
inline double beta_binomial_pmf(std::uint64_t k, std::uint64_t m, double alpha, double beta) {
    if (k > m) return 0.0;
    if (!(alpha > 0.0 && beta > 0.0))
        throw std::invalid_argument("beta_binomial_pmf: shapes must be > 0");
    double kd = static_cast<double>(k), md = static_cast<double>(m);
    double lb_num = std::lgamma(alpha + kd) + std::lgamma(beta + md - kd) -
                    std::lgamma(alpha + beta + md);
    double lb_den = std::lgamma(alpha) + std::lgamma(beta) - std::lgamma(alpha + beta);
    return std::exp(lchoose(md, kd) + lb_num - lb_den);
}

namespace detail {

// Binomial(n, s) pmf for all k, multiplicative recurrence from k = 0. Falls
// back to per-k log evaluation when the k = 0 term underflows.
inline void binomial_pmf_row(std::uint64_t n, double s, std::vector<double>& out) {
    double nd = static_cast<double>(n);
    out.assign(n + 1, 0.0);
    if (s <= 0.0) {
        out[0] = 1.0;
        return;
    }
    if (s >= 1.0) {
        out[n] = 1.0;
        return;
    }
    double l0 = nd * std::log1p(-s);
    if (l0 > -700.0) {
        double ratio = s / (1.0 - s);
        double f = std::exp(l0);
        out[0] = f;
        for (std::uint64_t k = 0; k < n; ++k) {
            f *= ratio * (static_cast<double>(n - k) / static_cast<double>(k + 1));
            out[k + 1] = f;
        }
        return;
    }
    double ls = std::log(s), l1s = std::log1p(-s);
    for (std::uint64_t k = 0; k <= n; ++k) {
        double kd = static_cast<double>(k);
        double lp = lchoose(nd, kd) + kd * ls + (nd - kd) * l1s;
        out[k] = lp > -745.0 ? std::exp(lp) : 0.0;
    }
}

// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration.
inline void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
    x.assign(m, 0.0);
    w.assign(m, 0.0);
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double z = std::cos(3.14159265358979323846 * (i + 0.75) / (m + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < m; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = m * (z * p0 - p1) / (z * z - 1.0);
            double z1 = z;
            z = z1 - p0 / pp;
            if (std::fabs(z - z1) < 1e-15) break;
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[m - 1 - i] = w[i];
    }
}

// Nodes p_i and normalized weights u_i approximating E[f(P)] for
// P ~ Beta(alpha, beta) as sum_i u_i f(p_i). Composite Gauss-Legendre in
// logit space, where the density has no endpoint singularity for any
// positive shapes.
inline void beta_quad_nodes(double alpha, double beta, std::vector<double>& p,
                            std::vector<double>& u) {
    double t0 = std::log(alpha / beta);
    double sd = std::sqrt(1.0 / alpha + 1.0 / beta);
    double w = 40.0;
    double reach = std::max(30.0 / std::min(alpha, beta), 1e-8);
    w = std::max(w, reach / sd);
    w = std::min(w, 2000.0);
    int segs = std::clamp(static_cast<int>(std::ceil(2.0 * w / 3.0)), 16, 64);
    const int per_seg = 16;
    std::vector<double> gx, gw;
    gauss_legendre(per_seg, gx, gw);
    p.clear();
    u.clear();
    double lo = t0 - w * sd, hi = t0 + w * sd;
    double seg_w = (hi - lo) / segs;
    double lpeak = alpha * t0 - (alpha + beta) * std::log1p(std::exp(t0));
    if (t0 > 30.0) lpeak = alpha * t0 - (alpha + beta) * t0;
    double total = 0.0;
    for (int s = 0; s < segs; ++s) {
        double a0 = lo + s * seg_w;
        for (int i = 0; i < per_seg; ++i) {
            double t = a0 + 0.5 * seg_w * (gx[i] + 1.0);
            double ld;
            if (t > 30.0)
                ld = alpha * t - (alpha + beta) * t - lpeak;
            else
                ld = alpha * t - (alpha + beta) * std::log1p(std::exp(t)) - lpeak;
            double weight = gw[i] * 0.5 * seg_w * std::exp(ld);
            if (weight <= 0.0) continue;
            p.push_back(1.0 / (1.0 + std::exp(-t)));
            u.push_back(weight);
            total += weight;
        }
    }
    for (auto& v : u) v /= total;
}

}  // namespace detail

// Distribution of K = K^(0) + K^(1) for one frame of n uniform random bits.
// Under fixed crossover probabilities every position errs independently with
// probability (p + q) / 2, so K is exactly Binomial(n, (p + q) / 2).
inline std::vector<double> k_pmf_exact(const BacParams& c, std::uint64_t n) {
    validate(c);
    std::vector<double> pmf;
    detail::binomial_pmf_row(n, 0.5 * (c.p + c.q), pmf);
    return pmf;
}

// For the beta-binomial model the binomial law is integrated over the two
// independent beta priors by tensor quadrature.
inline std::vector<double> k_pmf_exact(const BbmParams& m, std::uint64_t n) {
    validate(m);
    if (n > 4096) throw std::invalid_argument("k_pmf_exact(bbm): n too large for quadrature");
    std::vector<double> pn, pu, qn, qu;
    detail::beta_quad_nodes(m.a, m.b, pn, pu);
    detail::beta_quad_nodes(m.c, m.d, qn, qu);
    std::vector<double> pmf(n + 1, 0.0), row;
    for (std::size_t i = 0; i < pn.size(); ++i) {
        for (std::size_t j = 0; j < qn.size(); ++j) {
            double wij = pu[i] * qu[j];
            if (wij < 1e-18) continue;
            detail::binomial_pmf_row(n, 0.5 * (pn[i] + qn[j]), row);
            for (std::uint64_t k = 0; k <= n; ++k) pmf[k] += wij * row[k];
        }
    }
    return pmf;
}

inline std::vector<double> k_pmf_exact(const PageChannel& ch, std::uint64_t n) {
    if (const auto* bac = std::get_if<BacParams>(&ch)) return k_pmf_exact(*bac, n);
    if (const auto* bbm = std::get_if<BbmParams>(&ch)) return k_pmf_exact(*bbm, n);
    throw std::invalid_argument("k_pmf_exact: closed form available for bac and bbm only");
}

// P(K > t) for a count-threshold decoder.
// Sums the upper tail directly; subtracting the head from 1 would cancel
// away the precision of deep tails.
inline double k_tail_gt(const std::vector<double>& pmf, std::uint64_t t) {
    double tail = 0.0;
    for (std::uint64_t k = pmf.size(); k-- > 0 && k > t;) tail += pmf[k];
    return tail;
}

// ---------------------------------------------------------------------------
// Fitting from empirical moments.
// ---------------------------------------------------------------------------

// Raw directional moments plus sample statistics of K for one (page, cycle
// count) selection of frames.
struct MomentEstimates {
    double mu1 = 0.0;  // mean of K^(0)
    double mu2 = 0.0;  // mean of (K^(0))^2
    double mu3 = 0.0;  // mean of K^(1)
    double mu4 = 0.0;  // mean of (K^(1))^2
    double mean_k = 0.0;
    double var_k = 0.0;  // unbiased
    std::uint64_t n_frames = 0;
    std::uint64_t frame_length = 0;
};

inline BacParams fit_bac(const MomentEstimates& m) {
    if (m.n_frames == 0 || m.frame_length == 0)
        throw EmptySampleError("fit_bac: no frames in moment estimates");
    double nd = static_cast<double>(m.frame_length);
    BacParams c{2.0 * m.mu1 / nd, 2.0 * m.mu3 / nd};
    if (!(c.p <= 1.0 && c.q <= 1.0))
        throw std::invalid_argument("fit_bac: moment estimates exceed feasible error rates");
    return c;
}

namespace detail {

inline std::pair<double, double> invert_beta_pair(double mu1, double mu2, double nd,
                                                  const char* which) {
    double den = nd * (mu2 - mu1) - mu1 * mu1 * (nd - 1.0);
    double num = mu1 * mu1 * (nd + 1.0) - 2.0 * mu1 * mu2;
    std::string dir(which);
    if (mu1 <= 0.0)
        throw EmptySampleError("fit_bbm: zero mean error count for " + dir + " direction");
    if (den <= 0.0)
        throw UnderdispersedDataError("fit_bbm: " + dir +
                                      " direction at or below binomial dispersion");
    double a = num / den;
    double b = a * (nd / (2.0 * mu1) - 1.0);
    if (!(a > 0.0) || !(b > 0.0))
        throw UnderdispersedDataError("fit_bbm: non-positive beta shape for " + dir +
                                      " direction");
    return {a, b};
}

}  // namespace detail

inline BbmParams fit_bbm(const MomentEstimates& m) {
    if (m.n_frames == 0 || m.frame_length == 0)
        throw EmptySampleError("fit_bbm: no frames in moment estimates");
    double nd = static_cast<double>(m.frame_length);
    auto [a, b] = detail::invert_beta_pair(m.mu1, m.mu2, nd, "0->1");
    auto [c, d] = detail::invert_beta_pair(m.mu3, m.mu4, nd, "1->0");
    return BbmParams{a, b, c, d};
}

namespace detail {

inline std::pair<double, double> dir_mean_var(double mu_a, double mu_sq,
                                              std::uint64_t n_frames) {
    double nf = static_cast<double>(n_frames);
    double var = (mu_sq - mu_a * mu_a) * nf / (nf - 1.0);
    return {mu_a, std::max(var, 0.0)};
}

}  // namespace detail

inline NaBacParams fit_na_bac(const MomentEstimates& m) {
    if (m.n_frames < 2) throw EmptySampleError("fit_na_bac: need at least 2 frames");
    auto [m0, v0] = detail::dir_mean_var(m.mu1, m.mu2, m.n_frames);
    auto [m1, v1] = detail::dir_mean_var(m.mu3, m.mu4, m.n_frames);
    return NaBacParams{m0, v0, m1, v1};
}

inline PaBacParams fit_pa_bac(const MomentEstimates& m) {
    if (m.n_frames < 2) throw EmptySampleError("fit_pa_bac: need at least 2 frames");
    auto [m0, v0] = detail::dir_mean_var(m.mu1, m.mu2, m.n_frames);
    auto [m1, v1] = detail::dir_mean_var(m.mu3, m.mu4, m.n_frames);
    if (v0 < m0 || v1 < m1)
        throw UnderdispersedDataError(
            "fit_pa_bac: directional variance below mean, shifted Poisson infeasible");
    return PaBacParams{m0, v0, m1, v1};
}

}  // namespace flashchan
