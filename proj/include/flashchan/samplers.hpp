#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "flashchan/rng.hpp"

namespace flashchan {

inline double normal_sample(Rng& rng, double mean, double stddev) {
    double u1 = rng.uniform_pos();
    double u2 = rng.uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(6.283185307179586476925286766559 * u2);
}

// Marsaglia-Tsang squeeze method; alpha < 1 is boosted through alpha + 1.
inline double gamma_sample(Rng& rng, double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("gamma_sample: alpha must be > 0");
    if (alpha < 1.0) {
        double u = rng.uniform_pos();
        return gamma_sample(rng, alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    double d = alpha - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal_sample(rng, 0.0, 1.0);
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        double u = rng.uniform_pos();
        double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
}

inline double beta_sample(Rng& rng, double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("beta_sample: shape parameters must be > 0");
    double g1 = gamma_sample(rng, alpha);
    double g2 = gamma_sample(rng, beta);
    return g1 / (g1 + g2);
}

namespace detail {

inline std::uint64_t binomial_inversion(Rng& rng, std::uint64_t n, double p) {
    double q = 1.0 - p;
    double s = p / q;
    double f = std::exp(static_cast<double>(n) * std::log(q));
    double u = rng.uniform();
    double cum = f;
    std::uint64_t k = 0;
    while (u > cum && k < n) {
        ++k;
        f *= s * (static_cast<double>(n - k + 1) / static_cast<double>(k));
        cum += f;
    }
    return k;
}

// Hormann's BTRS transformed rejection; requires p <= 0.5 and n*p >= 10.
inline std::uint64_t binomial_btrs(Rng& rng, std::uint64_t n, double p) {
    double nd = static_cast<double>(n);
    double np = nd * p;
    double spq = std::sqrt(np * (1.0 - p));
    double b = 1.15 + 2.53 * spq;
    double a = -0.0873 + 0.0248 * b + 0.01 * p;
    double c = np + 0.5;
    double alpha = (2.83 + 5.1 / b) * spq;
    double vr = 0.92 - 4.2 / b;
    double urvr = 0.86 * vr;
    double lpq = std::log(p / (1.0 - p));
    double m = std::floor((nd + 1.0) * p);
    double h = std::lgamma(m + 1.0) + std::lgamma(nd - m + 1.0);
    for (;;) {
        double v = rng.uniform();
        double u;
        if (v <= urvr) {
            u = v / vr - 0.43;
            double us = 0.5 - std::fabs(u);
            return static_cast<std::uint64_t>(std::floor((2.0 * a / us + b) * u + c));
        }
        if (v >= vr) {
            u = rng.uniform() - 0.5;
        } else {
            u = v / vr - 0.93;
            u = std::copysign(0.5, u) - u;
            v = rng.uniform() * vr;
        }
        double us = 0.5 - std::fabs(u);
        double kd = std::floor((2.0 * a / us + b) * u + c);
        if (kd < 0.0 || kd > nd) continue;
        v = v * alpha / (a / (us * us) + b);
        if (std::log(v) <= h - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) +
                               (kd - m) * lpq)
            return static_cast<std::uint64_t>(kd);
    }
}

}  // namespace detail

inline std::uint64_t binomial_sample(Rng& rng, std::uint64_t n, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial_sample: p outside [0, 1]");
    if (n == 0 || p == 0.0) return 0;
    if (p == 1.0) return n;
    if (p > 0.5) return n - binomial_sample(rng, n, 1.0 - p);
    if (static_cast<double>(n) * p < 10.0) return detail::binomial_inversion(rng, n, p);
    return detail::binomial_btrs(rng, n, p);
}

namespace detail {

inline std::uint64_t poisson_inversion(Rng& rng, double lambda) {
    double f = std::exp(-lambda);
    double u = rng.uniform();
    double cum = f;
    std::uint64_t k = 0;
    while (u > cum) {
        ++k;
        f *= lambda / static_cast<double>(k);
        cum += f;
        if (k > 2000) break;
    }
    return k;
}

// Hormann's PTRS transformed rejection; requires lambda >= 10.
inline std::uint64_t poisson_ptrs(Rng& rng, double lambda) {
    double b = 0.931 + 2.53 * std::sqrt(lambda);
    double a = -0.059 + 0.02483 * b;
    double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    double vr = 0.9277 - 3.6224 / (b - 2.0);
    double llam = std::log(lambda);
    for (;;) {
        double u = rng.uniform() - 0.5;
        double v = rng.uniform();
        double us = 0.5 - std::fabs(u);
        double kd = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kd);
        if (kd < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
            kd * llam - lambda - std::lgamma(kd + 1.0))
            return static_cast<std::uint64_t>(kd);
    }
}

}  // namespace detail

inline std::uint64_t poisson_sample(Rng& rng, double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("poisson_sample: lambda must be >= 0");
    if (lambda == 0.0) return 0;
    if (lambda < 10.0) return detail::poisson_inversion(rng, lambda);
    return detail::poisson_ptrs(rng, lambda);
}

}  // namespace flashchan
