#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "flashchan/errors.hpp"

namespace flashchan {

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n1 = 0;
    std::size_t n2 = 0;
};

// Empirical CDF as a right-continuous step function over the distinct sample
// values.
struct Ecdf {
    std::vector<double> values;   // distinct, sorted
    std::vector<double> heights;  // cumulative fraction at each value
    std::size_t n = 0;

    double operator()(double t) const {
        auto it = std::upper_bound(values.begin(), values.end(), t);
        if (it == values.begin()) return 0.0;
        return heights[static_cast<std::size_t>(it - values.begin()) - 1];
    }
};

inline Ecdf ecdf(std::vector<double> samples) {
    if (samples.empty()) throw EmptySampleError("ecdf: empty sample");
    std::sort(samples.begin(), samples.end());
    Ecdf f;
    f.n = samples.size();
    for (std::size_t i = 0; i < samples.size();) {
        std::size_t j = i;
        while (j < samples.size() && samples[j] == samples[i]) ++j;
        f.values.push_back(samples[i]);
        f.heights.push_back(static_cast<double>(j) / static_cast<double>(f.n));
        i = j;
    }
    return f;
}

// Survival function of the Kolmogorov distribution,
// Q(x) = 2 * sum_{j>=1} (-1)^(j-1) * exp(-2 j^2 x^2).
inline double kolmogorov_q(double x) {
    if (x <= 1e-3) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        double term = std::exp(-2.0 * static_cast<double>(j) * static_cast<double>(j) * x * x);
        sum += sign * term;
        if (term < 1e-10) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

// Two-sample Kolmogorov-Smirnov test. The statistic is the exact supremum of
// |F1 - F2| over the merged sample support, so tied and discrete samples are
// handled without approximation. The p-value uses the asymptotic Kolmogorov
// distribution with effective size n1*n2/(n1+n2); for discrete data it is
// conservative.
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw EmptySampleError("ks_two_sample: both samples must be non-empty");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const std::size_t n1 = a.size(), n2 = b.size();
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < n1 && j < n2) {
        double v = std::min(a[i], b[j]);
        while (i < n1 && a[i] == v) ++i;
        while (j < n2 && b[j] == v) ++j;
        double f1 = static_cast<double>(i) / static_cast<double>(n1);
        double f2 = static_cast<double>(j) / static_cast<double>(n2);
        d = std::max(d, std::fabs(f1 - f2));
    }
    // Once one sample is exhausted the gap only shrinks toward the common
    // endpoint, so the remaining values cannot raise the supremum.
    double ne = static_cast<double>(n1) * static_cast<double>(n2) /
                static_cast<double>(n1 + n2);
    KsResult r;
    r.statistic = d;
    r.p_value = kolmogorov_q(std::sqrt(ne) * d);
    r.n1 = n1;
    r.n2 = n2;
    return r;
}

inline KsResult ks_two_sample_counts(const std::vector<std::uint32_t>& a,
                                     const std::vector<std::uint32_t>& b) {
    std::vector<double> da(a.begin(), a.end());
    std::vector<double> db(b.begin(), b.end());
    return ks_two_sample(std::move(da), std::move(db));
}

}  // namespace flashchan
