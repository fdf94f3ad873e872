#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "flashchan/errors.hpp"
#include "flashchan/ks.hpp"
#include "flashchan/rng.hpp"
#include "flashchan/samplers.hpp"

using namespace flashchan;

namespace {

struct SampleStats {
    double mean = 0.0;
    double var = 0.0;
    double m4 = 0.0;  // fourth central moment
    std::size_t n = 0;
};

SampleStats summarize(const std::vector<double>& xs) {
    SampleStats s;
    s.n = xs.size();
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(s.n);
    for (double x : xs) {
        double d = x - s.mean;
        s.var += d * d;
        s.m4 += d * d * d * d;
    }
    s.var /= static_cast<double>(s.n - 1);
    s.m4 /= static_cast<double>(s.n);
    return s;
}

// Moment self-test: sample mean within 3 standard errors of the target mean,
// sample variance within 4 standard errors (standard error estimated from the
// sample's own fourth central moment, the asymptotic variance of S^2).
void check_moments(const std::vector<double>& xs, double mean, double var) {
    SampleStats s = summarize(xs);
    double n = static_cast<double>(s.n);
    double se_mean = std::sqrt(var / n);
    CAPTURE(s.mean, mean, se_mean);
    CHECK(std::fabs(s.mean - mean) <= 3.0 * se_mean);
    double se_var = std::sqrt(std::max(s.m4 - s.var * s.var, 0.0) / n);
    CAPTURE(s.var, var, se_var);
    CHECK(std::fabs(s.var - var) <= 4.0 * se_var + 1e-12);
}

}  // namespace

TEST_CASE("seed mixing and stream separation") {
    Rng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        auto x = a.next_u64();
        CHECK(x == b.next_u64());
    }
    bool all_equal = true;
    Rng a2(42);
    for (int i = 0; i < 100; ++i) all_equal &= a2.next_u64() == c.next_u64();
    CHECK_FALSE(all_equal);

    Rng s0 = Rng::stream(7, 0), s1 = Rng::stream(7, 1);
    bool streams_differ = false;
    for (int i = 0; i < 16; ++i) streams_differ |= s0.next_u64() != s1.next_u64();
    CHECK(streams_differ);

    CHECK(mix_seed({1, 2}) != mix_seed({2, 1}));
    CHECK(mix_seed({1, 2}) == mix_seed({1, 2}));
}

TEST_CASE("uniform draws stay in range") {
    Rng rng(1);
    for (int i = 0; i < 10000; ++i) {
        double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    for (int i = 0; i < 10000; ++i) {
        auto v = rng.uniform_below(7);
        CHECK(v < 7);
    }
}

TEST_CASE("normal sampler moments") {
    Rng rng(11);
    for (auto [mu, sd] : {std::pair{0.0, 1.0}, std::pair{3.0, 2.0}}) {
        std::vector<double> xs(1000000);
        for (auto& x : xs) x = normal_sample(rng, mu, sd);
        check_moments(xs, mu, sd * sd);
    }
    CHECK(normal_sample(rng, 5.0, 0.0) == 5.0);
}

TEST_CASE("gamma sampler moments across the alpha boost boundary") {
    Rng rng(12);
    for (double alpha : {0.5, 1.7, 8.0}) {
        std::vector<double> xs(1000000);
        for (auto& x : xs) {
            x = gamma_sample(rng, alpha);
            REQUIRE(x > 0.0);
        }
        check_moments(xs, alpha, alpha);
    }
}

TEST_CASE("beta sampler moments") {
    Rng rng(13);
    auto beta_case = [&](double a, double b, std::size_t n) {
        std::vector<double> xs(n);
        for (auto& x : xs) {
            x = beta_sample(rng, a, b);
            REQUIRE(x > 0.0);
            REQUIRE(x < 1.0);
        }
        double mean = a / (a + b);
        double var = a * b / ((a + b) * (a + b) * (a + b + 1.0));
        check_moments(xs, mean, var);
    };
    beta_case(1.0, 1.0, 1000000);
    beta_case(2.0, 5.0, 1000000);
    beta_case(20.72, 4143.52, 1000000);
}

TEST_CASE("uniform beta matches uniform draws under the two-sample test") {
    Rng rng(14);
    std::vector<double> xs(1000000), us(1000000);
    for (auto& x : xs) x = beta_sample(rng, 1.0, 1.0);
    for (auto& u : us) u = rng.uniform();
    KsResult r = ks_two_sample(xs, us);
    CHECK(r.p_value > 0.01);
}

TEST_CASE("beta concentrates for huge shape parameters") {
    Rng rng(15);
    for (int i = 0; i < 1000; ++i)
        CHECK(std::fabs(beta_sample(rng, 1e9, 1e9) - 0.5) < 1e-3);
}

TEST_CASE("binomial sampler moments in both regimes") {
    Rng rng(16);
    auto binom_case = [&](std::uint64_t n, double p, std::size_t draws) {
        std::vector<double> xs(draws);
        for (auto& x : xs) {
            auto k = binomial_sample(rng, n, p);
            REQUIRE(k <= n);
            x = static_cast<double>(k);
        }
        check_moments(xs, n * p, n * p * (1.0 - p));
    };
    binom_case(100, 0.05, 1000000);   // inversion (np < 10)
    binom_case(1000, 0.3, 1000000);   // rejection
    binom_case(50, 0.9, 1000000);     // mirrored p > 1/2
    binom_case(1000000, 1e-3, 200000);  // rare events at scale
}

TEST_CASE("binomial sampler degenerate edges") {
    Rng rng(17);
    for (int i = 0; i < 100; ++i) {
        CHECK(binomial_sample(rng, 50, 0.0) == 0);
        CHECK(binomial_sample(rng, 50, 1.0) == 50);
        CHECK(binomial_sample(rng, 0, 0.3) == 0);
    }
}

TEST_CASE("poisson sampler moments in both regimes") {
    Rng rng(18);
    for (double lambda : {0.5, 3.0, 40.0}) {
        std::vector<double> xs(1000000);
        for (auto& x : xs) x = static_cast<double>(poisson_sample(rng, lambda));
        check_moments(xs, lambda, lambda);
    }
    for (int i = 0; i < 100; ++i) CHECK(poisson_sample(rng, 0.0) == 0);
}

TEST_CASE("kolmogorov survival function reference values") {
    CHECK(kolmogorov_q(0.5) == Catch::Approx(0.96394524366488).epsilon(1e-10));
    CHECK(kolmogorov_q(1.0) == Catch::Approx(0.26999967167735).epsilon(1e-10));
    CHECK(kolmogorov_q(1.5) == Catch::Approx(0.022217962616525).epsilon(1e-10));
    CHECK(kolmogorov_q(2.0) == Catch::Approx(0.0006709252557797).epsilon(1e-8));
    CHECK(kolmogorov_q(0.0) == 1.0);
    CHECK(kolmogorov_q(8.0) >= 0.0);
    CHECK(kolmogorov_q(8.0) < 1e-12);
}

TEST_CASE("ecdf is a right-continuous step function") {
    CHECK_THROWS_AS(ecdf({}), EmptySampleError);
    Ecdf f = ecdf({3.0, 1.0, 2.0, 2.0});
    CHECK(f.n == 4);
    CHECK(f(0.5) == 0.0);
    CHECK(f(1.0) == Catch::Approx(0.25));
    CHECK(f(1.5) == Catch::Approx(0.25));
    CHECK(f(2.0) == Catch::Approx(0.75));
    CHECK(f(3.0) == 1.0);
    CHECK(f(99.0) == 1.0);
    for (std::size_t i = 1; i < f.heights.size(); ++i) CHECK(f.heights[i] > f.heights[i - 1]);
}

TEST_CASE("two-sample statistic on hand-checked inputs") {
    CHECK_THROWS_AS(ks_two_sample({}, {1.0}), EmptySampleError);

    KsResult same = ks_two_sample({5, 1, 3}, {5, 1, 3});
    CHECK(same.statistic == 0.0);
    CHECK(same.p_value == 1.0);

    KsResult disjoint = ks_two_sample({1, 2, 3}, {4, 5, 6});
    CHECK(disjoint.statistic == 1.0);

    KsResult frozen = ks_two_sample({1, 2, 2, 3, 5}, {2, 4, 4, 5, 6, 7});
    CHECK(frozen.statistic == Catch::Approx(19.0 / 30.0).epsilon(1e-14));
    CHECK(frozen.p_value == Catch::Approx(0.22399236228).epsilon(1e-9));
    CHECK(frozen.n1 == 5);
    CHECK(frozen.n2 == 6);
}

TEST_CASE("two-sample test is symmetric and transform-invariant") {
    Rng rng(19);
    std::vector<double> a(400), b(300);
    for (auto& x : a) x = static_cast<double>(poisson_sample(rng, 6.0));
    for (auto& x : b) x = static_cast<double>(poisson_sample(rng, 7.0));

    KsResult ab = ks_two_sample(a, b), ba = ks_two_sample(b, a);
    CHECK(ab.statistic == ba.statistic);
    CHECK(ab.p_value == ba.p_value);

    auto cube = [](std::vector<double> v) {
        for (auto& x : v) x = x * x * x + 2.0;
        return v;
    };
    KsResult tr = ks_two_sample(cube(a), cube(b));
    CHECK(tr.statistic == ab.statistic);
}

TEST_CASE("null rejection rate stays conservative on discrete data") {
    Rng rng(20);
    int rejections = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        std::vector<std::uint32_t> a(500), b(500);
        for (auto& x : a) x = static_cast<std::uint32_t>(poisson_sample(rng, 5.0));
        for (auto& x : b) x = static_cast<std::uint32_t>(poisson_sample(rng, 5.0));
        if (ks_two_sample_counts(a, b).p_value < 0.05) ++rejections;
    }
    CHECK(rejections <= 70);
}

TEST_CASE("null p-values spread out while shifted alternatives reject") {
    Rng rng(21);
    int small_null = 0, reject_alt = 0;
    for (int t = 0; t < 200; ++t) {
        std::vector<double> a(800), b(800), c(800);
        for (auto& x : a) x = normal_sample(rng, 0.0, 1.0);
        for (auto& x : b) x = normal_sample(rng, 0.0, 1.0);
        for (auto& x : c) x = normal_sample(rng, 0.35, 1.0);
        if (ks_two_sample(a, b).p_value < 0.5) ++small_null;
        if (ks_two_sample(a, c).p_value < 0.01) ++reject_alt;
    }
    CHECK(small_null > 60);   // p-values not piled at 1 under the null
    CHECK(small_null < 140);  // nor at 0
    CHECK(reject_alt > 190);  // a 0.35 sigma shift at n=800 is nearly always seen
}
