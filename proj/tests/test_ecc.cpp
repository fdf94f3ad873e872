#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "flashchan/bits.hpp"
#include "flashchan/channels.hpp"
#include "flashchan/ecc/bounded_distance.hpp"
#include "flashchan/ecc/parity_check.hpp"
#include "flashchan/ecc/qc_ldpc.hpp"
#include "flashchan/ecc/sum_product.hpp"
#include "flashchan/rng.hpp"
#include "oracles.hpp"

using namespace flashchan;

namespace {

// Basis of the null space of H over GF(2) for codes up to 64 bits, built by
// row reduction with bit-mask rows. Used to draw random codewords.
std::vector<std::uint64_t> codeword_basis(const ParityCheckMatrix& h) {
    REQUIRE(h.n_bits <= 64);
    std::vector<std::uint64_t> rows(h.n_checks, 0);
    for (std::uint32_t c = 0; c < h.n_checks; ++c)
        for (std::uint32_t b : h.check_bits[c]) rows[c] ^= 1ull << b;

    std::vector<std::uint64_t> reduced;
    std::vector<unsigned> pivots;
    for (auto r : rows) {
        for (std::size_t i = 0; i < reduced.size(); ++i)
            if (r >> pivots[i] & 1ull) r ^= reduced[i];
        if (!r) continue;
        unsigned p = static_cast<unsigned>(std::countr_zero(r));
        for (std::size_t i = 0; i < reduced.size(); ++i)
            if (reduced[i] >> p & 1ull) reduced[i] ^= r;
        reduced.push_back(r);
        pivots.push_back(p);
    }

    std::uint64_t pivot_mask = 0;
    for (unsigned p : pivots) pivot_mask |= 1ull << p;
    std::vector<std::uint64_t> basis;
    for (unsigned j = 0; j < h.n_bits; ++j) {
        if (pivot_mask >> j & 1ull) continue;
        std::uint64_t v = 1ull << j;
        for (std::size_t i = 0; i < reduced.size(); ++i)
            if (reduced[i] >> j & 1ull) v |= 1ull << pivots[i];
        basis.push_back(v);
    }
    // Every basis vector must actually satisfy all checks.
    for (auto v : basis)
        for (auto r : rows) REQUIRE(std::popcount(v & r) % 2 == 0);
    return basis;
}

BitVec to_bits(std::uint64_t word, std::uint32_t n) {
    BitVec v(n);
    for (std::uint32_t i = 0; i < n; ++i) v[i] = (word >> i) & 1ull;
    return v;
}

std::uint64_t syndrome_of(const oracles::MlTable& t, std::uint64_t error_word) {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < t.col_syndrome.size(); ++i)
        if (error_word >> i & 1ull) s ^= t.col_syndrome[i];
    return s;
}

}  // namespace

TEST_CASE("parity-check matrix construction and edge counts") {
    auto h = ParityCheckMatrix::from_check_lists(3, {{0, 1}, {1, 2}});
    CHECK(h.n_bits == 3);
    CHECK(h.n_checks == 2);
    CHECK(h.n_edges() == 4);
    CHECK(h.bit_checks[1] == std::vector<std::uint32_t>{0, 1});
    CHECK_THROWS_AS(ParityCheckMatrix::from_check_lists(2, {{0, 2}}), std::invalid_argument);
}

TEST_CASE("girth detects short cycles and forests") {
    auto four_cycle = ParityCheckMatrix::from_check_lists(2, {{0, 1}, {0, 1}});
    CHECK(girth(four_cycle) == 4);

    auto tree = ParityCheckMatrix::from_check_lists(4, {{0, 1}, {1, 2}, {2, 3}});
    CHECK(girth(tree) == 0);

    // Six-cycle: three checks, three bits, each consecutive pair shared.
    auto six = ParityCheckMatrix::from_check_lists(3, {{0, 1}, {1, 2}, {2, 0}});
    CHECK(girth(six) == 6);

    // Random sparse fixtures against the edge-removal oracle.
    Rng rng(500);
    for (int t = 0; t < 40; ++t) {
        std::uint32_t n = 8 + static_cast<std::uint32_t>(rng.uniform_below(8));
        std::uint32_t m = 4 + static_cast<std::uint32_t>(rng.uniform_below(6));
        std::vector<std::vector<std::uint32_t>> rows(m);
        for (std::uint32_t c = 0; c < m; ++c)
            for (std::uint32_t b = 0; b < n; ++b)
                if (rng.uniform() < 0.25) rows[c].push_back(b);
        auto h = ParityCheckMatrix::from_check_lists(n, rows);
        CHECK(girth(h) == oracles::girth_by_edge_removal(h));
    }
}

TEST_CASE("gf2 rank and effective dimension") {
    auto identity = ParityCheckMatrix::from_check_lists(4, {{0}, {1}, {2}, {3}});
    CHECK(rank2(identity) == 4);
    CHECK(k_effective(identity) == 0);

    auto dup = ParityCheckMatrix::from_check_lists(4, {{0, 1}, {0, 1}, {2}});
    CHECK(rank2(dup) == 2);
    CHECK(k_effective(dup) == 2);

    // Sum of first two rows equals the third: one dependency.
    auto dep = ParityCheckMatrix::from_check_lists(4, {{0, 1}, {1, 2}, {0, 2}});
    CHECK(rank2(dep) == 2);
}

TEST_CASE("alist serialization round trip") {
    QcProfile profile{4, 2, 4, 16};
    QcLdpcCode code = peg_construct_qc(profile, 0);
    ParityCheckMatrix h = expand(code);

    std::ostringstream out;
    write_alist(h, out);
    std::istringstream in(out.str());
    ParityCheckMatrix back = read_alist(in);

    REQUIRE(back.n_bits == h.n_bits);
    REQUIRE(back.n_checks == h.n_checks);
    for (std::uint32_t c = 0; c < h.n_checks; ++c) {
        auto a = h.check_bits[c];
        auto b = back.check_bits[c];
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
    }
}

TEST_CASE("circulant expansion places shifted identities") {
    QcLdpcCode code;
    code.z = 3;
    code.shifts = {{1, -1}, {0, 2}};
    ParityCheckMatrix h = expand(code);
    CHECK(h.n_bits == 6);
    CHECK(h.n_checks == 6);
    // Block (0,0) shift 1: bit u of column block 0 joins check (u+1) mod 3.
    CHECK(h.bit_checks[0] == std::vector<std::uint32_t>{1, 3});
    CHECK(h.bit_checks[1] == std::vector<std::uint32_t>{2, 4});
    CHECK(h.bit_checks[2] == std::vector<std::uint32_t>{0, 5});
    // Block (1,1) shift 2: bit u of column block 1 joins check 3 + (u+2) mod 3.
    CHECK(h.bit_checks[3] == std::vector<std::uint32_t>{5});
    CHECK(h.bit_checks[4] == std::vector<std::uint32_t>{3});
    CHECK(h.bit_checks[5] == std::vector<std::uint32_t>{4});
}

TEST_CASE("qc profile validation") {
    CHECK_THROWS_AS(validate(QcProfile{0, 2, 4, 16}), std::invalid_argument);
    CHECK_THROWS_AS(validate(QcProfile{4, 2, 4, 18}), std::invalid_argument);   // z | n
    CHECK_THROWS_AS(validate(QcProfile{4, 2, 3, 16}), std::invalid_argument);   // dc | dv*n
    CHECK_THROWS_AS(validate(QcProfile{4, 4, 4, 16}), std::invalid_argument);   // rate 0
    CHECK_NOTHROW(validate(QcProfile{4, 2, 4, 16}));
    CHECK(QcProfile{128, 4, 64, 8192}.design_rate() == Catch::Approx(0.9375));
}

TEST_CASE("peg construction on a tiny profile") {
    QcProfile profile{4, 2, 4, 16};
    QcLdpcCode code = peg_construct_qc(profile, 0);
    REQUIRE(code.z == 4);
    REQUIRE(code.block_cols() == 4);

    ParityCheckMatrix h = expand(code);
    for (std::uint32_t b = 0; b < h.n_bits; ++b) CHECK(h.bit_checks[b].size() == 2);
    std::uint32_t g = girth(h);
    CHECK(g >= 6);
    CHECK(g == oracles::girth_by_edge_removal(h));

    QcLdpcCode again = peg_construct_qc(profile, 0);
    CHECK(again.shifts == code.shifts);
}

TEST_CASE("peg construction at a mid-size profile agrees with the girth oracle") {
    QcProfile profile{5, 3, 5, 25};
    QcLdpcCode code = peg_construct_qc(profile, 0);
    ParityCheckMatrix h = expand(code);
    for (std::uint32_t b = 0; b < h.n_bits; ++b) CHECK(h.bit_checks[b].size() == 3);
    std::uint32_t g = girth(h);
    CHECK(g >= 6);
    CHECK(g == oracles::girth_by_edge_removal(h));
}

TEST_CASE("code json round trips and rejects malformed tables") {
    QcProfile profile{4, 2, 4, 16};
    QcLdpcCode code = peg_construct_qc(profile, 1);
    nlohmann::json j = flashchan::code_to_json(code);
    QcLdpcCode back = flashchan::code_from_json(j);
    CHECK(back.z == code.z);
    CHECK(back.shifts == code.shifts);

    nlohmann::json ragged = j;
    ragged["shift_table"][0].erase(0);
    CHECK_THROWS_AS(flashchan::code_from_json(ragged), FormatError);

    nlohmann::json big = j;
    big["shift_table"][0][0] = 4;  // shift must be < z
    CHECK_THROWS_AS(flashchan::code_from_json(big), FormatError);
}

TEST_CASE("channel llrs from asymmetric error rates") {
    ChannelLlr llr = channel_llr(BacParams{0.00497, 0.00284});
    CHECK(llr.llr0 == Catch::Approx(5.858968835).epsilon(1e-9));
    CHECK(llr.llr1 == Catch::Approx(-5.301491398).epsilon(1e-9));

    ChannelLlr bsc = channel_llr(BacParams{0.1, 0.1});
    CHECK(bsc.llr0 == Catch::Approx(2.197224577).epsilon(1e-9));
    CHECK(bsc.llr1 == Catch::Approx(-2.197224577).epsilon(1e-9));

    // Degenerate rates saturate instead of overflowing.
    CHECK(channel_llr(BacParams{0.0, 0.5}).llr1 == -kLlrSaturation);
    CHECK(channel_llr(BacParams{0.5, 0.0}).llr0 == kLlrSaturation);

    // The symmetric mode folds both rates into their mean crossover.
    ChannelLlr sym = channel_llr(BacParams{0.00497, 0.00284}, LlrMode::symmetric);
    double r = (0.00497 + 0.00284) / 2.0;
    CHECK(sym.llr0 == Catch::Approx(std::log((1.0 - r) / r)));
    CHECK(sym.llr1 == Catch::Approx(-sym.llr0));

    BitVec y{0, 1, 1, 0};
    auto l = received_llrs(y, llr);
    CHECK(l == std::vector<double>{llr.llr0, llr.llr1, llr.llr1, llr.llr0});
}

TEST_CASE("bounded-distance rule") {
    BoundedDistanceCode code{8191, 7683, 39};
    CHECK_NOTHROW(validate(code));
    CHECK(bd_decode_success(code, 0));
    CHECK(bd_decode_success(code, 39));
    CHECK_FALSE(bd_decode_success(code, 40));
    CHECK_THROWS_AS(validate(BoundedDistanceCode{8191, 0, 39}), std::invalid_argument);
    CHECK_THROWS_AS(validate(BoundedDistanceCode{8191, 8191, 39}), std::invalid_argument);
    CHECK_THROWS_AS(validate(BoundedDistanceCode{100, 50, 100}), std::invalid_argument);
}

TEST_CASE("sum-product decodes clean and lightly corrupted frames") {
    QcProfile profile{4, 2, 4, 16};
    ParityCheckMatrix h = expand(peg_construct_qc(profile, 0));

    SECTION("clean frame converges immediately") {
        std::vector<double> llr(h.n_bits, 20.0);
        SpResult r = sp_decode(h, llr);
        CHECK(r.parity_ok);
        CHECK(r.iterations <= 1);
        CHECK(count_ones(r.word) == 0);
    }

    SECTION("single flips match unique maximum-likelihood correction") {
        oracles::MlTable ml = oracles::build_ml_table(h);
        ChannelLlr llr = channel_llr(BacParams{1e-3, 1e-3});
        for (std::uint32_t i = 0; i < h.n_bits; ++i) {
            std::uint64_t e = 1ull << i;
            if (!oracles::ml_uniquely_corrects(ml, syndrome_of(ml, e), 1)) continue;
            SpResult r = sp_decode(h, received_llrs(to_bits(e, h.n_bits), llr));
            CAPTURE(i);
            CHECK(r.parity_ok);
            CHECK(count_ones(r.word) == 0);
        }
    }

    SECTION("iteration count respects the cap") {
        Rng rng(77);
        std::vector<double> llr(h.n_bits);
        for (auto& x : llr) x = rng.uniform() < 0.5 ? -2.0 : 2.0;
        SpResult r = sp_decode(h, llr, 7, true);
        CHECK(r.iterations <= 7);
    }
}

TEST_CASE("decoding commutes with codeword translation under symmetric llrs") {
    QcProfile profile{5, 3, 5, 25};
    ParityCheckMatrix h = expand(peg_construct_qc(profile, 0));
    auto basis = codeword_basis(h);
    REQUIRE(!basis.empty());

    ChannelLlr llr = channel_llr(BacParams{0.03, 0.03}, LlrMode::symmetric);
    Rng rng(501);
    for (int t = 0; t < 200; ++t) {
        std::uint64_t c = 0;
        for (auto v : basis)
            if (rng.uniform() < 0.5) c ^= v;
        std::uint64_t e = 0;
        for (int b = 0; b < 3; ++b)
            e |= 1ull << rng.uniform_below(h.n_bits);

        SpResult zero_side = sp_decode(h, received_llrs(to_bits(e, h.n_bits), llr));
        SpResult c_side = sp_decode(h, received_llrs(to_bits(e ^ c, h.n_bits), llr));
        CHECK(zero_side.parity_ok == c_side.parity_ok);
        BitVec shifted = c_side.word;
        for (std::uint32_t i = 0; i < h.n_bits; ++i) shifted[i] ^= (c >> i) & 1ull;
        CHECK(shifted == zero_side.word);
        CHECK(zero_side.iterations == c_side.iterations);
    }
}

TEST_CASE("early termination never changes the decoded outcome") {
    // After the syndrome is first satisfied, further iterations of loopy
    // belief propagation may walk the hard decision off that codeword, so
    // raw words can differ between the two modes. What must hold: decoding
    // success is unchanged, and frames where the fast path never stopped
    // early ran the exact same computation.
    QcProfile profile{5, 3, 5, 25};
    ParityCheckMatrix h = expand(peg_construct_qc(profile, 0));
    ChannelLlr llr = channel_llr(BacParams{0.04, 0.04});
    Rng rng(502);
    int outcome_changes = 0, iteration_diffs = 0;
    for (int f = 0; f < 10000; ++f) {
        BitVec e(h.n_bits, 0);
        for (auto& b : e) b = rng.uniform() < 0.04;
        auto llrs = received_llrs(e, llr);
        SpResult fast = sp_decode(h, llrs, 50, true);
        SpResult full = sp_decode(h, llrs, 50, false);
        bool fast_ok = fast.parity_ok && count_ones(fast.word) == 0;
        bool full_ok = full.parity_ok && count_ones(full.word) == 0;
        if (fast_ok != full_ok) ++outcome_changes;
        if (fast.iterations == 50) {
            REQUIRE(fast.word == full.word);
            REQUIRE(fast.parity_ok == full.parity_ok);
        }
        if (fast.iterations != full.iterations) ++iteration_diffs;
    }
    CHECK(outcome_changes == 0);
    CHECK(iteration_diffs > 0);  // early exit is actually exercised
}

TEST_CASE("production-scale construction decodes low-error frames") {
    QcProfile profile{128, 4, 64, 8192};
    QcLdpcCode code = peg_construct_qc(profile, 0);
    ParityCheckMatrix h = expand(code);
    REQUIRE(girth(h) >= 6);

    SpDecoder dec(h);
    BacParams chan{4.2e-4, 1.8e-4};  // mean crossover 3e-4
    ChannelLlr llr = channel_llr(chan);
    Rng rng(503);
    int failures = 0;
    const int frames = 10000;
    for (int f = 0; f < frames; ++f) {
        BitVec x(h.n_bits, 0);
        BitVec e = bac_transmit(x, chan, rng);
        SpResult r = dec.decode(received_llrs(e, llr), 50, true);
        if (!r.parity_ok || count_ones(r.word) != 0) ++failures;
    }
    CHECK(static_cast<double>(failures) / frames < 1e-3);
}
