#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "support/oracles.hpp"
#include "wbplab/errors.hpp"
#include "wbplab/gf2codes.hpp"
#include "wbplab/rng.hpp"

using namespace wbplab;

TEST_CASE("gf2_rank basics") {
    CHECK(gf2_rank(BitMatrix::identity(4)) == 4);
    BitMatrix zero(3, 5);
    CHECK(gf2_rank(zero) == 0);
    BitMatrix dup(2, 4);
    for (std::size_t c : {0u, 2u}) {
        dup.set(0, c, true);
        dup.set(1, c, true);
    }
    CHECK(gf2_rank(dup) == 1);
}

TEST_CASE("rm generator dimensions and rank") {
    const BitMatrix g25 = rm_generator(2, 5);
    CHECK(g25.rows() == 16);
    CHECK(g25.cols() == 32);
    CHECK(gf2_rank(g25) == 16);

    const BitMatrix g33 = rm_generator(3, 3);
    CHECK(g33.rows() == 8);
    CHECK(g33.cols() == 8);
    CHECK(gf2_rank(g33) == 8);

    CHECK_THROWS_AS(rm_generator(4, 3), ParamError);
    CHECK_THROWS_AS(rm_generator(2, 11), ParamError);
}

TEST_CASE("rm(1,3) row space has minimum weight 4") {
    const Code code = code_from_generator(rm_generator(1, 3));
    CHECK(code.k == 4);
    CHECK(code.n == 8);
    CHECK(oracle::min_codeword_weight(code) == 4);
}

TEST_CASE("rm generator row spaces are nested in the order r") {
    const BitMatrix lo = rm_generator(1, 4);
    const BitMatrix hi = rm_generator(2, 4);
    // rows of RM(1,4) are a prefix of RM(2,4) by construction
    for (std::size_t r = 0; r < lo.rows(); ++r)
        for (std::size_t c = 0; c < lo.cols(); ++c)
            CHECK(lo.get(r, c) == hi.get(r, c));
    // and stacking adds no rank
    BitMatrix stacked(lo.rows() + hi.rows(), 16);
    for (std::size_t r = 0; r < hi.rows(); ++r)
        for (std::size_t c = 0; c < 16; ++c) stacked.set(r, c, hi.get(r, c));
    for (std::size_t r = 0; r < lo.rows(); ++r)
        for (std::size_t c = 0; c < 16; ++c)
            stacked.set(hi.rows() + r, c, lo.get(r, c));
    CHECK(gf2_rank(stacked) == gf2_rank(hi));
}

TEST_CASE("standard_pcm orthogonality and shape") {
    SUBCASE("rm(2,5)") {
        const Code code = code_from_generator(rm_generator(2, 5));
        const BitMatrix& h = code.pcm("std");
        CHECK(h.rows() == 16);
        CHECK(h.cols() == 32);
        CHECK(gf2_rank(h) == 16);
    }
    SUBCASE("(2,1) repetition") {
        BitMatrix g(1, 2);
        g.set(0, 0, true);
        g.set(0, 1, true);
        const BitMatrix h = standard_pcm(g);
        CHECK(h.rows() == 1);
        CHECK(h.get(0, 0));
        CHECK(h.get(0, 1));
    }
    SUBCASE("hamming(7,4)") {
        const Code code = oracle::hamming74();
        const BitMatrix& h = code.pcm("std");
        CHECK(h.rows() == 3);
        CHECK(h.cols() == 7);
        for (std::size_t r = 0; r < code.k; ++r) {
            const auto row = code.generator.row_bits(r);
            for (const std::uint8_t bit : gf2_mat_vec(h, row)) CHECK(bit == 0);
        }
    }
    SUBCASE("rank-deficient generator rejected") {
        BitMatrix g(2, 4);
        g.set(0, 1, true);
        g.set(1, 1, true);
        CHECK_THROWS_AS(standard_pcm(g), StructuralError);
    }
}

TEST_CASE("minimum-weight dual enumeration") {
    SUBCASE("rm(32,16) overcomplete matrix is 620 rows of weight 8") {
        const Code code = code_from_generator(rm_generator(2, 5));
        const BitMatrix oc = enumerate_min_weight_dual(code);
        CHECK(oc.rows() == 620);
        CHECK(oc.cols() == 32);
        for (std::size_t r = 0; r < oc.rows(); ++r)
            CHECK(oc.row_weight(r) == 8);
    }
    SUBCASE("(3,1) repetition dual has 3 words of weight 2") {
        BitMatrix g(1, 3);
        for (std::size_t c = 0; c < 3; ++c) g.set(0, c, true);
        const Code code = code_from_generator(g);
        const BitMatrix dual = enumerate_min_weight_dual(code);
        CHECK(dual.rows() == 3);
        for (std::size_t r = 0; r < dual.rows(); ++r)
            CHECK(dual.row_weight(r) == 2);
    }
    SUBCASE("hamming(7,4) dual is the 7-row weight-4 simplex") {
        const Code code = oracle::hamming74();
        const BitMatrix dual = enumerate_min_weight_dual(code);
        CHECK(dual.rows() == 7);
        for (std::size_t r = 0; r < dual.rows(); ++r)
            CHECK(dual.row_weight(r) == 4);
    }
    SUBCASE("rows are distinct, sorted, and dual codewords") {
        const Code code = oracle::hamming74();
        const BitMatrix dual = enumerate_min_weight_dual(code);
        const Code dual_code = code_from_pcm("h", code.generator);
        for (std::size_t r = 0; r < dual.rows(); ++r) {
            if (r > 0) CHECK(dual.row_bits(r - 1) != dual.row_bits(r));
            CHECK(is_codeword(dual_code, dual.row_bits(r)));
        }
    }
}

TEST_CASE("encode and is_codeword") {
    const Code code = oracle::hamming74();
    SUBCASE("zero message gives zero codeword") {
        const std::vector<std::uint8_t> zero(4, 0);
        const auto cw = encode(code, zero);
        CHECK(cw == std::vector<std::uint8_t>(7, 0));
        CHECK(is_codeword(code, cw));
    }
    SUBCASE("unit message selects a generator row") {
        for (std::size_t i = 0; i < code.k; ++i) {
            std::vector<std::uint8_t> msg(4, 0);
            msg[i] = 1;
            CHECK(encode(code, msg) == code.generator.row_bits(i));
        }
    }
    SUBCASE("random messages satisfy every check") {
        RngStream rng = RngStream::keyed(42, 0);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<std::uint8_t> msg(4);
            for (auto& b : msg) b = rng.next_u64() & 1;
            const auto cw = encode(code, msg);
            for (const std::uint8_t bit : gf2_mat_vec(code.pcm("std"), cw))
                CHECK(bit == 0);
        }
    }
    SUBCASE("flipping one bit leaves the code") {
        auto cw = code.generator.row_bits(1);
        CHECK(is_codeword(code, cw));
        cw[3] ^= 1;
        CHECK_FALSE(is_codeword(code, cw));
    }
    SUBCASE("length mismatch rejected") {
        const std::vector<std::uint8_t> bad(3, 0);
        CHECK_THROWS_AS(encode(code, bad), ParamError);
    }
}

TEST_CASE("alist parsing") {
    SUBCASE("small matrix") {
        // H = [[1,1,0],[0,1,1]]
        std::istringstream in("3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n1 2\n2 3\n");
        const BitMatrix h = parse_alist(in);
        CHECK(h.rows() == 2);
        CHECK(h.cols() == 3);
        std::size_t ones = 0;
        for (std::size_t r = 0; r < 2; ++r) ones += h.row_weight(r);
        CHECK(ones == 4);
        CHECK(h.get(0, 0));
        CHECK(h.get(0, 1));
        CHECK(h.get(1, 1));
        CHECK(h.get(1, 2));
    }
    SUBCASE("zero padding is skipped") {
        std::istringstream in(
            "3 2\n2 2\n1 2 1\n2 2\n1 0\n1 2\n2 0\n1 2\n2 3\n");
        const BitMatrix h = parse_alist(in);
        CHECK(h.get(0, 0));
        CHECK(h.get(1, 2));
    }
    SUBCASE("row/column list mismatch is a parse error") {
        std::istringstream in("3 2\n2 2\n1 2 1\n2 2\n1\n1 2\n2\n1 2\n1 3\n");
        CHECK_THROWS_AS(parse_alist(in), ParseError);
    }
    SUBCASE("index out of range") {
        std::istringstream in("3 2\n2 2\n1 2 1\n2 2\n5\n1 2\n2\n1 2\n2 3\n");
        CHECK_THROWS_AS(parse_alist(in), ParseError);
    }
    SUBCASE("cycle-reduced bch(63,36) file loads as 27 x 63") {
        const BitMatrix h = parse_alist_file(std::string(WBPLAB_DATA_DIR) +
                                             "/bch_63_36_cr.alist");
        CHECK(h.rows() == 27);
        CHECK(h.cols() == 63);
        CHECK(gf2_rank(h) == 27);
    }
}

TEST_CASE("alist round trip") {
    RngStream rng = RngStream::keyed(7, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t m = 1 + rng.next_below(8);
        const std::size_t n = 1 + rng.next_below(12);
        BitMatrix h(m, n);
        for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < n; ++c)
                h.set(r, c, rng.next_below(3) == 0);
        std::ostringstream out;
        write_alist(out, h);
        std::istringstream in(out.str());
        CHECK(parse_alist(in) == h);
    }
}

TEST_CASE("code built from a parity-check matrix") {
    const BitMatrix h = parse_alist_file(std::string(WBPLAB_DATA_DIR) +
                                         "/bch_63_36_cr.alist");
    const Code code = code_from_pcm("cr", h);
    CHECK(code.n == 63);
    CHECK(code.k == 36);
    CHECK(gf2_rank(code.generator) == 36);
    RngStream rng = RngStream::keyed(3, 0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::uint8_t> msg(36);
        for (auto& b : msg) b = rng.next_u64() & 1;
        CHECK(is_codeword(code, encode(code, msg)));
    }
}

TEST_CASE("matrix hash changes with content") {
    const BitMatrix a = BitMatrix::identity(4);
    BitMatrix b = a;
    CHECK(matrix_hash(a) == matrix_hash(b));
    b.set(0, 1, true);
    CHECK(matrix_hash(a) != matrix_hash(b));
}

TEST_CASE("dual enumeration feasibility guard") {
    const BitMatrix h = parse_alist_file(std::string(WBPLAB_DATA_DIR) +
                                         "/bch_63_36_cr.alist");
    const Code code = code_from_pcm("cr", h);  // n - k = 27 > 24
    CHECK_THROWS_AS(enumerate_min_weight_dual(code), FeasibilityError);
}
