#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wbplab/errors.hpp"
#include "wbplab/losses.hpp"
#include "wbplab/rng.hpp"

using namespace wbplab;

TEST_CASE("bit_loss values") {
    CHECK(bit_loss(LossKind::SoftBer, 0, 0.3) == doctest::Approx(0.3));
    CHECK(bit_loss(LossKind::SoftBer, 1, 0.3) == doctest::Approx(0.7));
    CHECK(bit_loss(LossKind::BinaryCrossEntropy, 0, 1e-15) ==
          doctest::Approx(0.0).epsilon(1e-9));
    CHECK(bit_loss(LossKind::NegSoftSuccess, 0, 0.25) == doctest::Approx(-0.75));
    CHECK(bit_loss(LossKind::NegSoftSuccess, 1, 0.25) == doctest::Approx(-0.25));
    // hardened probabilities give the exact bit-error indicator
    for (int a : {0, 1})
        for (double b : {0.0, 1.0})
            CHECK(bit_loss(LossKind::SoftBer, a, b) ==
                  doctest::Approx(a == static_cast<int>(b) ? 0.0 : 1.0));
}

TEST_CASE("cross-entropy clamps instead of diverging") {
    CHECK(std::isfinite(bit_loss(LossKind::BinaryCrossEntropy, 0, 1.0)));
    CHECK(std::isfinite(bit_loss(LossKind::BinaryCrossEntropy, 1, 0.0)));
    CHECK(bit_loss(LossKind::BinaryCrossEntropy, 1, 0.0) ==
          doctest::Approx(-std::log(kProbEps)));
}

TEST_CASE("soft_ber and neg_soft_success differ by one") {
    RngStream rng = RngStream::keyed(1, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const int a = static_cast<int>(rng.next_u64() & 1);
        const double b = rng.next_unit();
        CHECK(bit_loss(LossKind::SoftBer, a, b) ==
              doctest::Approx(1.0 + bit_loss(LossKind::NegSoftSuccess, a, b)));
    }
}

TEST_CASE("codeword_loss") {
    const std::vector<std::uint8_t> zero{0, 0};
    CHECK(codeword_loss(LossKind::SoftBer, zero, std::vector<double>{0.2, 0.4}) ==
          doctest::Approx(0.3));
    const std::vector<std::uint8_t> z8(8, 0);
    CHECK(codeword_loss(LossKind::BinaryCrossEntropy, z8,
                        std::vector<double>(8, 0.5)) ==
          doctest::Approx(std::log(2.0)));
    CHECK_THROWS_AS(
        codeword_loss(LossKind::SoftBer, zero, std::vector<double>{0.1}),
        ParamError);
}

TEST_CASE("codeword soft-BER on hardened outputs equals the bit error rate") {
    RngStream rng = RngStream::keyed(2, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 4 + rng.next_below(12);
        std::vector<std::uint8_t> x(n);
        std::vector<double> o(n);
        std::size_t errs = 0;
        for (std::size_t v = 0; v < n; ++v) {
            x[v] = rng.next_u64() & 1;
            const std::uint8_t decided = rng.next_u64() & 1;
            o[v] = decided;  // hardened
            errs += decided != x[v];
        }
        CHECK(codeword_loss(LossKind::SoftBer, x, o) ==
              doctest::Approx(static_cast<double>(errs) / static_cast<double>(n)));
    }
}

TEST_CASE("multi_loss") {
    const std::vector<std::uint8_t> x{0};
    // per-iteration losses 0.9 and 0.3 (soft-BER on a single bit)
    const std::vector<std::vector<double>> o{{0.9}, {0.3}};
    SUBCASE("eta 0 keeps only the final iteration") {
        CHECK(multi_loss(LossKind::SoftBer, 0.0, x, o) == doctest::Approx(0.3));
    }
    SUBCASE("eta 1 is the unweighted mean") {
        CHECK(multi_loss(LossKind::SoftBer, 1.0, x, o) == doctest::Approx(0.6));
    }
    SUBCASE("eta 0.5 discounts earlier iterations") {
        CHECK(multi_loss(LossKind::SoftBer, 0.5, x, o) ==
              doctest::Approx((0.5 * 0.9 + 1.0 * 0.3) / 1.5));
    }
    SUBCASE("empty trace is rejected") {
        CHECK_THROWS_AS(multi_loss(LossKind::SoftBer, 0.5, x, {}), ParamError);
    }
}

TEST_CASE("multi_loss is a convex combination of per-iteration losses") {
    RngStream rng = RngStream::keyed(3, 0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t t_count = 1 + rng.next_below(6);
        const std::size_t n = 3;
        std::vector<std::uint8_t> x(n, 0);
        std::vector<std::vector<double>> o(t_count, std::vector<double>(n));
        double lo = HUGE_VAL, hi = -HUGE_VAL;
        for (auto& ot : o) {
            for (double& b : ot) b = rng.next_unit();
            const double l = codeword_loss(LossKind::SoftBer, x, ot);
            lo = std::min(lo, l);
            hi = std::max(hi, l);
        }
        const double eta = rng.next_unit();
        const double ml = multi_loss(LossKind::SoftBer, eta, x, o);
        CHECK(ml >= lo - 1e-12);
        CHECK(ml <= hi + 1e-12);
    }
}

TEST_CASE("loss tags round trip") {
    for (LossKind k : {LossKind::BinaryCrossEntropy, LossKind::NegSoftSuccess,
                       LossKind::SoftBer})
        CHECK(loss_from_tag(loss_tag(k)) == k);
    CHECK_THROWS_AS(loss_from_tag("mse"), ParamError);
}

TEST_CASE("bit_loss_derivative matches finite differences") {
    RngStream rng = RngStream::keyed(4, 0);
    const double h = 1e-7;
    for (int trial = 0; trial < 100; ++trial) {
        const int a = static_cast<int>(rng.next_u64() & 1);
        const double b = 0.05 + 0.9 * rng.next_unit();
        for (LossKind k : {LossKind::BinaryCrossEntropy, LossKind::NegSoftSuccess,
                           LossKind::SoftBer}) {
            const double fd =
                (bit_loss(k, a, b + h) - bit_loss(k, a, b - h)) / (2.0 * h);
            CHECK(bit_loss_derivative(k, a, b) ==
                  doctest::Approx(fd).epsilon(1e-5));
        }
    }
}
