#include <doctest.h>

#include <cmath>

#include "dforge/losses.hpp"
#include "dforge/noise.hpp"
#include "../testutil.hpp"

using namespace dforge;

namespace {

std::vector<LossSpec> all_primitives() {
    return {LossSpec::l1(),
            LossSpec::mse(),
            LossSpec::charbonnier(1e-3),
            LossSpec::sobel_gradient(),
            LossSpec::gradient_weighted_l1(),
            LossSpec::swt(2),
            LossSpec::high_frequency(1.5),
            LossSpec::ssim_loss()};
}

}  // namespace

TEST_CASE("every loss vanishes at equality (charbonnier at its eps floor)") {
    const ImageF img = testutil::make_natural(16, 16, 1, 1);
    for (const auto& spec : all_primitives()) {
        const double v = loss(spec, img, img);
        if (spec.kind == LossSpec::Kind::Charbonnier)
            CHECK(v == doctest::Approx(1e-3).epsilon(1e-9));
        else
            CHECK(v == doctest::Approx(0.0).epsilon(0).scale(1e-9));
        CHECK(v >= 0.0);
    }
}

TEST_CASE("mse of constants 0 and 0.5 is 0.25") {
    CHECK(loss(LossSpec::mse(), ImageF(4, 4, 1, 0.0), ImageF(4, 4, 1, 0.5)) ==
          doctest::Approx(0.25));
}

TEST_CASE("losses are non-negative on random pairs") {
    const ImageF a = testutil::make_natural(16, 16, 3, 2);
    const ImageF b = testutil::make_natural(16, 16, 3, 3);
    for (const auto& spec : all_primitives()) CHECK(loss(spec, a, b) >= 0.0);
}

TEST_CASE("all losses are symmetric except the gradient-weighted one") {
    const ImageF a = testutil::make_natural(16, 16, 1, 4);
    ImageF b = testutil::make_natural(16, 16, 1, 5);
    // sharpen one edge in b so the weight fields differ
    for (int r = 0; r < 16; ++r) b.at(r, 8, 0) = r % 2 ? 0.95 : 0.05;
    for (const auto& spec : all_primitives()) {
        const double fwd = loss(spec, a, b);
        const double rev = loss(spec, b, a);
        if (spec.kind == LossSpec::Kind::GradientWeightedL1)
            CHECK(fwd != rev);
        else
            CHECK(fwd == doctest::Approx(rev).epsilon(1e-12));
    }
}

TEST_CASE("weighted sum equals the manual combination") {
    const ImageF a = testutil::make_natural(8, 8, 1, 6);
    const ImageF b = testutil::make_natural(8, 8, 1, 7);
    const LossSpec combo = LossSpec::weighted_sum(
        {{LossSpec::charbonnier(1e-3), 0.8}, {LossSpec::gradient_weighted_l1(), 0.2}});
    const double manual = 0.8 * loss(LossSpec::charbonnier(1e-3), a, b) +
                          0.2 * loss(LossSpec::gradient_weighted_l1(), a, b);
    CHECK(loss(combo, a, b) == doctest::Approx(manual).epsilon(1e-12));
}

TEST_CASE("weighted sum is linear in its terms") {
    const ImageF a = testutil::make_natural(12, 12, 1, 8);
    const ImageF b = testutil::make_natural(12, 12, 1, 9);
    for (double alpha : {0.0, 0.3, 1.7}) {
        for (double beta : {0.5, 1.0}) {
            const LossSpec sum = LossSpec::weighted_sum(
                {{LossSpec::l1(), alpha}, {LossSpec::mse(), beta}});
            CHECK(loss(sum, a, b) ==
                  doctest::Approx(alpha * loss(LossSpec::l1(), a, b) +
                                  beta * loss(LossSpec::mse(), a, b))
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("loss rejects bad inputs") {
    CHECK_THROWS_AS(loss(LossSpec::l1(), ImageF(2, 2, 1), ImageF(2, 3, 1)), DataError);
    ImageF nan_img(2, 2, 1);
    nan_img.data[0] = std::nan("");
    CHECK_THROWS_AS(loss(LossSpec::l1(), nan_img, ImageF(2, 2, 1)), DataError);
    CHECK_THROWS_AS(LossSpec::charbonnier(0.0), DataError);
    CHECK_THROWS_AS(LossSpec::swt(0), DataError);
    CHECK_THROWS_AS(LossSpec::weighted_sum({{LossSpec::l1(), -0.1}}), DataError);
}

// ---------------------------------------------------------------------------
// Undecimated Haar

TEST_CASE("swt of a constant image has zero details and a scaled ll") {
    const ImageF img(8, 8, 1, 0.3);
    const auto stack = swt_forward(img, 2);
    for (const auto& level : stack) {
        for (double v : level.lh.data) CHECK(v == doctest::Approx(0.0));
        for (double v : level.hl.data) CHECK(v == doctest::Approx(0.0));
        for (double v : level.hh.data) CHECK(v == doctest::Approx(0.0));
    }
    for (double v : stack[0].ll.data) CHECK(v == doctest::Approx(0.6));   // 2x
    for (double v : stack[1].ll.data) CHECK(v == doctest::Approx(1.2));   // 4x
}

TEST_CASE("swt forward/inverse round trips to 1e-6") {
    for (int levels : {1, 2, 3}) {
        for (std::uint64_t seed : {1, 2}) {
            const ImageF img = testutil::make_random(19, 23, 3, 40 + seed);
            const ImageF back = swt_inverse(swt_forward(img, levels));
            CHECK(testutil::max_abs_diff(img, back) < 1e-6);
        }
    }
}

TEST_CASE("a step across rows concentrates energy in hl") {
    ImageF img(8, 8, 1, 0.0);
    for (int r = 4; r < 8; ++r)
        for (int c = 0; c < 8; ++c) img.at(r, c, 0) = 1.0;
    const auto stack = swt_forward(img, 1);
    auto energy = [](const ImageF& band) {
        double e = 0.0;
        for (double v : band.data) e += v * v;
        return e;
    };
    CHECK(energy(stack[0].hl) > 0.5);
    CHECK(energy(stack[0].hh) == doctest::Approx(0.0));
    CHECK(energy(stack[0].lh) == doctest::Approx(0.0));
}

TEST_CASE("swt loss of identical pairs is zero") {
    const ImageF img = testutil::make_natural(16, 16, 3, 10);
    CHECK(loss(LossSpec::swt(2), img, img) == 0.0);
}

// ---------------------------------------------------------------------------
// Expression parser

TEST_CASE("parses the weighted two-term expression") {
    const LossSpec spec = parse_loss_expr("0.8*charbonnier(1e-3) + 0.2*gradw_l1");
    REQUIRE(spec.kind == LossSpec::Kind::WeightedSum);
    REQUIRE(spec.terms.size() == 2);
    CHECK(spec.terms[0].second == doctest::Approx(0.8));
    CHECK(spec.terms[0].first.kind == LossSpec::Kind::Charbonnier);
    CHECK(spec.terms[0].first.param == doctest::Approx(1e-3));
    CHECK(spec.terms[1].second == doctest::Approx(0.2));
    CHECK(spec.terms[1].first.kind == LossSpec::Kind::GradientWeightedL1);

    const ImageF a = testutil::make_natural(8, 8, 1, 11);
    const ImageF b = testutil::make_natural(8, 8, 1, 12);
    const double manual = 0.8 * loss(LossSpec::charbonnier(1e-3), a, b) +
                          0.2 * loss(LossSpec::gradient_weighted_l1(), a, b);
    CHECK(loss(spec, a, b) == doctest::Approx(manual));
}

TEST_CASE("parser handles aliases, bare names and scientific notation") {
    CHECK(parse_loss_expr("l2").kind == LossSpec::Kind::Mse);
    CHECK(parse_loss_expr("mse").kind == LossSpec::Kind::Mse);
    CHECK(parse_loss_expr(" swt(2) ").levels == 2);
    CHECK(parse_loss_expr("charbonnier(1e+2)").param == doctest::Approx(100.0));
    CHECK(parse_loss_expr("highfreq(2.5)").param == doctest::Approx(2.5));
}

TEST_CASE("parser rejects malformed expressions") {
    CHECK_THROWS_AS(parse_loss_expr("bogus"), DataError);
    CHECK_THROWS_AS(parse_loss_expr("l1 + "), DataError);
    CHECK_THROWS_AS(parse_loss_expr("x*l1"), DataError);
    CHECK_THROWS_AS(parse_loss_expr("charbonnier(abc)"), DataError);
}

TEST_CASE("to_string round trips through the parser") {
    const LossSpec spec = parse_loss_expr("0.8*charbonnier(0.001) + 0.2*gradw_l1");
    const LossSpec again = parse_loss_expr(to_string(spec));
    const ImageF a = testutil::make_natural(8, 8, 1, 13);
    const ImageF b = testutil::make_natural(8, 8, 1, 14);
    CHECK(loss(spec, a, b) == doctest::Approx(loss(again, a, b)));
}
