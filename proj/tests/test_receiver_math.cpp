#include <cmath>
#include <complex>
#include <random>
#include <set>

#include "doctest.h"

#include "beamsim/core_model.hpp"
#include "beamsim/feedback.hpp"
#include "beamsim/receiver_math.hpp"

using namespace beamsim;

namespace {

// Measurement oracle: r on the real axis, the node at angle beta + offset.
double measure(double r, double t, double beta, double offset, double power = 1.0) {
    return std::sqrt(power) * std::abs(std::complex<double>(r, 0.0) + std::polar(t, beta + offset));
}

struct Triple {
    double m1, m2, m3;
};

Triple triple(double r, double t, double beta, double power = 1.0) {
    return {measure(r, t, beta, 0.0, power), measure(r, t, beta, kPi, power),
            measure(r, t, beta, kPi / 2.0, power)};
}

}  // namespace

TEST_CASE("solve_three examples") {
    SUBCASE("|r|=1 |t|=0.5 beta=pi/4") {
        const Triple m = triple(1.0, 0.5, kPi / 4.0);
        CHECK(m.m1 * m.m1 == doctest::Approx(1.95711).epsilon(1e-5));
        CHECK(m.m2 * m.m2 == doctest::Approx(0.54289).epsilon(1e-5));
        CHECK(m.m3 * m.m3 == doctest::Approx(0.54289).epsilon(1e-5));
        const ThreeSolve s = solve_three(m.m1, m.m2, m.m3, 1.0);
        CHECK(s.beta == doctest::Approx(kPi / 4.0).epsilon(1e-12));
        CHECK(s.t_mag == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(s.r_mag == doctest::Approx(1.0).epsilon(1e-12));
        CHECK_FALSE(s.degenerate);
    }
    SUBCASE("|r|=2 |t|=1 beta=-pi/3") {
        const Triple m = triple(2.0, 1.0, -kPi / 3.0);
        const double x = (m.m1 * m.m1 + m.m2 * m.m2) / 2.0;
        CHECK(m.m3 * m.m3 - x == doctest::Approx(3.4641).epsilon(1e-4));
        CHECK(m.m2 * m.m2 - x == doctest::Approx(-2.0).epsilon(1e-12));
        const ThreeSolve s = solve_three(m.m1, m.m2, m.m3, 1.0);
        CHECK(s.beta == doctest::Approx(-kPi / 3.0).epsilon(1e-12));
        CHECK(s.t_mag == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("aligned") {
        const Triple m = triple(1.3, 0.7, 0.0);
        CHECK(solve_three(m.m1, m.m2, m.m3, 1.0).beta == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
    }
    SUBCASE("degenerate when one magnitude vanishes") {
        const Triple m = triple(1.0, 0.0, 0.4);
        const ThreeSolve s = solve_three(m.m1, m.m2, m.m3, 1.0);
        CHECK(s.degenerate);
        CHECK(s.beta == 0.0);
        CHECK(s.t_mag == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));
    }
    SUBCASE("transmit power scales the magnitudes") {
        const Triple m = triple(1.0, 0.5, 0.3, 4.0);
        const ThreeSolve s = solve_three(m.m1, m.m2, m.m3, 4.0);
        CHECK(s.beta == doctest::Approx(0.3).epsilon(1e-12));
        CHECK(s.t_mag == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("solve_two examples") {
    const Triple m = triple(1.0, 0.5, kPi / 4.0);
    CHECK(m.m1 * m.m1 - m.m2 * m.m2 == doctest::Approx(1.41421).epsilon(1e-5));
    CHECK(solve_two_beta(m.m1, m.m2, 0.5, 1.0) == doctest::Approx(kPi / 4.0).epsilon(1e-12));

    const Triple aligned = triple(1.0, 0.5, 0.0);
    CHECK(solve_two_beta(aligned.m1, aligned.m2, 0.5, 1.0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));

    const Triple negative = triple(1.0, 0.5, -kPi / 4.0);
    CHECK(solve_two_beta(negative.m1, negative.m2, 0.5, 1.0) == doctest::Approx(kPi / 4.0).epsilon(1e-12));

    SUBCASE("symmetric in the two magnitudes") {
        CHECK(solve_two_beta(m.m1, m.m2, 1.0, 1.0) == doctest::Approx(kPi / 4.0).epsilon(1e-12));
    }
    SUBCASE("degenerate denominator") {
        const TwoSolve s = solve_two(1.0, 1.0, 0.0, 1.0);
        CHECK(s.degenerate);
        CHECK(s.beta_magnitude == 0.0);
    }
    SUBCASE("stale magnitude clamps and reports the raw argument") {
        const TwoSolve s = solve_two(m.m1, m.m2, 0.05, 1.0);
        CHECK(s.clamped);
        CHECK(std::abs(s.cos_argument) > 1.0);
    }
}

TEST_CASE("property: closed forms recover ground truth") {
    Rng rng(42);
    std::uniform_real_distribution<double> mag(1e-3, 10.0);
    std::uniform_real_distribution<double> angle(-kPi / 2.0, kPi / 2.0);
    std::uniform_real_distribution<double> power(0.25, 4.0);
    int checked = 0;
    for (int i = 0; i < 10'000; ++i) {
        const double r = mag(rng), t = mag(rng), beta = angle(rng), p = power(rng);
        if (std::abs(std::abs(beta) - kPi / 2.0) < 1e-9) continue;
        const Triple m = triple(r, t, beta, p);
        const ThreeSolve three = solve_three(m.m1, m.m2, m.m3, p);
        REQUIRE(three.beta == doctest::Approx(beta).scale(1.0).epsilon(1e-6));
        REQUIRE(three.t_mag == doctest::Approx(std::min(r, t)).scale(1.0).epsilon(1e-6));
        REQUIRE(three.r_mag == doctest::Approx(std::max(r, t)).scale(1.0).epsilon(1e-6));
        REQUIRE(solve_two_beta(m.m1, m.m2, t, p) ==
                doctest::Approx(std::abs(beta)).scale(1.0).epsilon(1e-6));
        ++checked;
    }
    CHECK(checked > 9990);
}

TEST_CASE("property: offset solve and prediction") {
    Rng rng(9);
    std::uniform_real_distribution<double> mag(0.05, 5.0);
    std::uniform_real_distribution<double> angle(-kPi / 2.0, kPi / 2.0);
    std::uniform_real_distribution<double> offset(0.05, kPi - 0.05);
    for (int i = 0; i < 5000; ++i) {
        const double r = mag(rng), t = mag(rng), beta = angle(rng);
        const double d = (i % 2 ? 1.0 : -1.0) * offset(rng);
        const OffsetSolve s = solve_with_offset(measure(r, t, beta, 0.0), measure(r, t, beta, kPi),
                                                measure(r, t, beta, d), d, 1.0);
        REQUIRE_FALSE(s.degenerate);
        REQUIRE(s.beta == doctest::Approx(beta).scale(1.0).epsilon(1e-6));
        REQUIRE(s.lo == doctest::Approx(std::min(r, t)).scale(1.0).epsilon(1e-6));
        REQUIRE(s.hi == doctest::Approx(std::max(r, t)).scale(1.0).epsilon(1e-6));
        const double after = angle(rng);
        REQUIRE(predicted_rss(s.sum_sq, s.product2, after, 1.0) ==
                doctest::Approx(measure(r, t, after, 0.0)).epsilon(1e-9));
    }
}

TEST_CASE("quantize_beta examples") {
    CHECK(*quantize_beta(0.3, 2).value == doctest::Approx(kPi / 8.0).epsilon(1e-15));
    CHECK(*quantize_beta(-0.2, 1).value == doctest::Approx(-kPi / 4.0).epsilon(1e-15));
    CHECK_FALSE(quantize_beta(0.0, 2).value.has_value());
}

TEST_CASE("quantize_beta: two bits give the four quoted levels") {
    std::set<double> levels;
    for (double b = -kPi / 2.0; b <= kPi / 2.0; b += 0.001) {
        if (const auto v = quantize_beta(b, 2).value) {
            levels.insert(*v);
        }
    }
    REQUIRE(levels.size() == 4);
    const double expected[] = {-3 * kPi / 8, -kPi / 8, kPi / 8, 3 * kPi / 8};
    int i = 0;
    for (double v : levels) {
        CHECK(v == doctest::Approx(expected[i++]).epsilon(1e-15));
    }
}

TEST_CASE("quantize_beta: dead zone and clamping") {
    // two bits: cell pi/4, half cell pi/8, dead zone pi/32
    CHECK(dead_zone_width(2, 0.25) == doctest::Approx(kPi / 32.0).epsilon(1e-15));
    CHECK_FALSE(quantize_beta(kPi / 32.0 - 1e-9, 2).value.has_value());
    CHECK(quantize_beta(kPi / 32.0 + 1e-9, 2).value.has_value());
    CHECK(quantize_beta(0.01, 2, 0.0).value.has_value());

    const Quantized high = quantize_beta(2.0, 2);
    CHECK(high.clamped);
    CHECK(*high.value == doctest::Approx(3 * kPi / 8).epsilon(1e-15));
    CHECK_FALSE(quantize_beta(1.0, 2).clamped);
}

TEST_CASE("property: quantizer output is the midpoint of the input's cell") {
    Rng rng(5);
    std::uniform_real_distribution<double> angle(-kPi / 2.0, kPi / 2.0);
    for (int k = 1; k <= 8; ++k) {
        const double cell = kPi / std::pow(2.0, k);
        for (int i = 0; i < 2000; ++i) {
            const double b = angle(rng);
            const Quantized q = quantize_beta(b, k, 0.0);
            REQUIRE(q.value.has_value());
            REQUIRE(std::abs(*q.value - b) <= cell / 2.0 + 1e-12);
            const double index = (*q.value + kPi / 2.0) / cell - 0.5;
            REQUIRE(std::abs(index - std::round(index)) < 1e-9);
        }
    }
}

TEST_CASE("AngleCoder") {
    const AngleCoder exact(FeedbackResolution::exact_angle(), 0.25, 1e-6);
    const FeedbackMessage m = exact.encode(0.123);
    CHECK(m.angle_kind == AngleKind::exact);
    CHECK(m.angle == 0.123);
    CHECK(exact.encode(1e-7).empty());

    const AngleCoder two(FeedbackResolution::quantized(2), 0.25, 1e-6);
    const FeedbackMessage q = two.encode(0.3);
    CHECK(q.angle_kind == AngleKind::quantized);
    CHECK(q.angle_bits == 2);
    CHECK(q.angle == doctest::Approx(kPi / 8.0).epsilon(1e-15));
    CHECK(two.encode(0.01).empty());
    CHECK(FeedbackResolution::quantized(3).label() == "3bit");
    CHECK(FeedbackResolution::exact_angle().label() == "exact");
}
