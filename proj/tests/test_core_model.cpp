#include <cmath>
#include <complex>
#include <random>

#include "doctest.h"

#include "beamsim/core_model.hpp"

using namespace beamsim;

namespace {

// Local draw so this file does not depend on the channel module.
double uniform_phase(Rng& rng) {
    return canonical_phase(std::uniform_real_distribution<double>(-kPi, kPi)(rng));
}

ChannelState make_channel(std::vector<double> gains, std::vector<double> phases, double power = 1.0) {
    ChannelState c;
    c.gains = std::move(gains);
    c.phases = std::move(phases);
    for (std::size_t i = 0; i < c.gains.size(); ++i) {
        c.node_ids.push_back(i);
    }
    c.next_node_id = c.gains.size();
    c.tx_power = power;
    return c;
}

ChannelState random_channel(Rng& rng, std::size_t n) {
    std::uniform_real_distribution<double> gain(0.0, 3.0);
    std::vector<double> a, phi;
    for (std::size_t i = 0; i < n; ++i) {
        a.push_back(gain(rng));
        phi.push_back(uniform_phase(rng));
    }
    return make_channel(a, phi, 0.5 + gain(rng));
}

PhaseVector random_phases(Rng& rng, std::size_t n) {
    PhaseVector p;
    for (std::size_t i = 0; i < n; ++i) {
        p.psi.push_back(uniform_phase(rng));
    }
    return p;
}

}  // namespace

TEST_CASE("evaluate_rss examples") {
    CHECK(evaluate_rss(make_channel({1, 1}, {0, 0}), {{0, kPi}}) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(evaluate_rss(make_channel({1, 1}, {0, 0}), {{0, 0}}) == 2.0);
    // |3 + 4j| by std::complex, independent of the implementation's summation
    const double expected = std::abs(std::complex<double>(3.0, 0.0) + std::polar(4.0, kPi / 2.0));
    CHECK(evaluate_rss(make_channel({3, 4}, {0, 0}), {{0, kPi / 2}}) ==
          doctest::Approx(expected).epsilon(1e-15));
    CHECK(expected == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("evaluate_rss rejects length mismatch") {
    CHECK_THROWS_AS(evaluate_rss(make_channel({1, 1}, {0, 0}), {{0}}), ContractViolation);
}

TEST_CASE("evaluate_rss_noisy") {
    Rng rng(11);
    const ChannelState c = random_channel(rng, 7);
    const PhaseVector p = random_phases(rng, 7);

    SUBCASE("zero noise is bit-identical and leaves the generator alone") {
        Rng a(5), b(5);
        CHECK(evaluate_rss_noisy(c, p, 0.0, a) == evaluate_rss(c, p));
        CHECK(a() == b());
    }
    SUBCASE("same seed, same value") {
        Rng a(99), b(99);
        CHECK(evaluate_rss_noisy(c, p, 0.3, a) == evaluate_rss_noisy(c, p, 0.3, b));
    }
    SUBCASE("second moment matches 1 + noise power") {
        const ChannelState one = make_channel({1}, {0});
        Rng r(2024);
        double sum = 0.0;
        const int n = 1'000'000;
        for (int i = 0; i < n; ++i) {
            const double v = evaluate_rss_noisy(one, {{0}}, 1.0, r);
            sum += v * v;
        }
        CHECK(sum / n == doctest::Approx(2.0).epsilon(0.005));
    }
    SUBCASE("negative noise power") {
        Rng r(1);
        CHECK_THROWS_AS(evaluate_rss_noisy(c, p, -1.0, r), ContractViolation);
    }
}

TEST_CASE("rss_max examples") {
    CHECK(rss_max(make_channel({3, 4}, {0, 0})) == 7.0);
    CHECK(rss_max(make_channel({}, {})) == 0.0);
    CHECK(rss_max(make_channel(std::vector<double>(100, 1.0), std::vector<double>(100, 0.0))) == 100.0);
}

TEST_CASE("gain_ratio") {
    const ChannelState c = make_channel({3, 4}, {0, 0});
    CHECK(gain_ratio(5.0, c).value == doctest::Approx(5.0 / 7.0).epsilon(1e-15));
    CHECK(gain_ratio(0.0, c).value == 0.0);
    CHECK(gain_ratio(evaluate_rss(c, {{0.2, 0.2}}), c).value == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(gain_ratio(7.5, c).value == 1.0);  // noiseless clamps
    const GainRatio noisy = gain_ratio(7.5, c, true);
    CHECK(noisy.value == doctest::Approx(7.5 / 7.0));
    CHECK(noisy.exceeds_max);
    CHECK_THROWS_AS(gain_ratio(1.0, make_channel({}, {})), UndefinedRatio);
}

TEST_CASE("canonical_phase examples") {
    CHECK(canonical_phase(3 * kPi) == doctest::Approx(kPi).epsilon(1e-15));
    CHECK(canonical_phase(-kPi) == kPi);
    CHECK(canonical_phase(0.5) == 0.5);
    CHECK_THROWS_AS(canonical_phase(std::nan("")), ContractViolation);
    CHECK_THROWS_AS(canonical_phase(INFINITY), ContractViolation);
}

TEST_CASE("property: canonical_phase is idempotent and in range") {
    Rng rng(7);
    std::uniform_real_distribution<double> wide(-1e4, 1e4);
    for (int i = 0; i < 100000; ++i) {
        const double x = wide(rng);
        const double c = canonical_phase(x);
        REQUIRE(c > -kPi);
        REQUIRE(c <= kPi);
        REQUIRE(canonical_phase(c) == c);
    }
}

TEST_CASE("property: rss bounded by rss_max, shift invariant, attained when aligned") {
    Rng rng(3);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t n = 1 + trial % 12;
        const ChannelState c = random_channel(rng, n);
        const PhaseVector p = random_phases(rng, n);
        const double rss = evaluate_rss(c, p);
        const double top = rss_max(c);
        REQUIRE(rss >= 0.0);
        REQUIRE(rss <= top * (1.0 + 1e-12));

        const double shift = uniform_phase(rng);
        PhaseVector shifted = p;
        for (double& psi : shifted.psi) {
            psi = canonical_phase(psi + shift);
        }
        REQUIRE(evaluate_rss(c, shifted) == doctest::Approx(rss).epsilon(1e-12).scale(top));

        PhaseVector aligned;
        const double common = uniform_phase(rng);
        for (double phi : c.phases) {
            aligned.psi.push_back(canonical_phase(common - phi));
        }
        REQUIRE(evaluate_rss(c, aligned) == doctest::Approx(top).epsilon(1e-12));
    }
}

TEST_CASE("channel invariants are enforced") {
    ChannelState c = make_channel({1, 2}, {0, 0});
    CHECK_NOTHROW(c.validate());
    c.node_ids[1] = 0;
    CHECK_THROWS_AS(c.validate(), ContractViolation);
    c = make_channel({1, -2}, {0, 0});
    CHECK_THROWS_AS(c.validate(), ContractViolation);
    c = make_channel({1, 2}, {0, 4.0});
    CHECK_THROWS_AS(c.validate(), ContractViolation);
}
