#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "physq/coincidence.hpp"

using namespace physq;
using Catch::Approx;

namespace {

CoincidenceCounts random_counts(std::uint64_t n, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::uint64_t> u(0, n);
    std::uint64_t a = u(rng), b = u(rng), c = u(rng);
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    return {n, {{{a, b - a}, {c - b, n - c}}}};
}

}  // namespace

TEST_CASE("CoincidenceCounts validation", "[coincidence][error]") {
    CHECK_THROWS_AS(CoincidenceCounts(100, {{{25, 25}, {25, 24}}}), std::invalid_argument);
    CHECK_THROWS_AS(CoincidenceCounts(0, {{{0, 0}, {0, 0}}}), std::invalid_argument);
    CHECK_NOTHROW(CoincidenceCounts(1, {{{0, 0}, {0, 1}}}));
}

TEST_CASE("simulate_coincidence", "[coincidence]") {
    const auto certain = simulate_coincidence({{{1, 0}, {0, 0}}}, 500, {1, 0});
    CHECK(certain.counts == Grid2<std::uint64_t>{{{500, 0}, {0, 0}}});

    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto c = simulate_coincidence({{{0.5, 0.5}, {0, 0}}}, 300, {s, 1});
        CHECK(c.site_a_marginal().successes == 300);
    }

    const std::uint64_t n = 400000;
    const auto uniform = simulate_coincidence({{{0.25, 0.25}, {0.25, 0.25}}}, n, {3, 3});
    const double sd = std::sqrt(n * 0.25 * 0.75);
    for (auto c : uniform.flat()) CHECK(std::abs(static_cast<double>(c) - n / 4.0) <= 5.0 * sd);

    CHECK_THROWS_AS(simulate_coincidence({{{0.3, 0.3}, {0.3, 0.3}}}, 10, {}), std::invalid_argument);
    CHECK(simulate_coincidence({{{0.1, 0.2}, {0.3, 0.4}}}, 77, {5, 5}) == simulate_coincidence({{{0.1, 0.2}, {0.3, 0.4}}}, 77, {5, 5}));
}

TEST_CASE("coincidence_estimates", "[coincidence]") {
    const auto e = coincidence_estimates({100, {{{25, 25}, {25, 25}}}});
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
            CHECK(e.p[j][k] == 0.25);
            CHECK(e.delta_p[j][k] == Approx(0.04330127018922193).epsilon(1e-15));
        }
    const auto one = coincidence_estimates({100, {{{100, 0}, {0, 0}}}});
    CHECK(one.p[0][0] == 1.0);
    CHECK(one.delta_p[0][0] == 0.0);

    std::mt19937_64 rng(4);
    for (int i = 0; i < 100; ++i) {
        const auto r = coincidence_estimates(random_counts(1 + rng() % 5000, rng));
        CHECK(r.p[0][0] + r.p[0][1] + r.p[1][0] + r.p[1][1] == Approx(1.0).margin(1e-15));
    }
}

TEST_CASE("coincidence_amplitudes", "[coincidence]") {
    const double phi = 0.7;
    const auto v = coincidence_amplitudes({40, {{{40, 0}, {0, 0}}}}, {phi, 0.2, 0.3});
    CHECK(approx_equal(v.beta[0][0].value, complex(0.0, 1.0) * std::polar(1.0, -phi)));
    CHECK(v.beta[0][1].value == complex{});
    CHECK(v.beta[1][1].value == complex{});
    CHECK(v.norm_sq() == Approx(1.0).margin(1e-15));
    CHECK(v.delta_beta[1][0] == 1.0 / (2.0 * std::sqrt(40.0)));

    const auto u = coincidence_amplitudes({100, {{{25, 25}, {25, 25}}}}, {1.0, 2.0, 3.0});
    for (const auto& b : u.as_vector()) CHECK(std::norm(b) == Approx(0.25).epsilon(1e-14));
}

TEST_CASE("normalisation holds for random count grids", "[coincidence][property]") {
    std::mt19937_64 rng(2718);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
    for (int i = 0; i < 1000; ++i) {
        const auto c = random_counts(1 + rng() % 1000000, rng);
        const auto v = coincidence_amplitudes(c, {ph(rng), ph(rng), ph(rng)});
        REQUIRE(std::abs(v.normalization_residual()) <= 1e-12);
    }
    const auto big = coincidence_amplitudes({1000000, {{{250000, 250000}, {250000, 250000}}}}, {});
    CHECK(std::abs(big.normalization_residual()) <= 1e-12);
}

TEST_CASE("swapping sites transposes every grid", "[coincidence][property]") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 200; ++i) {
        const auto c = random_counts(1 + rng() % 3000, rng);
        const auto s = c.swapped_sites();
        CHECK(s.swapped_sites() == c);
        const auto e = coincidence_estimates(c), es = coincidence_estimates(s);
        CHECK(es.p == transpose(e.p));
        CHECK(es.delta_p == transpose(e.delta_p));
        const CoincidencePhases phases{0.4, 1.1, 2.5};
        const CoincidencePhases swapped{0.4, 2.5, 1.1};
        CHECK(coincidence_amplitudes(s, swapped).beta == transpose(coincidence_amplitudes(c, phases).beta));
    }
}

TEST_CASE("one-site reduction reproduces the yes-no analysis", "[coincidence]") {
    const CoincidenceCounts c{200, {{{30, 50}, {70, 50}}}};
    const auto a = c.site_a_marginal();
    CHECK(a.successes == 80);
    CHECK(estimate_probability(a).p_b == 80.0 / 200.0);
    CHECK(c.site_b_marginal().successes == 100);
    const auto e = coincidence_estimates(c);
    CHECK(estimate_probability(a).p_b == e.p[0][0] + e.p[0][1]);
}

TEST_CASE("coincidence run equals a one-site four-outcome experiment", "[coincidence]") {
    std::mt19937_64 rng(77);
    for (int i = 0; i < 100; ++i) {
        const auto c = random_counts(1 + rng() % 10000, rng);
        const MultiOutcome single(c.flat());
        const CoincidencePhases phases{0.1 * i, 0.2, -0.3};
        CHECK(coincidence_amplitudes(c, phases) == four_outcome_amplitudes(single, phases));
    }
    CHECK_THROWS_AS(four_outcome_amplitudes(MultiOutcome({1, 2, 3}), {}), std::invalid_argument);
}

TEST_CASE("degrees_of_freedom", "[coincidence]") {
    const auto v = coincidence_amplitudes({100, {{{10, 20}, {30, 40}}}}, {0.5, 0.6, 0.7});
    const auto d = degrees_of_freedom(v);
    CHECK(d.free_counts == 3);
    CHECK(d.free_phases == 3);
    const auto edge = degrees_of_freedom(coincidence_amplitudes({1, {{{0, 1}, {0, 0}}}}, {}));
    CHECK(edge.free_counts == 3);

    Grid2<Amplitude> b{};
    b[1][1] = beta_from_p(0.5, 0.3);
    CHECK_THROWS_AS(AmplitudeVector(b, {}), std::invalid_argument);
}
