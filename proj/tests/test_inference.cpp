#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "physq/inference.hpp"
#include "support/oracles.hpp"

using namespace physq;
using Catch::Approx;

TEST_CASE("estimate_probability", "[inference]") {
    const auto half = estimate_probability({100, 50});
    CHECK(half.p_b == 0.5);
    CHECK(half.delta_p_b == Approx(0.05).epsilon(1e-15));

    const auto zero = estimate_probability({100, 0});
    CHECK(zero.p_b == 0.0);
    CHECK(zero.delta_p_b == 0.0);
    CHECK(estimate_probability({100, 100}).delta_p_b == 0.0);

    const auto high = estimate_probability({100, 95});
    CHECK(high.p_b == 0.95);
    CHECK(high.delta_p_b == Approx(0.021794494717703367).epsilon(1e-14));
}

TEST_CASE("gaussian validity flag", "[inference]") {
    CHECK_FALSE(estimate_probability({20, 10}).gaussian_approx_valid);   // N < 30
    CHECK_FALSE(estimate_probability({100, 2}).gaussian_approx_valid);   // N p (1-p) < 5
    CHECK(estimate_probability({100, 50}).gaussian_approx_valid);
}

TEST_CASE("ConfidenceParams requires k > 1", "[inference][error]") {
    CHECK_THROWS_AS(ConfidenceParams(1.0), std::invalid_argument);
    CHECK_THROWS_AS(ConfidenceParams(0.5), std::invalid_argument);
    CHECK_NOTHROW(ConfidenceParams(1.0001));
}

TEST_CASE("chebyshev_interval: frozen values from the quadratic oracle", "[inference][oracle]") {
    const auto iv = chebyshev_interval({100, 50}, ConfidenceParams(3));
    CHECK(iv.lo == Approx(0.35632605721682729).epsilon(1e-13));
    CHECK(iv.hi == Approx(0.64367394278317271).epsilon(1e-13));

    const auto z = chebyshev_interval({100, 0}, ConfidenceParams(3));
    CHECK(z.lo == 0.0);
    CHECK(z.hi == Approx(0.082568807339449541).epsilon(1e-13));
}

TEST_CASE("chebyshev_interval agrees with the quadratic oracle everywhere", "[inference][oracle]") {
    for (std::uint64_t n : {1u, 2u, 7u, 30u, 200u, 1000u})
        for (double k : {1.1, 2.0, 3.0, 5.0})
            for (std::uint64_t l = 0; l <= n; l += std::max<std::uint64_t>(1, n / 17)) {
                const auto iv = chebyshev_interval({n, l}, ConfidenceParams(k));
                const auto [lo, hi] = oracle::chebyshev_roots(n, l, k);
                CHECK(iv.lo == Approx(static_cast<double>(lo)).margin(1e-12));
                CHECK(iv.hi == Approx(static_cast<double>(hi)).margin(1e-12));
                // Interval consistency.
                const double pb = static_cast<double>(l) / static_cast<double>(n);
                CHECK(iv.lo <= pb);
                CHECK(pb <= iv.hi);
                CHECK(iv.lo >= 0.0);
                CHECK(iv.hi <= 1.0);
            }
}

TEST_CASE("chebyshev_interval reduces to p_b +- k delta_p_b for large N", "[inference]") {
    const ConfidenceParams conf(3);
    double previous = 1.0;
    for (std::uint64_t n : {1000u, 100000u, 10000000u}) {
        const ExperimentOutcome o{n, n / 3};
        const auto iv = chebyshev_interval(o, conf);
        const double ratio = iv.width() / (2.0 * conf.k * estimate_probability(o).delta_p_b);
        const double gap = std::abs(ratio - 1.0);
        CHECK(gap < previous);
        previous = gap;
    }
    CHECK(previous < 1e-5);
}

TEST_CASE("excluded_fraction", "[inference]") {
    const auto f = excluded_fraction(1000, ConfidenceParams(3));
    CHECK(f.value == Approx(0.93960494547461556).epsilon(1e-14));
    CHECK_FALSE(f.clamped);
    CHECK(excluded_fraction(100, ConfidenceParams(2)).value == Approx(0.87267604552648373).epsilon(1e-14));
    CHECK(excluded_fraction(100000000, ConfidenceParams(3)).value > 0.9998);

    const auto small = excluded_fraction(1, ConfidenceParams(3));
    CHECK(small.clamped);
    CHECK(small.value == 0.0);
}

TEST_CASE("linear mapping comparison range", "[inference]") {
    const auto r = linear_mapping_excluded_range(1000, ConfidenceParams(3));
    CHECK(r.lo == Approx(0.90513167019494862).epsilon(1e-13));
    CHECK(r.hi == Approx(0.99108027750247770).epsilon(1e-13));
}

TEST_CASE("p_from_chi", "[inference][labels]") {
    const MappingConstants mc(1.7, 0.4);
    CHECK(p_from_chi(mc.theta, mc) == 1.0);
    CHECK(p_from_chi(mc.theta + kPi * mc.C, mc) == Approx(0.0).margin(1e-15));
    CHECK(p_from_chi(mc.theta + kPi * mc.C / 2.0, mc) == Approx(0.5).epsilon(1e-14));
    // Period 2 pi C.
    for (double chi : {-3.0, 0.1, 2.5, 9.0}) CHECK(p_from_chi(chi + 2.0 * kPi * mc.C, mc) == Approx(p_from_chi(chi, mc)).margin(1e-14));
}

TEST_CASE("chi_from_p: branches, periods and round trip", "[inference][labels]") {
    const MappingConstants mc{};
    CHECK(chi_from_p(1.0, mc) == 0.0);
    CHECK(chi_from_p(0.0, mc) == Approx(kPi));
    CHECK(chi_from_p(0.5, mc) == Approx(kPi / 2));
    CHECK(chi_from_p(0.5, mc.with_branch(Branch::minus)) == Approx(-kPi / 2));
    CHECK(chi_from_p(0.5, MappingConstants(1.0, 0.0, Branch::plus, 2)) == Approx(kPi / 2 + 4 * kPi));
    CHECK_THROWS_AS(chi_from_p(1.01, mc), std::invalid_argument);
    CHECK_THROWS_AS(chi_from_p(-0.01, mc), std::invalid_argument);
    CHECK_THROWS_AS(MappingConstants(0.0, 0.0), std::invalid_argument);

    // Round trip and monotonicity on the plus branch, several (C, theta).
    for (auto [c, th] : {std::pair{1.0, 0.0}, std::pair{2.5, -1.0}, std::pair{0.3, 7.0}}) {
        const MappingConstants m(c, th);
        double prev = chi_from_p(0.0, m);
        for (int i = 0; i <= 1000; ++i) {
            const double p = i / 1000.0;
            CHECK(p_from_chi(chi_from_p(p, m), m) == Approx(p).margin(1e-12));
            CHECK(p_from_chi(chi_from_p(p, m.with_branch(Branch::minus)), m) == Approx(p).margin(1e-12));
            const double chi = chi_from_p(p, m);
            if (i > 0) CHECK(chi <= prev);
            prev = chi;
        }
    }
}

TEST_CASE("chi_from_p recovers sampled labels up to branch and period", "[inference][labels]") {
    const MappingConstants mc(1.3, 0.2);
    for (double chi0 : {-5.0, -1.1, 0.0, 0.9, 3.3, 12.0}) {
        const double p = p_from_chi(chi0, mc);
        bool found = false;
        for (Branch b : {Branch::plus, Branch::minus})
            for (std::int64_t k = -3; k <= 3; ++k)
                if (std::abs(chi_from_p(p, MappingConstants(mc.C, mc.theta, b, k)) - chi0) < 1e-9) found = true;
        CHECK(found);
    }
}

TEST_CASE("arcsine form of the label", "[inference][labels]") {
    CHECK(chi_arcsin_form(0.5, 1.0, 0.0) == 0.0);
    CHECK(chi_arcsin_form(1.0, 1.0, 0.0) == Approx(kPi / 2));
    // Linear relation to the cosine-squared labelling.
    for (double p : {0.0, 0.1, 0.5, 0.77, 1.0}) {
        const double c = 2.0, th = 0.3;
        CHECK(chi_arcsin_form(p, c, th) == Approx(th + c * kPi / 2 - (chi_from_p(p, {c, th}) - th)).margin(1e-12));
        CHECK(chi_arcsin_form(p, c, th, Branch::minus) == Approx(2 * th - chi_arcsin_form(p, c, th)).margin(1e-12));
    }
}

TEST_CASE("delta_chi is C/sqrt(N) regardless of the outcome", "[inference][invariance]") {
    const MappingConstants mc{};
    CHECK(delta_chi(100, mc) == 0.1);
    CHECK(delta_chi(1, mc) == 1.0);
    CHECK(label_hypothesis({100, 95}, mc).delta_chi == label_hypothesis({100, 50}, mc).delta_chi);
    CHECK(label_hypothesis({100, 0}, mc).delta_chi == 0.1);

    // The slope identity |d chi/dp| sqrt(p(1-p)/N) = C/sqrt(N) at interior points.
    CHECK(chi_slope(0.3, 2.0) * std::sqrt(0.3 * 0.7 / 400.0) == Approx(0.1).epsilon(1e-14));
    // Same identity by a central finite difference of chi_from_p.
    const MappingConstants m2(2.0, 0.0);
    const double h = 1e-6;
    const double slope = std::abs(chi_from_p(0.3 + h, m2) - chi_from_p(0.3 - h, m2)) / (2 * h);
    CHECK(slope * std::sqrt(0.3 * 0.7 / 400.0) == Approx(0.1).epsilon(1e-8));
}

TEST_CASE("outcome invariance and monotone information gain", "[inference][invariance]") {
    const MappingConstants mc(1.5, 0.0);
    for (std::uint64_t n = 1; n <= 300; ++n) {
        const double dc = delta_chi(n, mc);
        const double db = delta_beta(n);
        for (std::uint64_t l = 0; l <= n; ++l) {
            REQUIRE(label_hypothesis({n, l}, mc).delta_chi == dc);
        }
        CHECK(delta_chi(n + 1, mc) < dc);
        CHECK(delta_beta(n + 1) < db);
    }
}

TEST_CASE("beta_from_p", "[inference][amplitude]") {
    CHECK(beta_from_p(0.0, 1.234).value == complex(0.0, 0.0));
    CHECK(approx_equal(beta_from_p(1.0).value, complex(0.0, 1.0)));
    const auto half = beta_from_p(0.5);
    CHECK(approx_equal(half.value, complex(0.5, 0.5)));
    CHECK(half.probability() == Approx(0.5).epsilon(1e-15));
    CHECK(approx_equal(beta_from_p(0.5, 0.0, Side::left).value, complex(-0.5, 0.5)));
    CHECK_THROWS_AS(beta_from_p(1.2), std::invalid_argument);

    for (int i = 0; i <= 200; ++i) {
        const double p = i / 200.0;
        const auto b = beta_from_p(p);
        CHECK(b.value.real() >= 0.0);
        CHECK(b.value.imag() == p);
        for (double phi : {-2.0, 0.3, 1.0, 3.14, 6.0})
            for (Side s : {Side::left, Side::right}) CHECK(std::abs(beta_from_p(p, phi, s).probability() - p) <= 1e-12);
    }
}

TEST_CASE("beta_from_counts and delta_beta", "[inference][amplitude]") {
    CHECK(beta_from_counts({1, 0}).value == complex(0.0, 0.0));
    CHECK(beta_from_counts({1, 1}).value == complex(0.0, 1.0));
    CHECK(approx_equal(beta_from_counts({100, 50}).value, complex(0.5, 0.5)));
    CHECK(beta_from_counts({100, 50}) == beta_from_p(0.5));
    CHECK(delta_beta(100) == 0.05);
    CHECK(delta_beta(1) == 0.5);
    // N = 1 dispersion by enumerating the two outcomes at p = 1/2.
    const double mean_im = 0.5 * 0.0 + 0.5 * 1.0;
    const double var = 0.5 * std::norm(complex(0.0, 0.0) - complex(0.0, mean_im)) +
                       0.5 * std::norm(complex(0.0, 1.0) - complex(0.0, mean_im));
    CHECK(std::sqrt(var) == delta_beta(1));
}

TEST_CASE("superposition is linear in each amplitude", "[inference][amplitude]") {
    const complex a1{0.3, -0.2}, a2{-0.1, 0.7}, b1{0.05, 0.4}, b2{0.6, 0.1};
    for (double phi : {0.0, 0.7, 2.2}) {
        CHECK(approx_equal(superpose(a1 + a2, b1 + b2, phi), superpose(a1, b1, phi) + superpose(a2, b2, phi)));
        const complex lambda{1.7, -0.4};
        CHECK(approx_equal(superpose(lambda * a1, lambda * b1, phi), lambda * superpose(a1, b1, phi)));
    }
}
