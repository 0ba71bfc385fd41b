// inference.hpp
// Probability estimates with Chebyshev intervals, the arcsine hypothesis
// label chi, and the complex amplitude beta.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "physq/trial_engine.hpp"

namespace physq {

using complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

/// Chebyshev confidence multiplier k; only k > 1 is meaningful.
struct ConfidenceParams {
    double k = 2.0;

    explicit ConfidenceParams(double k_) : k(k_) {
        if (!(k_ > 1.0)) throw std::invalid_argument("ConfidenceParams: k must be > 1");
    }
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

struct ProbabilityEstimate {
    double p_b = 0.0;
    double delta_p_b = 0.0;
    Interval exact_interval{};
    // False when N < 30 or N p_b (1 - p_b) < 5, where the Gaussian
    // approximation behind delta_p_b (and delta_chi) is not trustworthy.
    bool gaussian_approx_valid = false;
};

inline bool gaussian_approx_valid(const ExperimentOutcome& outcome) {
    const double n = static_cast<double>(outcome.n_trials);
    const double p = outcome.ratio();
    return outcome.n_trials >= 30 && n * p * (1.0 - p) >= 5.0;
}

/// p_b = L/N and delta_p_b = sqrt(p_b (1 - p_b) / N). The interval is left empty.
inline ProbabilityEstimate estimate_probability(const ExperimentOutcome& outcome) {
    ProbabilityEstimate est;
    est.p_b = outcome.ratio();
    est.delta_p_b = std::sqrt(est.p_b * (1.0 - est.p_b) / static_cast<double>(outcome.n_trials));
    est.exact_interval = {est.p_b, est.p_b};
    est.gaussian_approx_valid = gaussian_approx_valid(outcome);
    return est;
}

/// Exact solution of |p - p_b| <= k sqrt(p (1-p) / N) for p, clipped to [0,1].
inline Interval chebyshev_interval(const ExperimentOutcome& outcome, const ConfidenceParams& conf) {
    const double n = static_cast<double>(outcome.n_trials);
    const double p_b = outcome.ratio();
    const double k2 = conf.k * conf.k;
    const double f = 1.0 / (1.0 + k2 / n);
    const double centre = p_b * f + k2 / (2.0 * n) * f;
    const double half = conf.k * f * std::sqrt(p_b * (1.0 - p_b) / n + k2 / (4.0 * n * n));
    Interval iv{centre - half, centre + half};
    iv.lo = std::clamp(iv.lo, 0.0, 1.0);
    iv.hi = std::clamp(iv.hi, 0.0, 1.0);
    // The algebra guarantees lo <= p_b <= hi; rounding at the boundary must not break it.
    iv.lo = std::min(iv.lo, p_b);
    iv.hi = std::max(iv.hi, p_b);
    return iv;
}

inline ProbabilityEstimate estimate_with_interval(const ExperimentOutcome& outcome,
                                                  const ConfidenceParams& conf) {
    auto est = estimate_probability(outcome);
    est.exact_interval = chebyshev_interval(outcome, conf);
    return est;
}

struct ExcludedFraction {
    double value = 0.0;
    bool clamped = false;  // 1 - 2k/(pi sqrt(N)) was negative
};

/// Share of the chi axis excluded in advance by N trials at confidence k.
inline ExcludedFraction excluded_fraction(std::uint64_t n_trials, const ConfidenceParams& conf) {
    if (n_trials == 0) throw std::invalid_argument("excluded_fraction: n_trials must be >= 1");
    const double raw = 1.0 - 2.0 * conf.k / (kPi * std::sqrt(static_cast<double>(n_trials)));
    if (raw < 0.0) return {0.0, true};
    return {raw, false};
}

/// Range of the excluded fraction 1 - (interval width) under a linear
/// hypothesis-to-probability mapping. The smallest value comes from the
/// widest large-N interval (p_b = 1/2); the largest from the exact
/// interval at p_b in {0, 1}, where the large-N form degenerates.
inline Interval linear_mapping_excluded_range(std::uint64_t n_trials, const ConfidenceParams& conf) {
    if (n_trials == 0) throw std::invalid_argument("linear_mapping_excluded_range: n_trials must be >= 1");
    const double n = static_cast<double>(n_trials);
    const double widest = 2.0 * conf.k * std::sqrt(0.25 / n);
    const double narrowest = chebyshev_interval(ExperimentOutcome{n_trials, 0}, conf).width();
    return {1.0 - widest, 1.0 - narrowest};
}

// ---------------------------------------------------------------------------
// Hypothesis labels

enum class Branch { plus, minus };

/// Constants fixing the chi labelling: p = cos^2((chi - theta) / (2C)).
struct MappingConstants {
    double C = 1.0;
    double theta = 0.0;
    Branch branch = Branch::plus;
    std::int64_t period_index = 0;

    MappingConstants() = default;
    MappingConstants(double c, double th, Branch b = Branch::plus, std::int64_t period = 0)
        : C(c), theta(th), branch(b), period_index(period) {
        if (!(c > 0.0)) throw std::invalid_argument("MappingConstants: C must be positive");
    }

    MappingConstants with_branch(Branch b) const { return {C, theta, b, period_index}; }
};

/// Periodic inverse label map, period 2 pi C.
inline double p_from_chi(double chi, const MappingConstants& mc) {
    const double c = std::cos((chi - mc.theta) / (2.0 * mc.C));
    return std::clamp(c * c, 0.0, 1.0);
}

/// Label of probability p on the chosen half-period. Branch::plus covers
/// [theta, theta + pi C] (p from 1 down to 0), Branch::minus the mirror
/// half [theta - pi C, theta]; period_index shifts by 2 pi C.
inline double chi_from_p(double p, const MappingConstants& mc) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("chi_from_p: p must lie in [0,1]");
    const double half_angle = 2.0 * mc.C * std::acos(std::sqrt(p));
    const double sign = mc.branch == Branch::plus ? 1.0 : -1.0;
    return mc.theta + sign * half_angle + 2.0 * kPi * mc.C * static_cast<double>(mc.period_index);
}

/// The same labelling written as +-C arcsin(2p - 1) + theta. It differs from
/// chi_from_p only by a sign and a constant: chi_arcsin = theta + C pi/2 - (chi - theta)
/// for the plus branch, so both carry identical uncertainty C / sqrt(N).
inline double chi_arcsin_form(double p, double C, double theta, Branch branch = Branch::plus) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("chi_arcsin_form: p must lie in [0,1]");
    if (!(C > 0.0)) throw std::invalid_argument("chi_arcsin_form: C must be positive");
    const double sign = branch == Branch::plus ? 1.0 : -1.0;
    return sign * C * std::asin(2.0 * p - 1.0) + theta;
}

/// |d chi / dp| = C / sqrt(p (1 - p)); infinite at p in {0, 1}.
inline double chi_slope(double p, double C) { return C / std::sqrt(p * (1.0 - p)); }

/// C / sqrt(N), independent of the outcome. Never formed as slope * delta_p.
inline double delta_chi(std::uint64_t n_trials, const MappingConstants& mc) {
    if (n_trials == 0) throw std::invalid_argument("delta_chi: n_trials must be >= 1");
    return mc.C / std::sqrt(static_cast<double>(n_trials));
}

struct HypothesisLabel {
    double chi = 0.0;
    double delta_chi = 0.0;
    MappingConstants constants;
};

inline HypothesisLabel label_hypothesis(const ExperimentOutcome& outcome, const MappingConstants& mc) {
    return {chi_from_p(outcome.ratio(), mc), delta_chi(outcome.n_trials, mc), mc};
}

// ---------------------------------------------------------------------------
// Amplitudes

enum class Side { right, left };

inline constexpr double kAmplitudeTolerance = 1e-12;

/// Complex label beta with |beta|^2 = p. `phase` is the tilt phi, `side`
/// the half circle p was projected onto.
struct Amplitude {
    complex value{0.0, 0.0};
    double phase = 0.0;
    Side side = Side::right;

    double probability() const { return std::norm(value); }

    friend bool operator==(const Amplitude&, const Amplitude&) = default;
};

inline bool approx_equal(const complex& a, const complex& b, double tol = kAmplitudeTolerance) {
    return std::abs(a.real() - b.real()) <= tol && std::abs(a.imag() - b.imag()) <= tol;
}

inline bool approx_equal(const Amplitude& a, const Amplitude& b, double tol = kAmplitudeTolerance) {
    return approx_equal(a.value, b.value, tol);
}

/// beta = (+-sqrt(p(1-p)) + i p) e^{-i phi}; the sign is + on the right side.
inline Amplitude beta_from_p(double p, double phase = 0.0, Side side = Side::right) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("beta_from_p: p must lie in [0,1]");
    const double re = std::sqrt(p * (1.0 - p));
    const complex untilted{side == Side::right ? re : -re, p};
    const complex value = phase == 0.0 ? untilted : untilted * std::polar(1.0, -phase);
    return {value, phase, side};
}

/// Amplitude estimate from counts, right projection.
inline Amplitude beta_from_counts(const ExperimentOutcome& outcome, double phase = 0.0) {
    return beta_from_p(outcome.ratio(), phase, Side::right);
}

/// 1 / (2 sqrt(N)), independent of the outcome.
inline double delta_beta(std::uint64_t n_trials) {
    if (n_trials == 0) throw std::invalid_argument("delta_beta: n_trials must be >= 1");
    return 0.5 / std::sqrt(static_cast<double>(n_trials));
}

/// beta_a e^{i phi} + beta_b: two alternatives combined with a relative phase.
inline complex superpose(const complex& beta_a, const complex& beta_b, double relative_phase) {
    return beta_a * std::polar(1.0, relative_phase) + beta_b;
}

}  // namespace physq
