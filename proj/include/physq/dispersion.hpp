// dispersion.hpp
// Exact binomial expectation and dispersion of the amplitude random variable
// beta(L/N) = sqrt(L/N (1 - L/N)) + i L/N (zero phase, right projection).

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "physq/inference.hpp"

namespace physq {

/// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct DispersionResult {
    double p = 0.0;
    std::uint64_t n_trials = 1;
    complex beta_mean{0.0, 0.0};
    double sigma = 0.0;         // from p(1-p) - Re(mean)^2
    double sigma_scaled = 0.0;  // sigma * sqrt(N)
    double sigma2_definition = 0.0;  // sum of w_L |beta_L - mean|^2
    double sigma2_expanded = 0.0;    // expanded form before Im(mean) = p is used
};

namespace detail {

inline void check_dispersion_args(double p, std::uint64_t n) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("dispersion: p must lie in [0,1]");
    if (n == 0) throw std::invalid_argument("dispersion: n_trials must be >= 1");
}

// Calls fn(L, w_L) for every L with a representable binomial weight. The
// weights come from the ratio recurrence outward from the mode and are
// normalised to sum to one.
template <typename Fn>
void for_each_binomial_weight(double p, std::uint64_t n, Fn&& fn) {
    if (p == 0.0) {
        fn(std::uint64_t{0}, 1.0);
        return;
    }
    if (p == 1.0) {
        fn(n, 1.0);
        return;
    }
    const double nd = static_cast<double>(n);
    const double odds = p / (1.0 - p);
    const auto mode = static_cast<std::uint64_t>(std::min(nd, std::floor((nd + 1.0) * p)));
    constexpr double kTail = 1e-300;

    std::vector<double> down, up;  // down[i] = w(mode - 1 - i) / w(mode), up[i] = w(mode + 1 + i) / w(mode)
    double w = 1.0;
    for (std::uint64_t l = mode; l > 0; --l) {
        w *= static_cast<double>(l) / ((nd - static_cast<double>(l) + 1.0) * odds);
        if (w < kTail) break;
        down.push_back(w);
    }
    w = 1.0;
    for (std::uint64_t l = mode; l < n; ++l) {
        w *= (nd - static_cast<double>(l)) / (static_cast<double>(l) + 1.0) * odds;
        if (w < kTail) break;
        up.push_back(w);
    }

    CompensatedSum total;
    for (auto it = down.rbegin(); it != down.rend(); ++it) total.add(*it);
    total.add(1.0);
    for (double x : up) total.add(x);
    const double norm = total.value();

    for (std::size_t i = down.size(); i-- > 0;) fn(mode - 1 - i, down[i] / norm);
    fn(mode, 1.0 / norm);
    for (std::size_t i = 0; i < up.size(); ++i) fn(mode + 1 + i, up[i] / norm);
}

inline complex beta_of_ratio(std::uint64_t l, std::uint64_t n) {
    const double x = static_cast<double>(l) / static_cast<double>(n);
    return {std::sqrt(x * (1.0 - x)), x};
}

}  // namespace detail

/// Expectation of beta(L/N) under Binomial(N, p).
inline complex beta_mean_exact(double p, std::uint64_t n_trials) {
    detail::check_dispersion_args(p, n_trials);
    CompensatedSum re, im;
    detail::for_each_binomial_weight(p, n_trials, [&](std::uint64_t l, double w) {
        const auto b = detail::beta_of_ratio(l, n_trials);
        re.add(w * b.real());
        im.add(w * b.imag());
    });
    return {re.value(), im.value()};
}

/// Standard deviation of beta(L/N), computed through three routes: the
/// defining sum, the expanded form and the simplified p(1-p) - Re(mean)^2.
/// The simplified value is returned in `sigma`.
inline DispersionResult beta_sigma_exact(double p, std::uint64_t n_trials) {
    detail::check_dispersion_args(p, n_trials);
    DispersionResult r;
    r.p = p;
    r.n_trials = n_trials;
    r.beta_mean = beta_mean_exact(p, n_trials);

    CompensatedSum def;
    detail::for_each_binomial_weight(p, n_trials, [&](std::uint64_t l, double w) {
        def.add(w * std::norm(detail::beta_of_ratio(l, n_trials) - r.beta_mean));
    });
    r.sigma2_definition = def.value();

    const double re = r.beta_mean.real();
    const complex mean = r.beta_mean;
    // |mean|^2 + p + i p (mean - conj(mean)) - (mean + conj(mean)) * E[Re beta]
    const complex expanded = std::norm(mean) + p + complex(0.0, p) * (mean - std::conj(mean)) -
                             (mean + std::conj(mean)) * re;
    r.sigma2_expanded = expanded.real();

    const double sigma2 = std::max(0.0, p * (1.0 - p) - re * re);
    r.sigma = std::sqrt(sigma2);
    r.sigma_scaled = r.sigma * std::sqrt(static_cast<double>(n_trials));
    return r;
}

struct SweepGrid {
    std::vector<std::uint64_t> n_values;
    std::vector<double> p_values;

    SweepGrid() = default;
    SweepGrid(std::vector<std::uint64_t> ns, std::vector<double> ps) : n_values(std::move(ns)), p_values(std::move(ps)) {
        for (std::size_t i = 0; i < n_values.size(); ++i) {
            if (n_values[i] == 0) throw std::invalid_argument("SweepGrid: n values must be positive");
            if (i > 0 && n_values[i] <= n_values[i - 1])
                throw std::invalid_argument("SweepGrid: n values must be strictly increasing");
        }
        for (std::size_t i = 0; i < p_values.size(); ++i) {
            if (!(p_values[i] >= 0.0 && p_values[i] <= 1.0))
                throw std::invalid_argument("SweepGrid: p values must lie in [0,1]");
            if (i > 0 && p_values[i] <= p_values[i - 1])
                throw std::invalid_argument("SweepGrid: p values must be strictly increasing");
        }
    }

    /// N in {10, 100, 1000}, p = 0.01 .. 0.99 in steps of 0.01.
    static SweepGrid default_grid() {
        std::vector<double> ps;
        for (int i = 1; i <= 99; ++i) ps.push_back(i / 100.0);
        return {{10, 100, 1000}, std::move(ps)};
    }
};

/// One result per (N, p), row-major by N then p. Grid points are evaluated
/// on up to `threads` workers; output order is fixed by index.
inline std::vector<DispersionResult> sigma_sweep(const SweepGrid& grid, unsigned threads = 0) {
    const std::size_t np = grid.p_values.size();
    const std::size_t total = grid.n_values.size() * np;
    std::vector<DispersionResult> out(total);
    if (total == 0) return out;

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));

    auto work = [&](std::size_t begin) {
        for (std::size_t i = begin; i < total; i += threads)
            out[i] = beta_sigma_exact(grid.p_values[i % np], grid.n_values[i / np]);
    };
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work, t);
    work(0);
    return out;
}

}  // namespace physq
