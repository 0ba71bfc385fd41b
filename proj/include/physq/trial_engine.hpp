// trial_engine.hpp
// Seeded simulation of yes-no and M-outcome probabilistic experiments.
//
// Every draw comes from a counter-based SplitMix64 stream keyed by
// (master_seed, stream_index), so results do not depend on call order,
// thread count or platform. Binomial variates are produced by exact
// inverse-CDF search over pmf weights built with ratio recurrences only
// (no lgamma/exp), which keeps the arithmetic IEEE-deterministic.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace physq {

/// Raw data of a yes-no run: N trials, L clicks in detector 1.
struct ExperimentOutcome {
    std::uint64_t n_trials = 1;
    std::uint64_t successes = 0;

    ExperimentOutcome() = default;
    ExperimentOutcome(std::uint64_t n, std::uint64_t l) : n_trials(n), successes(l) {
        if (n == 0) throw std::invalid_argument("ExperimentOutcome: n_trials must be >= 1");
        if (l > n) throw std::invalid_argument("ExperimentOutcome: successes exceeds n_trials");
    }

    double ratio() const { return static_cast<double>(successes) / static_cast<double>(n_trials); }

    friend bool operator==(const ExperimentOutcome&, const ExperimentOutcome&) = default;
};

/// Counts of an M-outcome run (M >= 2).
struct MultiOutcome {
    std::uint64_t n_trials = 0;
    std::vector<std::uint64_t> counts;

    MultiOutcome() = default;
    explicit MultiOutcome(std::vector<std::uint64_t> c) : counts(std::move(c)) {
        if (counts.size() < 2) throw std::invalid_argument("MultiOutcome: need at least two outcomes");
        n_trials = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
        if (n_trials == 0) throw std::invalid_argument("MultiOutcome: n_trials must be >= 1");
    }

    friend bool operator==(const MultiOutcome&, const MultiOutcome&) = default;
};

struct SeedSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;
};

namespace detail {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Stream key = mix64(master_seed ^ mix64(stream_index + golden)).
constexpr std::uint64_t derive_stream_key(const SeedSpec& seed) {
    return detail::mix64(seed.master_seed ^ detail::mix64(seed.stream_index + detail::kGolden));
}

/// Counter-based generator: the i-th output is mix64(key + (i+1)*golden).
class StreamRng {
public:
    explicit StreamRng(const SeedSpec& seed) : key_(derive_stream_key(seed)) {}

    std::uint64_t next_u64() {
        ++counter_;
        return detail::mix64(key_ + counter_ * detail::kGolden);
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

namespace detail {

// Weights below this fraction of the modal pmf are dropped; the dropped
// mass is far below the 2^-53 resolution of the uniform variate.
constexpr double kTailCut = 1e-20;

struct BinomialWindow {
    std::uint64_t lo = 0;
    std::uint64_t hi = 0;
    std::uint64_t mode = 0;
};

inline BinomialWindow binomial_window(std::uint64_t n, double p) {
    const double q = 1.0 - p;
    const double odds = p / q;
    auto mode = static_cast<std::uint64_t>(std::floor(static_cast<double>(n + 1) * p));
    if (mode > n) mode = n;

    BinomialWindow w{mode, mode, mode};
    double weight = 1.0;
    while (w.hi < n) {
        weight *= static_cast<double>(n - w.hi) / static_cast<double>(w.hi + 1) * odds;
        if (weight < kTailCut) break;
        ++w.hi;
    }
    weight = 1.0;
    while (w.lo > 0) {
        weight *= static_cast<double>(w.lo) / static_cast<double>(n - w.lo + 1) / odds;
        if (weight < kTailCut) break;
        --w.lo;
    }
    return w;
}

// Relative pmf weight at lo, i.e. pmf(lo)/pmf(mode).
inline double weight_at_lo(const BinomialWindow& w, std::uint64_t n, double odds) {
    double weight = 1.0;
    for (std::uint64_t k = w.mode; k > w.lo; --k) {
        weight *= static_cast<double>(k) / static_cast<double>(n - k + 1) / odds;
    }
    return weight;
}

}  // namespace detail

/// Binomial(n, p) variate from a single uniform u in [0,1) by inverse CDF.
inline std::uint64_t binomial_inverse_cdf(std::uint64_t n, double p, double u) {
    if (p <= 0.0) return 0;
    if (p >= 1.0) return n;
    const double odds = p / (1.0 - p);
    const auto w = detail::binomial_window(n, p);
    const double w_lo = detail::weight_at_lo(w, n, odds);

    double total = 0.0;
    double weight = w_lo;
    for (std::uint64_t k = w.lo;; ++k) {
        total += weight;
        if (k == w.hi) break;
        weight *= static_cast<double>(n - k) / static_cast<double>(k + 1) * odds;
    }

    const double target = u * total;
    double cum = 0.0;
    weight = w_lo;
    for (std::uint64_t k = w.lo;; ++k) {
        cum += weight;
        if (target < cum || k == w.hi) return k;
        weight *= static_cast<double>(n - k) / static_cast<double>(k + 1) * odds;
    }
}

inline std::uint64_t sample_binomial(StreamRng& rng, std::uint64_t n, double p) {
    return binomial_inverse_cdf(n, p, rng.uniform());
}

/// Binomial(n_trials, p_true) click count. Consumes one uniform from the stream.
inline ExperimentOutcome simulate_yes_no(double p_true, std::uint64_t n_trials, const SeedSpec& seed) {
    if (!(p_true >= 0.0 && p_true <= 1.0))
        throw std::invalid_argument("simulate_yes_no: p_true must lie in [0,1]");
    if (n_trials == 0) throw std::invalid_argument("simulate_yes_no: n_trials must be >= 1");
    StreamRng rng(seed);
    return {n_trials, sample_binomial(rng, n_trials, p_true)};
}

inline constexpr double kNormalizationTolerance = 1e-12;

/// Multinomial draw by sequential conditional binomials, in the order of `probs`.
inline MultiOutcome simulate_multinomial(const std::vector<double>& probs, std::uint64_t n_trials,
                                         const SeedSpec& seed) {
    if (probs.empty()) throw std::invalid_argument("simulate_multinomial: empty probability list");
    if (probs.size() < 2) throw std::invalid_argument("simulate_multinomial: need at least two outcomes");
    if (n_trials == 0) throw std::invalid_argument("simulate_multinomial: n_trials must be >= 1");
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("simulate_multinomial: probabilities must lie in [0,1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kNormalizationTolerance)
        throw std::invalid_argument("simulate_multinomial: probabilities do not sum to 1");

    StreamRng rng(seed);
    std::vector<std::uint64_t> counts(probs.size(), 0);
    std::uint64_t remaining = n_trials;
    double remaining_mass = 1.0;
    for (std::size_t i = 0; i + 1 < probs.size() && remaining > 0; ++i) {
        double cond = remaining_mass > 0.0 ? probs[i] / remaining_mass : 0.0;
        cond = std::clamp(cond, 0.0, 1.0);
        counts[i] = sample_binomial(rng, remaining, cond);
        remaining -= counts[i];
        remaining_mass -= probs[i];
    }
    counts.back() += remaining;
    return MultiOutcome(std::move(counts));
}

}  // namespace physq
