// coincidence.hpp
// Two-site coincidence runs: each trial ends with one click at site A
// (detector j) and one at site B (detector k), giving four joint outcomes.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "physq/inference.hpp"
#include "physq/trial_engine.hpp"

namespace physq {

template <typename T>
using Grid2 = std::array<std::array<T, 2>, 2>;

template <typename T>
Grid2<T> transpose(const Grid2<T>& g) {
    return {{{g[0][0], g[1][0]}, {g[0][1], g[1][1]}}};
}

/// Joint counts L_jk, j = site-A detector, k = site-B detector.
struct CoincidenceCounts {
    std::uint64_t n_trials = 1;
    Grid2<std::uint64_t> counts{};

    CoincidenceCounts() = default;
    CoincidenceCounts(std::uint64_t n, const Grid2<std::uint64_t>& c) : n_trials(n), counts(c) {
        if (n == 0) throw std::invalid_argument("CoincidenceCounts: n_trials must be >= 1");
        if (c[0][0] + c[0][1] + c[1][0] + c[1][1] != n)
            throw std::invalid_argument("CoincidenceCounts: L11 + L12 + L21 + L22 must equal n_trials");
    }

    /// Counts in the order (11, 12, 21, 22).
    std::vector<std::uint64_t> flat() const { return {counts[0][0], counts[0][1], counts[1][0], counts[1][1]}; }

    /// Site-A yes-no view: detector 1 at A fired in L11 + L12 trials.
    ExperimentOutcome site_a_marginal() const { return {n_trials, counts[0][0] + counts[0][1]}; }
    ExperimentOutcome site_b_marginal() const { return {n_trials, counts[0][0] + counts[1][0]}; }

    CoincidenceCounts swapped_sites() const { return {n_trials, transpose(counts)}; }

    friend bool operator==(const CoincidenceCounts&, const CoincidenceCounts&) = default;
};

struct CoincidenceEstimates {
    Grid2<double> p{};
    Grid2<double> delta_p{};
};

/// Free phases of (11), (12), (21); the (22) phase is pinned to zero.
struct CoincidencePhases {
    double phi11 = 0.0;
    double phi12 = 0.0;
    double phi21 = 0.0;

    Grid2<double> grid() const { return {{{phi11, phi12}, {phi21, 0.0}}}; }
};

struct AmplitudeVector {
    Grid2<Amplitude> beta{};
    Grid2<double> delta_beta{};

    AmplitudeVector() = default;
    AmplitudeVector(const Grid2<Amplitude>& b, const Grid2<double>& db) : beta(b), delta_beta(db) {
        if (b[1][1].phase != 0.0) throw std::invalid_argument("AmplitudeVector: the (2,2) phase must be 0");
    }

    double norm_sq() const {
        return beta[0][0].probability() + beta[0][1].probability() + beta[1][0].probability() + beta[1][1].probability();
    }
    double normalization_residual() const { return norm_sq() - 1.0; }

    /// (beta11, beta12, beta21, beta22)
    std::array<complex, 4> as_vector() const {
        return {beta[0][0].value, beta[0][1].value, beta[1][0].value, beta[1][1].value};
    }

    friend bool operator==(const AmplitudeVector&, const AmplitudeVector&) = default;
};

struct DegreesOfFreedom {
    int free_counts = 0;
    int free_phases = 0;
};

/// Four-outcome multinomial over (11, 12, 21, 22), pairing clicks by trial index.
inline CoincidenceCounts simulate_coincidence(const Grid2<double>& probs, std::uint64_t n_trials, const SeedSpec& seed) {
    const auto mo = simulate_multinomial({probs[0][0], probs[0][1], probs[1][0], probs[1][1]}, n_trials, seed);
    return {n_trials, {{{mo.counts[0], mo.counts[1]}, {mo.counts[2], mo.counts[3]}}}};
}

inline CoincidenceEstimates coincidence_estimates(const CoincidenceCounts& c) {
    CoincidenceEstimates e;
    const double n = static_cast<double>(c.n_trials);
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
            const double p = static_cast<double>(c.counts[j][k]) / n;
            e.p[j][k] = p;
            e.delta_p[j][k] = std::sqrt(p * (1.0 - p) / n);
        }
    return e;
}

namespace detail {

inline AmplitudeVector amplitudes_from_four(const std::array<std::uint64_t, 4>& counts, std::uint64_t n,
                                            const CoincidencePhases& phases) {
    const auto ph = phases.grid();
    Grid2<Amplitude> beta{};
    Grid2<double> db{};
    for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) {
            beta[j][k] = beta_from_counts(ExperimentOutcome{n, counts[static_cast<std::size_t>(2 * j + k)]}, ph[j][k]);
            db[j][k] = delta_beta(n);
        }
    return {beta, db};
}

}  // namespace detail

/// beta_jk = (sqrt(p_jk (1 - p_jk)) + i p_jk) e^{-i phi_jk}, so sum |beta_jk|^2 = sum p_jk = 1.
inline AmplitudeVector coincidence_amplitudes(const CoincidenceCounts& c, const CoincidencePhases& phases) {
    return detail::amplitudes_from_four({c.counts[0][0], c.counts[0][1], c.counts[1][0], c.counts[1][1]}, c.n_trials,
                                        phases);
}

/// The same vector for a single-site experiment with four outcomes, ordered (11, 12, 21, 22).
inline AmplitudeVector four_outcome_amplitudes(const MultiOutcome& outcome, const CoincidencePhases& phases) {
    if (outcome.counts.size() != 4) throw std::invalid_argument("four_outcome_amplitudes: need exactly four outcomes");
    return detail::amplitudes_from_four({outcome.counts[0], outcome.counts[1], outcome.counts[2], outcome.counts[3]},
                                        outcome.n_trials, phases);
}

/// Three free counts (L11, L12, L21; L22 follows from N) and three free phases.
inline DegreesOfFreedom degrees_of_freedom(const AmplitudeVector& v) {
    if (v.beta[1][1].phase != 0.0) throw std::invalid_argument("degrees_of_freedom: the (2,2) phase must be 0");
    return {3, 3};
}

}  // namespace physq
