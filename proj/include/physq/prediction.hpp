// prediction.hpp
// Fourier physical quantities over a series of M (odd) settings t_j = j and
// the prediction functions chi'(t) and beta'(t) they synthesize.
//
// All uncertainties here depend on (M, N_j) only; none of them read the
// observed counts.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "physq/inference.hpp"
#include "physq/trial_engine.hpp"

namespace physq {

/// Outcomes at settings t_j = j, j = 1..M with M = 2K + 1.
class ParameterSeries {
public:
    ParameterSeries() = default;
    explicit ParameterSeries(std::vector<ExperimentOutcome> outcomes) : outcomes_(std::move(outcomes)) {
        if (outcomes_.empty()) throw std::invalid_argument("ParameterSeries: no settings");
        if (outcomes_.size() % 2 == 0) throw std::invalid_argument("ParameterSeries: M must be odd");
    }

    std::size_t size() const { return outcomes_.size(); }
    std::size_t half_width() const { return (outcomes_.size() - 1) / 2; }
    const std::vector<ExperimentOutcome>& outcomes() const { return outcomes_; }
    const ExperimentOutcome& operator[](std::size_t i) const { return outcomes_[i]; }

    std::vector<std::uint64_t> n_trials() const {
        std::vector<std::uint64_t> n;
        n.reserve(outcomes_.size());
        for (const auto& o : outcomes_) n.push_back(o.n_trials);
        return n;
    }

private:
    std::vector<ExperimentOutcome> outcomes_;
};

namespace detail {

inline void require_odd(std::size_t m, const char* who) {
    if (m == 0 || m % 2 == 0) throw std::invalid_argument(std::string(who) + ": M must be odd");
}

inline bool all_equal(std::span<const std::uint64_t> n) {
    return std::all_of(n.begin(), n.end(), [&](std::uint64_t x) { return x == n.front(); });
}

inline double inverse_trial_sum(std::span<const std::uint64_t> n) {
    double s = 0.0;
    for (auto nj : n) {
        if (nj == 0) throw std::invalid_argument("trial counts must be >= 1");
        s += 1.0 / static_cast<double>(nj);
    }
    return s;
}

inline complex unit_phase(double angle) { return {std::cos(angle), std::sin(angle)}; }

}  // namespace detail

/// 1 + 2 sum_{l=1..K} cos(2 pi l x / M) = sum_{l=-K..K} exp(i 2 pi l x / M).
inline double dirichlet_kernel(double x, std::size_t m) {
    const std::size_t k = (m - 1) / 2;
    double s = 1.0;
    for (std::size_t l = 1; l <= k; ++l) s += 2.0 * std::cos(2.0 * kPi * static_cast<double>(l) * x / static_cast<double>(m));
    return s;
}

// ---------------------------------------------------------------------------
// Branch and phase policies

inline std::vector<Branch> first_branch_policy(std::size_t m) { return std::vector<Branch>(m, Branch::plus); }

inline std::vector<Branch> random_branch_policy(std::size_t m, const SeedSpec& seed) {
    StreamRng rng(seed);
    std::vector<Branch> b(m);
    for (auto& x : b) x = (rng.next_u64() >> 63) ? Branch::minus : Branch::plus;
    return b;
}

/// Uniform phases in [0, 2 pi) with the last one fixed to 0.
inline std::vector<double> random_phases(std::size_t m, const SeedSpec& seed) {
    StreamRng rng(seed);
    std::vector<double> phases(m, 0.0);
    for (std::size_t j = 0; j + 1 < m; ++j) phases[j] = 2.0 * kPi * rng.uniform();
    return phases;
}

inline std::vector<double> chi_values(const ParameterSeries& series, const MappingConstants& mc,
                                      std::span<const Branch> branches) {
    if (branches.size() != series.size()) throw std::invalid_argument("chi_values: one branch per setting required");
    std::vector<double> chi(series.size());
    for (std::size_t j = 0; j < series.size(); ++j) chi[j] = chi_from_p(series[j].ratio(), mc.with_branch(branches[j]));
    return chi;
}

// ---------------------------------------------------------------------------
// Real representation

struct LinearQuantities {
    std::vector<double> g;
    double delta_g = 0.0;
};

/// g_l = (1/M) sum_j a_lj chi_j + eta_l with every a_lj = +-1;
/// delta_g = (C/M) sqrt(sum_j 1/N_j) for every l.
inline LinearQuantities real_linear_quantities(std::span<const double> chi, std::span<const std::uint64_t> n_trials,
                                               const std::vector<std::vector<int>>& signs,
                                               std::span<const double> offsets, double C = 1.0) {
    const std::size_t m = chi.size();
    if (m == 0 || n_trials.size() != m) throw std::invalid_argument("real_linear_quantities: size mismatch");
    if (!offsets.empty() && offsets.size() != signs.size())
        throw std::invalid_argument("real_linear_quantities: one offset per quantity required");
    LinearQuantities out;
    out.g.reserve(signs.size());
    for (std::size_t l = 0; l < signs.size(); ++l) {
        if (signs[l].size() != m) throw std::invalid_argument("real_linear_quantities: sign row length must be M");
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            if (signs[l][j] != 1 && signs[l][j] != -1)
                throw std::invalid_argument("real_linear_quantities: coefficients must be +1 or -1");
            s += signs[l][j] * chi[j];
        }
        out.g.push_back(s / static_cast<double>(m) + (offsets.empty() ? 0.0 : offsets[l]));
    }
    out.delta_g = C / static_cast<double>(m) * std::sqrt(detail::inverse_trial_sum(n_trials));
    return out;
}

struct RealFourierModel {
    std::vector<double> chi;
    std::vector<std::uint64_t> n_trials;
    double C = 1.0;
    std::vector<complex> h;     // l = -K..K stored at l + K
    std::vector<complex> zeta;  // same layout
    double delta_h = 0.0;
    // Cosine/sine split for l = 0..K with their (unequal) uncertainties.
    std::vector<double> cos_coeff, sin_coeff, delta_cos, delta_sin;

    std::size_t size() const { return chi.size(); }
    std::size_t half_width() const { return (chi.size() - 1) / 2; }
    const complex& h_at(std::int64_t l) const { return h.at(static_cast<std::size_t>(l + static_cast<std::int64_t>(half_width()))); }
};

inline RealFourierModel real_fourier_from_chi(std::vector<double> chi, std::vector<std::uint64_t> n_trials,
                                              double C = 1.0, std::vector<complex> zeta = {}) {
    const std::size_t m = chi.size();
    detail::require_odd(m, "real_fourier_quantities");
    if (n_trials.size() != m) throw std::invalid_argument("real_fourier_quantities: one trial count per setting");
    if (!(C > 0.0)) throw std::invalid_argument("real_fourier_quantities: C must be positive");
    if (zeta.empty()) zeta.assign(m, complex{});
    if (zeta.size() != m) throw std::invalid_argument("real_fourier_quantities: need 2K+1 offsets");

    const auto k = static_cast<std::int64_t>((m - 1) / 2);
    const double md = static_cast<double>(m);
    RealFourierModel model;
    model.C = C;
    model.h.resize(m);
    for (std::int64_t l = -k; l <= k; ++l) {
        complex s{};
        for (std::size_t j = 1; j <= m; ++j)
            s += chi[j - 1] * detail::unit_phase(2.0 * kPi * static_cast<double>(j) * static_cast<double>(l) / md);
        model.h[static_cast<std::size_t>(l + k)] = s / md + zeta[static_cast<std::size_t>(l + k)];
    }

    const double inv_sum = detail::inverse_trial_sum(n_trials);
    model.delta_h = C / md * std::sqrt(inv_sum);

    for (std::int64_t l = 0; l <= k; ++l) {
        double c = 0.0, s = 0.0, vc = 0.0, vs = 0.0;
        for (std::size_t j = 1; j <= m; ++j) {
            const double a = 2.0 * kPi * static_cast<double>(j) * static_cast<double>(l) / md;
            const double nj = static_cast<double>(n_trials[j - 1]);
            c += chi[j - 1] * std::cos(a);
            s += l == 0 ? 0.0 : chi[j - 1] * std::sin(a);
            vc += std::cos(a) * std::cos(a) / nj;
            vs += l == 0 ? 0.0 : std::sin(a) * std::sin(a) / nj;
        }
        const complex& z = zeta[static_cast<std::size_t>(l + k)];
        model.cos_coeff.push_back(c / md + z.real());
        model.sin_coeff.push_back(l == 0 ? 0.0 : s / md + z.imag());
        model.delta_cos.push_back(C / md * std::sqrt(vc));
        model.delta_sin.push_back(C / md * std::sqrt(vs));
    }

    model.chi = std::move(chi);
    model.n_trials = std::move(n_trials);
    model.zeta = std::move(zeta);
    return model;
}

/// chi_j from the series through chi_from_p with one branch decision per setting.
inline RealFourierModel real_fourier_quantities(const ParameterSeries& series, const MappingConstants& mc,
                                                std::span<const Branch> branches, std::vector<complex> zeta = {}) {
    return real_fourier_from_chi(chi_values(series, mc, branches), series.n_trials(), mc.C, std::move(zeta));
}

struct PredictionPoint {
    double t = 0.0;
    complex value{};
    double uncertainty = 0.0;
    std::vector<double> contributions;  // per datum, uncertainty^2 = sum of squares
    double residue = 0.0;               // discarded imaginary part (real representation)
};

inline constexpr double kRealityTolerance = 1e-10;

/// chi'(t) = sum_l (h_l - zeta_l) exp(-i 2 pi l t / M) with per-datum
/// uncertainties (C/M) |D(j - t)| / sqrt(N_j).
inline PredictionPoint predict_chi(const RealFourierModel& model, double t) {
    const std::size_t m = model.size();
    const auto k = static_cast<std::int64_t>(model.half_width());
    const double md = static_cast<double>(m);
    complex s{};
    for (std::int64_t l = -k; l <= k; ++l) {
        const auto idx = static_cast<std::size_t>(l + k);
        s += (model.h[idx] - model.zeta[idx]) * detail::unit_phase(-2.0 * kPi * static_cast<double>(l) * t / md);
    }
    double scale = 1.0;
    for (double c : model.chi) scale = std::max(scale, std::abs(c));
    if (std::abs(s.imag()) > kRealityTolerance * scale)
        throw std::logic_error("predict_chi: synthesized value is not real");

    PredictionPoint pt;
    pt.t = t;
    pt.value = {s.real(), 0.0};
    pt.residue = s.imag();
    double var = 0.0;
    pt.contributions.resize(m);
    for (std::size_t j = 1; j <= m; ++j) {
        const double d = model.C / md * std::abs(dirichlet_kernel(static_cast<double>(j) - t, m)) /
                         std::sqrt(static_cast<double>(model.n_trials[j - 1]));
        pt.contributions[j - 1] = d;
        var += d * d;
    }
    pt.uncertainty = std::sqrt(var);
    return pt;
}

// ---------------------------------------------------------------------------
// Complex representation

struct ComplexFourierModel {
    std::vector<Amplitude> beta;
    std::vector<std::uint64_t> n_trials;
    std::vector<complex> v;  // l = -K..K stored at l + K
    double delta_v = 0.0;

    std::size_t size() const { return v.size(); }
    std::size_t half_width() const { return (v.size() - 1) / 2; }
    const complex& v_at(std::int64_t l) const { return v.at(static_cast<std::size_t>(l + static_cast<std::int64_t>(half_width()))); }
};

/// sqrt(sum_j (1/M) (delta beta_j)^2); exactly 1/(2 sqrt(N)) for uniform N_j.
inline double complex_coefficient_uncertainty(std::span<const std::uint64_t> n_trials) {
    if (n_trials.empty()) throw std::invalid_argument("complex_coefficient_uncertainty: empty series");
    if (detail::all_equal(n_trials)) return delta_beta(n_trials.front());
    return 0.5 * std::sqrt(detail::inverse_trial_sum(n_trials) / static_cast<double>(n_trials.size()));
}

/// v_l = (1/sqrt(M)) sum_j beta_j exp(i 2 pi j l / M).
inline std::vector<complex> unitary_dft(std::span<const complex> beta) {
    const std::size_t m = beta.size();
    const auto k = static_cast<std::int64_t>((m - 1) / 2);
    const double md = static_cast<double>(m);
    std::vector<complex> v(m);
    for (std::int64_t l = -k; l <= k; ++l) {
        complex s{};
        for (std::size_t j = 1; j <= m; ++j)
            s += beta[j - 1] * detail::unit_phase(2.0 * kPi * static_cast<double>(j) * static_cast<double>(l) / md);
        v[static_cast<std::size_t>(l + k)] = s / std::sqrt(md);
    }
    return v;
}

inline ComplexFourierModel complex_fourier_from_amplitudes(std::vector<Amplitude> beta,
                                                           std::vector<std::uint64_t> n_trials) {
    detail::require_odd(beta.size(), "complex_fourier_quantities");
    if (n_trials.size() != beta.size()) throw std::invalid_argument("complex_fourier_quantities: one trial count per setting");
    std::vector<complex> values;
    values.reserve(beta.size());
    for (const auto& b : beta) values.push_back(b.value);
    ComplexFourierModel model;
    model.v = unitary_dft(values);
    model.delta_v = complex_coefficient_uncertainty(n_trials);
    model.beta = std::move(beta);
    model.n_trials = std::move(n_trials);
    return model;
}

/// beta_j from counts (right projection) tilted by phases[j].
inline ComplexFourierModel complex_fourier_quantities(const ParameterSeries& series, std::span<const double> phases) {
    if (phases.size() != series.size())
        throw std::invalid_argument("complex_fourier_quantities: need one phase per setting");
    std::vector<Amplitude> beta;
    beta.reserve(series.size());
    for (std::size_t j = 0; j < series.size(); ++j) beta.push_back(beta_from_counts(series[j], phases[j]));
    return complex_fourier_from_amplitudes(std::move(beta), series.n_trials());
}

inline complex synthesize_beta(const ComplexFourierModel& model, double t) {
    const std::size_t m = model.size();
    const auto k = static_cast<std::int64_t>(model.half_width());
    const double md = static_cast<double>(m);
    complex s{};
    for (std::int64_t l = -k; l <= k; ++l)
        s += model.v[static_cast<std::size_t>(l + k)] * detail::unit_phase(-2.0 * kPi * static_cast<double>(l) * t / md);
    return s / std::sqrt(md);
}

/// beta'(t) = (1/M) sum_l sum_j beta_j exp(i 2 pi l (j - t) / M), evaluated
/// from the coefficients v_l. Its uncertainty does not depend on t for
/// uniform N_j.
inline PredictionPoint predict_beta(const ComplexFourierModel& model, double t) {
    const std::size_t m = model.size();
    const double md = static_cast<double>(m);
    PredictionPoint pt;
    pt.t = t;
    pt.value = synthesize_beta(model, t);
    pt.contributions.resize(m);
    double var = 0.0;
    for (std::size_t j = 1; j <= m; ++j) {
        const double d = std::abs(dirichlet_kernel(static_cast<double>(j) - t, m)) / md * delta_beta(model.n_trials[j - 1]);
        pt.contributions[j - 1] = d;
        var += d * d;
    }
    pt.uncertainty = detail::all_equal(model.n_trials) ? delta_beta(model.n_trials.front()) : std::sqrt(var);
    return pt;
}

// ---------------------------------------------------------------------------
// Boundedness of |beta'(t)|

struct ScanGrid {
    double step = 0.01;
    double t_min = 1.0;
    double t_max = 0.0;  // 0 means M

    std::vector<double> points(std::size_t m) const {
        const double hi = t_max > 0.0 ? t_max : static_cast<double>(m);
        if (!(step > 0.0) || hi < t_min) throw std::invalid_argument("ScanGrid: invalid range or step");
        const auto count = static_cast<std::size_t>(std::floor((hi - t_min) / step + 1e-9)) + 1;
        std::vector<double> ts(count);
        for (std::size_t i = 0; i < count; ++i) ts[i] = t_min + static_cast<double>(i) * step;
        if (hi - ts.back() > 1e-9) ts.push_back(hi);
        return ts;
    }
};

inline constexpr double kBoundTolerance = 1e-12;

struct BoundednessReport {
    bool bounded = true;             // max |beta'|^2 <= 1 on the scan grid
    double max_modulus_sq = 0.0;
    double argmax_t = 1.0;
    double coefficient_bound = 0.0;  // (1/sqrt(M)) sum_l |v_l|
    bool sufficient_condition = true;  // coefficient_bound <= 1
};

inline BoundednessReport boundedness_check(const ComplexFourierModel& model, const ScanGrid& grid = {}) {
    BoundednessReport r;
    for (const auto& v : model.v) r.coefficient_bound += std::abs(v);
    r.coefficient_bound /= std::sqrt(static_cast<double>(model.size()));
    r.sufficient_condition = r.coefficient_bound <= 1.0 + kBoundTolerance;
    r.max_modulus_sq = -1.0;
    for (double t : grid.points(model.size())) {
        const double m2 = std::norm(synthesize_beta(model, t));
        if (m2 > r.max_modulus_sq) {
            r.max_modulus_sq = m2;
            r.argmax_t = t;
        }
    }
    r.bounded = r.max_modulus_sq <= 1.0 + kBoundTolerance;
    return r;
}

// ---------------------------------------------------------------------------
// Phase assignment search

struct ZeroPhases {};
struct RandomPhases {
    SeedSpec seed;
    std::size_t samples = 1000;
};
struct GridPhases {
    double step = kPi / 4.0;
};
using PhaseStrategy = std::variant<ZeroPhases, RandomPhases, GridPhases>;

inline constexpr double kMaxSearchEvaluations = 1e8;

struct PhaseSearchResult {
    std::vector<double> phases;
    double max_modulus_sq = 0.0;
    bool admissible = false;
    std::size_t candidates = 0;
};

namespace detail {

// Row-major kernel D(j - t)/M over the scan grid, so beta'(t) = W[t] . beta.
inline std::vector<double> synthesis_kernel(std::size_t m, std::span<const double> ts) {
    std::vector<double> w(ts.size() * m);
    const double md = static_cast<double>(m);
    for (std::size_t i = 0; i < ts.size(); ++i)
        for (std::size_t j = 1; j <= m; ++j) w[i * m + (j - 1)] = dirichlet_kernel(static_cast<double>(j) - ts[i], m) / md;
    return w;
}

inline double max_modulus_sq(std::span<const double> kernel, std::size_t m, std::span<const complex> beta) {
    double best = 0.0;
    for (std::size_t i = 0; i < kernel.size() / m; ++i) {
        complex s{};
        for (std::size_t j = 0; j < m; ++j) s += kernel[i * m + j] * beta[j];
        best = std::max(best, std::norm(s));
    }
    return best;
}

}  // namespace detail

/// Searches phi_1..phi_{M-1} (phi_M = 0) for the assignment minimising
/// max_t |beta'(t)|^2. Ties go to the lexicographically smallest assignment.
inline PhaseSearchResult find_admissible_phases(const ParameterSeries& series, const PhaseStrategy& strategy,
                                                const ScanGrid& grid = {}, unsigned threads = 0) {
    const std::size_t m = series.size();
    const auto ts = grid.points(m);
    const auto kernel = detail::synthesis_kernel(m, ts);

    std::vector<complex> base(m);
    for (std::size_t j = 0; j < m; ++j) base[j] = beta_from_counts(series[j]).value;

    std::size_t count = 1;
    std::size_t per_axis = 1;
    if (const auto* r = std::get_if<RandomPhases>(&strategy)) {
        count = r->samples + 1;  // candidate 0 is the zero assignment
    } else if (const auto* g = std::get_if<GridPhases>(&strategy)) {
        if (!(g->step > 0.0)) throw std::invalid_argument("find_admissible_phases: grid step must be positive");
        per_axis = static_cast<std::size_t>(std::ceil(2.0 * kPi / g->step - 1e-9));
        const double assignments = std::pow(static_cast<double>(per_axis), static_cast<double>(m - 1));
        if (assignments * static_cast<double>(ts.size()) > kMaxSearchEvaluations)
            throw std::invalid_argument("find_admissible_phases: exhaustive grid exceeds 1e8 evaluations");
        count = static_cast<std::size_t>(assignments);
    }

    auto candidate = [&](std::size_t idx) {
        std::vector<double> phases(m, 0.0);
        if (const auto* r = std::get_if<RandomPhases>(&strategy)) {
            if (idx > 0) phases = random_phases(m, SeedSpec{derive_stream_key(r->seed), idx});
        } else if (const auto* g = std::get_if<GridPhases>(&strategy)) {
            for (std::size_t j = 0; j + 1 < m; ++j) {
                phases[j] = static_cast<double>(idx % per_axis) * g->step;
                idx /= per_axis;
            }
        }
        return phases;
    };

    std::vector<double> values(count);
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    auto work = [&](std::size_t begin) {
        std::vector<complex> beta(m);
        for (std::size_t i = begin; i < count; i += threads) {
            const auto phases = candidate(i);
            for (std::size_t j = 0; j < m; ++j) beta[j] = base[j] * std::polar(1.0, -phases[j]);
            values[i] = detail::max_modulus_sq(kernel, m, beta);
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work, t);
        work(0);
    }

    PhaseSearchResult best;
    best.candidates = count;
    best.max_modulus_sq = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < count; ++i) {
        if (values[i] > best.max_modulus_sq) continue;
        auto phases = candidate(i);
        if (values[i] < best.max_modulus_sq || phases < best.phases) {
            best.max_modulus_sq = values[i];
            best.phases = std::move(phases);
        }
    }
    best.admissible = best.max_modulus_sq <= 1.0 + kBoundTolerance;
    return best;
}

}  // namespace physq
