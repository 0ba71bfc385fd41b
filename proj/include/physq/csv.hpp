// csv.hpp
// Comma-separated tables with a header row, LF line endings and
// shortest round-trip decimal formatting for doubles. Lines starting with
// '#' are comments (used for footers) and are skipped by the reader.

#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "physq/coincidence.hpp"
#include "physq/dispersion.hpp"
#include "physq/prediction.hpp"
#include "physq/trial_engine.hpp"

namespace physq::csv {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) throw std::logic_error("format_double: buffer too small");
    return {buf, ptr};
}

inline std::string format(double x) { return format_double(x); }
inline std::string format(std::uint64_t x) { return std::to_string(x); }
inline std::string format(int x) { return std::to_string(x); }

inline double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw FormatError("not a number: '" + std::string(s) + "'");
    return v;
}

inline std::uint64_t parse_count(std::string_view s) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty())
        throw FormatError("not a non-negative integer: '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string> split(std::string_view line, char sep = ',') {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> comments;  // footer lines without the leading '#'

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw FormatError("missing column '" + std::string(name) + "'");
    }
};

inline Table read_table(std::istream& in) {
    Table t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            t.comments.push_back(line.substr(1));
            continue;
        }
        auto fields = split(line);
        if (!have_header) {
            t.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != t.header.size())
            throw FormatError("row has " + std::to_string(fields.size()) + " fields, header has " +
                              std::to_string(t.header.size()));
        t.rows.push_back(std::move(fields));
    }
    if (!have_header) throw FormatError("empty input: no header row");
    return t;
}

inline void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << fields[i];
    }
    out << '\n';
}

inline void write_table(std::ostream& out, const Table& t) {
    write_row(out, t.header);
    for (const auto& r : t.rows) write_row(out, r);
    for (const auto& c : t.comments) out << '#' << c << '\n';
}

// ---------------------------------------------------------------------------
// simulate: p_true,n_trials,successes,p_b,delta_p_b

struct SimulationRecord {
    double p_true = 0.0;
    ExperimentOutcome outcome;
};

inline Table simulation_table(const std::vector<SimulationRecord>& recs) {
    Table t{{"p_true", "n_trials", "successes", "p_b", "delta_p_b"}, {}, {}};
    for (const auto& r : recs) {
        const auto est = estimate_probability(r.outcome);
        t.rows.push_back({format(r.p_true), format(r.outcome.n_trials), format(r.outcome.successes), format(est.p_b),
                          format(est.delta_p_b)});
    }
    return t;
}

inline std::vector<SimulationRecord> read_simulation(const Table& t) {
    const auto cp = t.column("p_true"), cn = t.column("n_trials"), cl = t.column("successes");
    std::vector<SimulationRecord> out;
    for (const auto& r : t.rows) out.push_back({parse_double(r[cp]), ExperimentOutcome{parse_count(r[cn]), parse_count(r[cl])}});
    return out;
}

// ---------------------------------------------------------------------------
// fig8: n,p,sigma,sigma_scaled,re_beta_mean

inline Table dispersion_table(const std::vector<DispersionResult>& results) {
    Table t{{"n", "p", "sigma", "sigma_scaled", "re_beta_mean"}, {}, {}};
    for (const auto& r : results)
        t.rows.push_back({format(r.n_trials), format(r.p), format(r.sigma), format(r.sigma_scaled), format(r.beta_mean.real())});
    return t;
}

inline std::vector<DispersionResult> read_dispersion(const Table& t) {
    const auto cn = t.column("n"), cp = t.column("p"), cs = t.column("sigma"), cz = t.column("sigma_scaled"),
               cr = t.column("re_beta_mean");
    std::vector<DispersionResult> out;
    for (const auto& r : t.rows) {
        DispersionResult d;
        d.n_trials = parse_count(r[cn]);
        d.p = parse_double(r[cp]);
        d.sigma = parse_double(r[cs]);
        d.sigma_scaled = parse_double(r[cz]);
        d.beta_mean = {parse_double(r[cr]), d.p};
        out.push_back(d);
    }
    return out;
}

// ---------------------------------------------------------------------------
// series input: t,n_trials,successes with t = 1..M

inline Table series_table(const ParameterSeries& s) {
    Table t{{"t", "n_trials", "successes"}, {}, {}};
    for (std::size_t j = 0; j < s.size(); ++j)
        t.rows.push_back({format(static_cast<std::uint64_t>(j + 1)), format(s[j].n_trials), format(s[j].successes)});
    return t;
}

inline ParameterSeries read_series(const Table& t) {
    const auto ct = t.column("t"), cn = t.column("n_trials"), cl = t.column("successes");
    std::vector<ExperimentOutcome> outcomes;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        if (parse_count(r[ct]) != i + 1) throw FormatError("settings must be contiguous integers 1..M in order");
        const auto n = parse_count(r[cn]);
        const auto l = parse_count(r[cl]);
        if (n == 0 || l > n) throw FormatError("row " + std::to_string(i + 1) + ": need 0 <= successes <= n_trials, n_trials >= 1");
        outcomes.emplace_back(n, l);
    }
    if (outcomes.empty()) throw FormatError("series has no rows");
    if (outcomes.size() % 2 == 0) throw FormatError("series length M must be odd");
    return ParameterSeries(std::move(outcomes));
}

// ---------------------------------------------------------------------------
// predict: t,value_re,value_im,p_pred,uncertainty,bounded_flag

struct PredictionRow {
    double t = 0.0;
    complex value{};
    double p_pred = 0.0;
    double uncertainty = 0.0;
    bool bounded = true;
};

inline Table prediction_table(const std::vector<PredictionRow>& rows, const std::vector<std::string>& footer = {}) {
    Table t{{"t", "value_re", "value_im", "p_pred", "uncertainty", "bounded_flag"}, {}, footer};
    for (const auto& r : rows)
        t.rows.push_back({format(r.t), format(r.value.real()), format(r.value.imag()), format(r.p_pred),
                          format(r.uncertainty), r.bounded ? "1" : "0"});
    return t;
}

inline std::vector<PredictionRow> read_prediction(const Table& t) {
    const auto ct = t.column("t"), cr = t.column("value_re"), ci = t.column("value_im"), cp = t.column("p_pred"),
               cu = t.column("uncertainty"), cb = t.column("bounded_flag");
    std::vector<PredictionRow> out;
    for (const auto& r : t.rows) {
        if (r[cb] != "0" && r[cb] != "1") throw FormatError("bounded_flag must be 0 or 1");
        out.push_back({parse_double(r[ct]), {parse_double(r[cr]), parse_double(r[ci])}, parse_double(r[cp]),
                       parse_double(r[cu]), r[cb] == "1"});
    }
    return out;
}

// ---------------------------------------------------------------------------
// coincidence counts input: trial_block,L11,L12,L21,L22 (+ optional n_trials)

struct CountBlock {
    std::uint64_t trial_block = 0;
    CoincidenceCounts counts;
};

/// Rejects blocks violating L11 + L12 + L21 + L22 = N. N comes from an
/// n_trials column when present, otherwise from `expected_trials`, otherwise
/// from the sum itself.
inline std::vector<CountBlock> read_coincidence_counts(const Table& t, std::optional<std::uint64_t> expected_trials = {}) {
    const auto cb = t.column("trial_block"), c11 = t.column("L11"), c12 = t.column("L12"), c21 = t.column("L21"),
               c22 = t.column("L22");
    std::optional<std::size_t> cn;
    for (std::size_t i = 0; i < t.header.size(); ++i)
        if (t.header[i] == "n_trials") cn = i;
    std::vector<CountBlock> out;
    for (const auto& r : t.rows) {
        const Grid2<std::uint64_t> g{{{parse_count(r[c11]), parse_count(r[c12])}, {parse_count(r[c21]), parse_count(r[c22])}}};
        const std::uint64_t sum = g[0][0] + g[0][1] + g[1][0] + g[1][1];
        const std::uint64_t n = cn ? parse_count(r[*cn]) : expected_trials.value_or(sum);
        if (n == 0 || sum != n)
            throw FormatError("block " + r[cb] + ": counts sum to " + std::to_string(sum) + ", expected " + std::to_string(n));
        out.push_back({parse_count(r[cb]), CoincidenceCounts{n, g}});
    }
    return out;
}

inline Table coincidence_table(const std::vector<CountBlock>& blocks, const CoincidencePhases& phases) {
    Table t;
    t.header = {"trial_block", "n_trials", "L11", "L12", "L21", "L22"};
    const char* names[4] = {"11", "12", "21", "22"};
    for (auto n : names) t.header.push_back(std::string("p") + n);
    for (auto n : names) t.header.push_back(std::string("dp") + n);
    for (auto n : names) {
        t.header.push_back(std::string("b") + n + "_re");
        t.header.push_back(std::string("b") + n + "_im");
    }
    t.header.push_back("residual");
    for (const auto& b : blocks) {
        const auto est = coincidence_estimates(b.counts);
        const auto amp = coincidence_amplitudes(b.counts, phases);
        std::vector<std::string> row{format(b.trial_block), format(b.counts.n_trials)};
        for (auto c : b.counts.flat()) row.push_back(format(c));
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) row.push_back(format(est.p[j][k]));
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) row.push_back(format(est.delta_p[j][k]));
        for (const auto& v : amp.as_vector()) {
            row.push_back(format(v.real()));
            row.push_back(format(v.imag()));
        }
        row.push_back(format(amp.normalization_residual()));
        t.rows.push_back(std::move(row));
    }
    return t;
}

}  // namespace physq::csv
