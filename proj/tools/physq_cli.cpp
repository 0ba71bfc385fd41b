// physq command-line driver.
//
// Exit codes: 0 success, 2 usage or validation error, 1 internal error.
// Data goes to --out (or $PHYSQ_OUTPUT_DIR/<command>.csv, or stdout);
// diagnostics go to stderr.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "physq/physq.hpp"

namespace {

using namespace physq;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using KeyValues = std::vector<std::pair<std::string, std::string>>;

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    s = s.substr(b, e - b + 1);
    if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) s = s.substr(1, s.size() - 2);
    return s;
}

// Flat key=value file; '#' and ';' start comments, [section] lines are ignored.
std::map<std::string, std::string> read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("--config: cannot open '" + path + "'");
    std::map<std::string, std::string> cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError("--config: line " + std::to_string(lineno) + " is not key=value");
        cfg[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return cfg;
}

// Fills options not given on the command line from the config file.
void apply_config(CLI::App* sub, const std::map<std::string, std::string>& cfg) {
    for (auto* opt : sub->get_options()) {
        if (opt->count() > 0) continue;
        const auto name = opt->get_single_name();
        const auto it = cfg.find(name);
        if (it == cfg.end()) continue;
        if (opt->get_type_size() == 0) {
            if (it->second == "true" || it->second == "1") opt->add_result("true");
        } else {
            opt->add_result(it->second);
        }
        opt->run_callback();
    }
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& flag) {
    std::vector<T> out;
    if (trim(text).empty()) return out;
    for (const auto& f : csv::split(text)) {
        const auto field = trim(f);
        try {
            if constexpr (std::is_same_v<T, double>)
                out.push_back(csv::parse_double(field));
            else
                out.push_back(csv::parse_count(field));
        } catch (const csv::FormatError&) {
            throw UsageError(flag + ": malformed list entry '" + field + "'");
        }
    }
    return out;
}

class Output {
public:
    Output(const std::string& out_path, const std::string& command) {
        path_ = out_path;
        if (path_.empty()) {
            if (const char* dir = std::getenv("PHYSQ_OUTPUT_DIR"); dir && *dir)
                path_ = (std::filesystem::path(dir) / (command + ".csv")).string();
        }
        if (!path_.empty()) {
            file_.open(path_, std::ios::binary);
            if (!file_) throw UsageError("--out: cannot open '" + path_ + "' for writing");
        }
    }

    std::ostream& stream() { return path_.empty() ? std::cout : file_; }

    /// Effective configuration next to the output file, one key=value per line.
    void write_sidecar(const KeyValues& kv) const {
        if (path_.empty()) return;
        std::ofstream side(path_ + ".config", std::ios::binary);
        for (const auto& [k, v] : kv) side << k << '=' << v << '\n';
    }

private:
    std::string path_;
    std::ofstream file_;
};

// ---------------------------------------------------------------------------

struct SimulateArgs {
    double p = -1.0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::string out;
};

int run_simulate(const SimulateArgs& a) {
    if (!(a.p >= 0.0 && a.p <= 1.0)) throw UsageError("--p must lie in [0,1]");
    if (a.trials == 0) throw UsageError("--trials must be >= 1");
    const auto outcome = simulate_yes_no(a.p, a.trials, SeedSpec{a.seed, a.stream});
    Output out(a.out, "simulate");
    csv::write_table(out.stream(), csv::simulation_table({{a.p, outcome}}));
    out.write_sidecar({{"p", csv::format(a.p)},
                       {"trials", csv::format(a.trials)},
                       {"seed", csv::format(a.seed)},
                       {"stream", csv::format(a.stream)}});
    return 0;
}

struct Fig8Args {
    std::string n_list = "10,100,1000";
    std::string p_list;
    unsigned threads = 0;
    std::string out;
};

int run_fig8(const Fig8Args& a) {
    const auto ns = parse_list<std::uint64_t>(a.n_list, "--n");
    if (ns.empty()) throw UsageError("--n: empty list of trial counts");
    std::vector<double> ps = parse_list<double>(a.p_list, "--p");
    if (trim(a.p_list).empty()) ps = SweepGrid::default_grid().p_values;
    SweepGrid grid;
    try {
        grid = SweepGrid(ns, ps);
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("malformed grid: ") + e.what());
    }
    Output out(a.out, "fig8");
    csv::write_table(out.stream(), csv::dispersion_table(sigma_sweep(grid, a.threads)));
    out.write_sidecar({{"n", a.n_list}, {"p", a.p_list}, {"threads", std::to_string(a.threads)}});
    return 0;
}

struct PredictArgs {
    std::string data;
    std::string repr = "chi";
    std::string phase_policy = "zero";
    std::string branch_policy = "first";
    std::uint64_t seed = 0;
    std::size_t samples = 2000;
    double step = 0.01;
    double C = 1.0;
    double theta = 0.0;
    std::string out;
};

ParameterSeries load_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("--data: cannot open '" + path + "'");
    return csv::read_series(csv::read_table(in));
}

int run_predict(const PredictArgs& a) {
    if (a.repr != "chi" && a.repr != "beta") throw UsageError("--repr must be chi or beta");
    if (a.phase_policy != "zero" && a.phase_policy != "random" && a.phase_policy != "search")
        throw UsageError("--phase-policy must be zero, random or search");
    if (a.branch_policy != "first" && a.branch_policy != "random")
        throw UsageError("--branch-policy must be first or random");
    if (!(a.step > 0.0)) throw UsageError("--step must be positive");
    if (!(a.C > 0.0)) throw UsageError("--C must be positive");

    const auto series = load_series(a.data);
    const std::size_t m = series.size();
    const ScanGrid grid{a.step, 1.0, static_cast<double>(m)};
    const auto ts = grid.points(m);

    std::vector<csv::PredictionRow> rows;
    std::vector<std::string> footer;
    if (a.repr == "chi") {
        const MappingConstants mc(a.C, a.theta);
        const auto branches = a.branch_policy == "first" ? first_branch_policy(m) : random_branch_policy(m, SeedSpec{a.seed, 0});
        const auto model = real_fourier_quantities(series, mc, branches);
        for (double t : ts) {
            const auto pt = predict_chi(model, t);
            rows.push_back({t, pt.value, p_from_chi(pt.value.real(), mc), pt.uncertainty, true});
        }
    } else {
        std::vector<double> phases(m, 0.0);
        if (a.phase_policy == "random") {
            phases = random_phases(m, SeedSpec{a.seed, 0});
        } else if (a.phase_policy == "search") {
            phases = find_admissible_phases(series, RandomPhases{SeedSpec{a.seed, 0}, a.samples}, grid).phases;
        }
        const auto model = complex_fourier_quantities(series, phases);
        const auto report = boundedness_check(model, grid);
        for (double t : ts) {
            const auto pt = predict_beta(model, t);
            const double p = std::norm(pt.value);
            rows.push_back({t, pt.value, p, pt.uncertainty, p <= 1.0 + kBoundTolerance});
        }
        std::ostringstream f;
        f << " bounded=" << (report.bounded ? 1 : 0) << " max_modulus_sq=" << csv::format(report.max_modulus_sq)
          << " argmax_t=" << csv::format(report.argmax_t) << " coefficient_bound=" << csv::format(report.coefficient_bound)
          << " phases=";
        for (std::size_t j = 0; j < m; ++j) f << (j ? ";" : "") << csv::format(phases[j]);
        footer.push_back(f.str());
    }

    Output out(a.out, "predict");
    csv::write_table(out.stream(), csv::prediction_table(rows, footer));
    out.write_sidecar({{"data", a.data},
                       {"repr", a.repr},
                       {"phase-policy", a.phase_policy},
                       {"branch-policy", a.branch_policy},
                       {"seed", csv::format(a.seed)},
                       {"samples", std::to_string(a.samples)},
                       {"step", csv::format(a.step)},
                       {"C", csv::format(a.C)},
                       {"theta", csv::format(a.theta)}});
    return 0;
}

struct CoincidenceArgs {
    std::string probs;
    std::string counts;
    std::string counts_file;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    std::string phases = "0,0,0";
    std::string out;
};

int run_coincidence(const CoincidenceArgs& a) {
    const int sources = !a.probs.empty() + !a.counts.empty() + !a.counts_file.empty();
    if (sources != 1) throw UsageError("give exactly one of --probs, --counts, --counts-file");
    const auto ph = parse_list<double>(a.phases, "--phases");
    if (ph.size() != 3) throw UsageError("--phases needs three values (phi11,phi12,phi21)");
    const CoincidencePhases phases{ph[0], ph[1], ph[2]};
    const std::optional<std::uint64_t> expected = a.trials > 0 ? std::optional(a.trials) : std::nullopt;

    std::vector<csv::CountBlock> blocks;
    if (!a.probs.empty()) {
        const auto p = parse_list<double>(a.probs, "--probs");
        if (p.size() != 4) throw UsageError("--probs needs four values (p11,p12,p21,p22)");
        if (a.trials == 0) throw UsageError("--trials must be >= 1 with --probs");
        try {
            blocks.push_back({0, simulate_coincidence({{{p[0], p[1]}, {p[2], p[3]}}}, a.trials, SeedSpec{a.seed, 0})});
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("--probs: ") + e.what());
        }
    } else {
        csv::Table t;
        if (!a.counts.empty()) {
            const auto c = parse_list<std::uint64_t>(a.counts, "--counts");
            if (c.size() != 4) throw UsageError("--counts needs four values (L11,L12,L21,L22)");
            t.header = {"trial_block", "L11", "L12", "L21", "L22"};
            t.rows.push_back({"0", csv::format(c[0]), csv::format(c[1]), csv::format(c[2]), csv::format(c[3])});
        } else {
            std::ifstream in(a.counts_file);
            if (!in) throw UsageError("--counts-file: cannot open '" + a.counts_file + "'");
            t = csv::read_table(in);
        }
        blocks = csv::read_coincidence_counts(t, expected);
        if (blocks.empty()) throw UsageError("no count blocks in input");
    }

    Output out(a.out, "coincidence");
    csv::write_table(out.stream(), csv::coincidence_table(blocks, phases));
    out.write_sidecar({{"probs", a.probs},
                       {"counts", a.counts},
                       {"counts-file", a.counts_file},
                       {"trials", csv::format(a.trials)},
                       {"seed", csv::format(a.seed)},
                       {"phases", a.phases}});
    return 0;
}

struct ExcludedArgs {
    std::uint64_t trials = 0;
    double k = 0.0;
    bool compare_linear = false;
    std::string out;
};

std::string sig(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

std::string percent(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * x);
    return buf;
}

int run_excluded(const ExcludedArgs& a) {
    if (!(a.k > 1.0)) throw UsageError("--k must be > 1");
    if (a.trials == 0) throw UsageError("--trials must be >= 1");
    const ConfidenceParams conf(a.k);
    const auto ex = excluded_fraction(a.trials, conf);
    if (ex.clamped) std::cerr << "warning: 1 - 2k/(pi sqrt(N)) is negative for these inputs; clamped to 0\n";

    Output out(a.out, "excluded");
    auto& os = out.stream();
    os << "excluded_fraction=" << sig(ex.value, 4) << '\n';
    os << "excluded_percent=" << percent(ex.value) << '\n';
    if (a.compare_linear) {
        const auto range = linear_mapping_excluded_range(a.trials, conf);
        os << "linear_range=" << sig(range.lo, 3) << ',' << sig(range.hi, 3) << '\n';
        os << "linear_percent=" << percent(range.lo) << ',' << percent(range.hi) << '\n';
    }
    out.write_sidecar({{"trials", csv::format(a.trials)},
                       {"k", csv::format(a.k)},
                       {"compare-linear", a.compare_linear ? "true" : "false"}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"physq: invariant inference from yes-no click counts"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "Flat key=value file; command-line flags take precedence");

    SimulateArgs sim;
    auto* s_sim = app.add_subcommand("simulate", "Simulate one yes-no run");
    s_sim->add_option("--p", sim.p, "True click probability in [0,1]");
    s_sim->add_option("--trials", sim.trials, "Number of trials N");
    s_sim->add_option("--seed", sim.seed, "Master seed");
    s_sim->add_option("--stream", sim.stream, "Stream index");
    s_sim->add_option("--out", sim.out, "Output CSV path");

    Fig8Args f8;
    auto* s_f8 = app.add_subcommand("fig8", "Exact dispersion sweep of beta");
    s_f8->add_option("--n", f8.n_list, "Comma-separated trial counts");
    s_f8->add_option("--p", f8.p_list, "Comma-separated probabilities (default 0.01..0.99)");
    s_f8->add_option("--threads", f8.threads, "Worker threads (0 = hardware)");
    s_f8->add_option("--out", f8.out, "Output CSV path");

    PredictArgs pr;
    auto* s_pr = app.add_subcommand("predict", "Prediction curve from a t,n_trials,successes series");
    s_pr->add_option("--data", pr.data, "Input series CSV");
    s_pr->add_option("--repr", pr.repr, "chi or beta");
    s_pr->add_option("--phase-policy", pr.phase_policy, "zero, random or search (beta)");
    s_pr->add_option("--branch-policy", pr.branch_policy, "first or random (chi)");
    s_pr->add_option("--seed", pr.seed, "Seed for random policies");
    s_pr->add_option("--samples", pr.samples, "Random candidates for phase search");
    s_pr->add_option("--step", pr.step, "Grid step in t");
    s_pr->add_option("--C", pr.C, "Label scale C");
    s_pr->add_option("--theta", pr.theta, "Label offset theta");
    s_pr->add_option("--out", pr.out, "Output CSV path");

    CoincidenceArgs co;
    auto* s_co = app.add_subcommand("coincidence", "Two-site coincidence estimates and amplitudes");
    s_co->add_option("--probs", co.probs, "p11,p12,p21,p22 to simulate");
    s_co->add_option("--counts", co.counts, "L11,L12,L21,L22");
    s_co->add_option("--counts-file", co.counts_file, "CSV with trial_block,L11,L12,L21,L22");
    s_co->add_option("--trials", co.trials, "Trials per block");
    s_co->add_option("--seed", co.seed, "Master seed");
    s_co->add_option("--phases", co.phases, "phi11,phi12,phi21");
    s_co->add_option("--out", co.out, "Output CSV path");

    ExcludedArgs ex;
    auto* s_ex = app.add_subcommand("excluded", "Fraction of hypotheses excluded in advance");
    s_ex->add_option("--trials", ex.trials, "Planned number of trials N");
    s_ex->add_option("--k", ex.k, "Confidence multiplier k > 1");
    s_ex->add_flag("--compare-linear", ex.compare_linear, "Also report the linear-mapping range");
    s_ex->add_option("--out", ex.out, "Output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (!config_path.empty()) {
            const auto cfg = read_config(config_path);
            for (auto* sub : app.get_subcommands()) apply_config(sub, cfg);
        }
        if (s_sim->parsed()) return run_simulate(sim);
        if (s_f8->parsed()) return run_fig8(f8);
        if (s_pr->parsed()) return run_predict(pr);
        if (s_co->parsed()) return run_coincidence(co);
        if (s_ex->parsed()) return run_excluded(ex);
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const csv::FormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
