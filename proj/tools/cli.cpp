#include "cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>

#include "telesim/analysis.hpp"
#include "telesim/bench.hpp"
#include "telesim/error.hpp"
#include "telesim/protocol.hpp"

namespace fs = std::filesystem;

namespace telesim::cli {

namespace {

/// Aborts a subcommand with an exit code; the message goes to stderr.
struct Exit {
    int code;
    std::string message;
};

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::BadParam:
        case ErrorCode::BadCalibration:
            return kExitUsage;
        case ErrorCode::NonUnitary:
        case ErrorCode::NotNormalized:
        case ErrorCode::ImpossibleOutcome:
            return kExitInternal;
        default:
            return kExitInput;
    }
}

// ---------------------------------------------------------------------------
// Run configuration as ordered key=value pairs. Flags, manifests and defaults
// all funnel through the same map, so whatever was run can be written back out.

// Flag name <-> manifest key.
constexpr std::string_view kRunKeys[] = {
    "bench",         "mode",      "trials",      "phi_steps",           "seed",      "qe",
    "dephasing_sigma", "baseline_sigma", "dark_prob", "delay_m", "risetime_ns", "ns_per_m",
    "detector_latency_ns", "jitter_ns", "input_theta", "workers",
};

std::string flag_for(std::string_view key) {
    std::string flag = "--" + std::string(key);
    std::replace(flag.begin(), flag.end(), '_', '-');
    return flag;
}

std::string num(double v) { return fmt::format("{}", v); }

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

Manifest run_defaults() {
    return {
        {"bench", "builtin"},
        {"mode", "active"},
        {"trials", "1000"},
        {"phi_steps", "25"},
        {"seed", "1"},
        {"qe", "1"},
        {"dephasing_sigma", "0"},
        {"baseline_sigma", "0"},
        {"dark_prob", "0"},
        {"delay_m", "bench"},
        {"risetime_ns", num(TimingModel{}.risetime_ns)},
        {"ns_per_m", num(kDefaultNsPerMeter)},
        {"detector_latency_ns", "0"},
        {"jitter_ns", "0"},
        {"input_theta", "bench"},
        {"workers", "1"},
    };
}

Manifest paper_defaults() {
    Manifest m = run_defaults();
    m["trials"] = "100000";
    m["qe"] = num(kDefaultQuantumEfficiency);
    m["dephasing_sigma"] = num(calibrate_sigma(0.906, 0.80));
    m["baseline_sigma"] = num(calibrate_sigma(1.0, 0.906));
    m["workers"] = std::to_string(default_workers());
    m.erase("mode");
    return m;
}

template <typename T>
T parse_value(const Manifest& m, const std::string& key) {
    const std::string& s = m.at(key);
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::BadParam, fmt::format("{}: '{}' is not a valid number", flag_for(key), s));
    }
    return value;
}

std::optional<double> parse_optional(const Manifest& m, const std::string& key) {
    if (m.at(key) == "bench") return std::nullopt;
    return parse_value<double>(m, key);
}

struct LoadedBench {
    Bench bench;
    std::uint64_t hash = 0;
};

LoadedBench load_bench(const std::string& spec, std::ostream& err) {
    if (spec == "builtin") {
        Bench b = builtin_figure1();
        return {b, fnv1a(serialize(b))};
    }
    std::ifstream in(spec, std::ios::binary);
    std::ostringstream bytes;
    if (in) bytes << in.rdbuf();
    ParseResult r = in ? parse_bench(bytes.str()) : load_bench_file(spec);
    for (const auto& d : r.diagnostics) err << spec << ":" << format(d) << "\n";
    if (!r.ok()) throw Exit{kExitInput, fmt::format("bench '{}' is not usable", spec)};
    return {std::move(*r.bench), fnv1a(bytes.str())};
}

RunConfig config_from(const Manifest& m, std::optional<RunMode> mode = std::nullopt) {
    RunConfig cfg;
    cfg.mode = mode ? *mode : parse_run_mode(m.at("mode"));
    cfg.trials_per_phi = parse_value<std::size_t>(m, "trials");
    cfg.phi_grid = default_phi_grid(parse_value<std::size_t>(m, "phi_steps"));
    cfg.seed = parse_value<std::uint64_t>(m, "seed");
    cfg.noise.qe = parse_value<double>(m, "qe");
    cfg.noise.dephasing_sigma = parse_value<double>(m, "dephasing_sigma");
    cfg.noise.baseline_sigma = parse_value<double>(m, "baseline_sigma");
    cfg.noise.dark_count_prob = parse_value<double>(m, "dark_prob");
    cfg.delay_length_m = parse_optional(m, "delay_m");
    cfg.timing.risetime_ns = parse_value<double>(m, "risetime_ns");
    cfg.timing.delay_ns_per_m = parse_value<double>(m, "ns_per_m");
    cfg.timing.detector_latency_ns = parse_value<double>(m, "detector_latency_ns");
    cfg.timing.jitter_sigma_ns = parse_value<double>(m, "jitter_ns");
    cfg.input_theta = parse_optional(m, "input_theta");
    cfg.workers = parse_value<unsigned>(m, "workers");
    cfg.check();
    return cfg;
}

/// Registers one string-valued flag per key; values land in `flags` only when given.
void add_config_flags(CLI::App* app, const Manifest& defaults, Manifest& flags, bool with_mode) {
    for (std::string_view key : kRunKeys) {
        if (!defaults.contains(std::string(key))) continue;
        if (key == "mode" && !with_mode) continue;
        const std::string k(key);
        auto* opt = app->add_option_function<std::string>(
            flag_for(key), [&flags, k](const std::string& v) { flags[k] = v; },
            fmt::format("(default: {})", defaults.at(k)));
        if (key == "mode") opt->check(CLI::IsMember({"passive", "active", "active-inhibited"}));
    }
}

FringeData read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Exit{kExitInput, fmt::format("cannot read '{}'", path)};
    try {
        return read_fringe_csv(in);
    } catch (const Error& e) {
        throw Exit{kExitInput, fmt::format("{}: {}", path, e.what())};
    }
}

void write_text_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw Exit{kExitInput, fmt::format("cannot write '{}'", path.string())};
}

std::string fringe_csv(const FringeData& d) {
    std::ostringstream s;
    write_fringe_csv(s, d);
    return s.str();
}

std::vector<double> rates(const FringeData& d, CoincidencePair p) {
    std::vector<double> r(d.size(), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d.trials_kept[i] > 0) r[i] = static_cast<double>(d.pair_counts(p)[i]) / static_cast<double>(d.trials_kept[i]);
    return r;
}

void print_sparklines(std::ostream& out, const FringeData& d, std::string_view indent = "  ") {
    for (auto p : kAllPairs) out << fmt::format("{}{:<7}|{}|\n", indent, to_string(p), sparkline(rates(d, p)));
}

std::string pm(double v, double e) { return fmt::format("{:.4f} +/- {:.4f}", v, e); }

// ---------------------------------------------------------------------------

int cmd_run(const Manifest& flags, const std::string& manifest_path, const std::string& out_dir,
            const std::string& event_log, std::size_t event_trials, std::ostream& out, std::ostream& err) {
    Manifest m = run_defaults();
    std::optional<std::string> expected_hash;
    if (!manifest_path.empty()) {
        std::ifstream in(manifest_path);
        if (!in) throw Exit{kExitInput, fmt::format("cannot read manifest '{}'", manifest_path)};
        for (auto& [k, v] : read_manifest(in)) {
            if (k == "bench_hash") {
                expected_hash = v;
            } else if (m.contains(k)) {
                m[k] = v;
            } else {
                throw Exit{kExitInput, fmt::format("manifest '{}': unknown key '{}'", manifest_path, k)};
            }
        }
    }
    for (const auto& [k, v] : flags) m[k] = v;

    const RunConfig cfg = config_from(m);
    const LoadedBench lb = load_bench(m.at("bench"), err);
    const std::string hash = fmt::format("{:016x}", lb.hash);
    if (expected_hash && *expected_hash != hash) {
        throw Exit{kExitInput, fmt::format("bench '{}' does not match the manifest (hash {} != {})", m.at("bench"),
                                           hash, *expected_hash)};
    }

    const FringeData data = run_sweep(lb.bench, cfg);

    Manifest written = m;
    written["bench_hash"] = hash;
    std::ostringstream manifest_text;
    write_manifest(manifest_text, written);
    const fs::path dir(out_dir);
    write_text_file(dir / "fringe.csv", fringe_csv(data));
    write_text_file(dir / "manifest.txt", manifest_text.str());

    if (!event_log.empty()) {
        std::ostringstream s;
        bool header = true;
        for (const auto& log : sample_event_logs(lb.bench, cfg, event_trials)) {
            write_event_log_csv(s, log, header);
            header = false;
        }
        write_text_file(event_log, s.str());
    }

    std::uint64_t kept = 0, total = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        kept += data.trials_kept[i];
        total += data.trials_total[i];
    }
    out << fmt::format("mode={} trials_per_phi={} phi_steps={} seed={}\n", to_string(cfg.mode), cfg.trials_per_phi,
                       cfg.phi_grid.size(), cfg.seed);
    out << fmt::format("kept {} of {} trials ({:.4f})\n", kept, total,
                       total ? static_cast<double>(kept) / static_cast<double>(total) : 0.0);
    print_sparklines(out, data);
    out << fmt::format("wrote {}\nwrote {}\n", (dir / "fringe.csv").string(), (dir / "manifest.txt").string());
    return kExitOk;
}

struct PairReport {
    std::string label;
    std::optional<FitResult> fit;
};

void print_fit(std::ostream& out, std::string_view label, const FitResult& fit, double bound) {
    const double f = fidelity_from_visibility(fit.visibility);
    out << fmt::format("{:<16} V = {}  phi0 = {}{}  F = {}  {}\n", label, pm(fit.visibility, fit.visibility_err),
                       pm(fit.phase_offset, fit.phase_err), fit.phase_constrained ? "" : " (unconstrained)",
                       pm(f, error_propagation(fit)),
                       classical_bound_check(f, bound) ? "above classical bound" : "NOT above classical bound");
}

void print_fit_keys(std::ostream& out, std::string_view label, const FitResult& fit, double bound) {
    const double f = fidelity_from_visibility(fit.visibility);
    out << fmt::format("{}.V={}\n{}.V_err={}\n{}.V_unclamped={}\n", label, fit.visibility, label, fit.visibility_err,
                       label, fit.visibility_unclamped);
    out << fmt::format("{}.phi0={}\n{}.phi0_err={}\n{}.phi0_constrained={}\n", label, fit.phase_offset, label,
                       fit.phase_err, label, fit.phase_constrained);
    out << fmt::format("{}.F={}\n{}.F_err={}\n{}.chi2={}\n{}.dof={}\n{}.p_value={}\n", label, f, label,
                       error_propagation(fit), label, fit.chi2, label, fit.dof, label, fit.p_value);
    out << fmt::format("{}.above_classical_bound={}\n", label, classical_bound_check(f, bound));
}

int cmd_analyze(const std::string& csv, double bound, std::ostream& out) {
    const FringeData data = read_csv_file(csv);
    std::vector<PairReport> reports;
    for (auto p : kAllPairs) {
        PairReport r{std::string(to_string(p)), std::nullopt};
        try {
            r.fit = fit_fringe(series(data, p));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::FitUnderdetermined) throw;
        }
        reports.push_back(std::move(r));
    }
    out << fmt::format("{} phase points, classical bound {:.4f}\n", data.size(), bound);
    for (const auto& r : reports) {
        if (r.fit) {
            print_fit(out, r.label, *r.fit, bound);
        } else {
            out << fmt::format("{:<16} no fringe (fit underdetermined)\n", r.label);
        }
    }
    print_sparklines(out, data);
    out << "\n";
    out << fmt::format("classical_bound={}\n", bound);
    for (const auto& r : reports) {
        if (r.fit) {
            print_fit_keys(out, r.label, *r.fit, bound);
        } else {
            out << r.label << ".fit=underdetermined\n";
        }
    }
    return kExitOk;
}

void print_comparison(std::ostream& out, std::string_view label, const FringeComparison& c) {
    out << fmt::format("{}: dphi0 = {}  dV = {}{}{}\n", label, pm(c.delta_phase, c.delta_phase_err),
                       pm(c.delta_visibility, c.delta_visibility_err), c.in_phase ? "  [in phase]" : "",
                       c.pi_offset ? "  [pi offset]" : "");
}

void print_comparison_keys(std::ostream& out, std::string_view label, const FringeComparison& c) {
    out << fmt::format("{}.delta_phi0={}\n{}.delta_phi0_err={}\n", label, c.delta_phase, label, c.delta_phase_err);
    out << fmt::format("{}.delta_V={}\n{}.delta_V_err={}\n", label, c.delta_visibility, label, c.delta_visibility_err);
    out << fmt::format("{}.in_phase={}\n{}.pi_offset={}\n", label, c.in_phase, label, c.pi_offset);
}

int cmd_compare(const std::string& a_path, const std::string& b_path, const std::string& pair_a,
                const std::string& pair_b, double tolerance, std::ostream& out) {
    const FringeData a = read_csv_file(a_path);
    const FringeData b = read_csv_file(b_path);
    try {
        require_aligned(a, b);
    } catch (const Error& e) {
        throw Exit{kExitInput, e.what()};
    }
    const CoincidencePair pa = parse_pair(pair_a);
    const CoincidencePair pb = parse_pair(pair_b);
    const FitResult fa = fit_fringe(series(a, pa));
    const FitResult fb = fit_fringe(series(b, pb));
    const FringeComparison c = compare_fits(fa, fb, tolerance);

    print_fit(out, fmt::format("A {}", pair_a), fa, kClassicalFidelityBound);
    print_fit(out, fmt::format("B {}", pair_b), fb, kClassicalFidelityBound);
    print_comparison(out, "A - B", c);
    out << "\n";
    out << fmt::format("tolerance={}\n", tolerance);
    print_comparison_keys(out, "compare", c);
    return kExitOk;
}

int cmd_validate(const std::string& path, std::ostream& out, std::ostream& err) {
    const ParseResult r = path == "builtin" ? ParseResult{builtin_figure1(), validate(builtin_figure1())}
                                            : load_bench_file(path);
    for (const auto& d : r.diagnostics) err << path << ":" << format(d) << "\n";
    if (!r.ok()) return kExitInput;
    const Bench& b = *r.bench;
    out << fmt::format("{}: ok ({} paths, {} modes, {} sources, {} elements, {} detectors, {} warnings)\n", path,
                       b.paths.size(), b.modes.size(), b.sources.size(), b.pipeline.size(), b.detectors.size(),
                       r.diagnostics.size());
    return kExitOk;
}

int cmd_reproduce(const Manifest& flags, const std::string& out_dir, std::ostream& out, std::ostream& err) {
    Manifest m = paper_defaults();
    for (const auto& [k, v] : flags) m[k] = v;
    const LoadedBench lb = load_bench(m.at("bench"), err);

    struct Run {
        RunMode mode;
        FringeData data;
    };
    std::vector<Run> runs;
    for (RunMode mode : {RunMode::Passive, RunMode::ActiveInhibited, RunMode::Active}) {
        const RunConfig cfg = config_from(m, mode);
        runs.push_back({mode, run_sweep(lb.bench, cfg)});
        if (!out_dir.empty()) {
            Manifest written = m;
            written["mode"] = std::string(to_string(mode));
            written["bench_hash"] = fmt::format("{:016x}", lb.hash);
            std::ostringstream text;
            write_manifest(text, written);
            const fs::path dir = fs::path(out_dir) / to_string(mode);
            write_text_file(dir / "fringe.csv", fringe_csv(runs.back().data));
            write_text_file(dir / "manifest.txt", text.str());
        }
    }
    const FringeData& passive = runs[0].data;
    const FringeData& inhibited = runs[1].data;
    const FringeData& active = runs[2].data;

    using P = CoincidencePair;
    const P passive_pairs[] = {P::D1_D2s, P::D2_D1s};
    const P active_pairs[] = {P::D1_D2s, P::D2_D2s};
    const FitResult passive_d1 = fit_fringe(series(passive, P::D1_D2s));
    const FitResult passive_all = fit_fringe(combined_series(passive, passive_pairs));
    const FitResult inhibited_d2 = fit_fringe(series(inhibited, P::D2_D2s));
    const FitResult active_d1 = fit_fringe(series(active, P::D1_D2s));
    const FitResult active_d2 = fit_fringe(series(active, P::D2_D2s));
    const FitResult active_all = fit_fringe(combined_series(active, active_pairs));

    constexpr double tol = 0.05;
    const FringeComparison c_active = compare_fits(active_d2, passive_d1, tol);
    const FringeComparison c_inhibited = compare_fits(inhibited_d2, passive_d1, tol);

    out << fmt::format("trials/phi={} phi_steps={} seed={} qe={} sigma_baseline={:.4f} sigma_delay={:.4f}\n\n",
                       m.at("trials"), m.at("phi_steps"), m.at("seed"), m.at("qe"),
                       parse_value<double>(m, "baseline_sigma"), parse_value<double>(m, "dephasing_sigma"));
    out << "passive (no delay line, no feed-forward)\n";
    print_sparklines(out, passive);
    out << "active, Pockels cell inhibited (sigma_z|in> on D2)\n";
    print_sparklines(out, inhibited);
    out << "active, feed-forward on (D2 events corrected)\n";
    print_sparklines(out, active);
    out << "\n";

    print_fit(out, "passive D1-D2*", passive_d1, kClassicalFidelityBound);
    print_fit(out, "passive pooled", passive_all, kClassicalFidelityBound);
    print_fit(out, "inhibited D2-D2*", inhibited_d2, kClassicalFidelityBound);
    print_fit(out, "active D1-D2*", active_d1, kClassicalFidelityBound);
    print_fit(out, "active D2-D2*", active_d2, kClassicalFidelityBound);
    print_fit(out, "active pooled", active_all, kClassicalFidelityBound);
    out << "\n";
    print_comparison(out, "active D2-D2* vs passive D1-D2*", c_active);
    print_comparison(out, "inhibited D2-D2* vs passive D1-D2*", c_inhibited);
    out << "\n";

    const double f_passive = fidelity_from_visibility(passive_all.visibility);
    const double f_active = fidelity_from_visibility(active_all.visibility);
    out << fmt::format("F   (passive) = {:.1f} +/- {:.1f} %\n", 100 * f_passive, 100 * error_propagation(passive_all));
    out << fmt::format("F_a (active)  = {:.1f} +/- {:.1f} %\n", 100 * f_active, 100 * error_propagation(active_all));
    out << fmt::format("classical bound {:.1f} %: passive {}, active {}\n\n", 100 * kClassicalFidelityBound,
                       classical_bound_check(f_passive) ? "above" : "not above",
                       classical_bound_check(f_active) ? "above" : "not above");

    out << fmt::format("F_passive={}\nF_passive_err={}\n", f_passive, error_propagation(passive_all));
    out << fmt::format("F_active={}\nF_active_err={}\n", f_active, error_propagation(active_all));
    print_comparison_keys(out, "active_vs_passive", c_active);
    print_comparison_keys(out, "inhibited_vs_passive", c_inhibited);
    return kExitOk;
}

}  // namespace

std::string sparkline(const std::vector<double>& values) {
    static constexpr std::string_view kBars[] = {" ", "▁", "▂", "▃", "▄", "▅", "▆", "▇", "█"};
    const double top = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
    std::string s;
    for (double v : values) {
        const int level = top > 0.0 ? static_cast<int>(std::lround(8.0 * std::max(v, 0.0) / top)) : 0;
        s += kBars[std::clamp(level, 0, 8)];
    }
    return s;
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Manifest read_manifest(std::istream& in) {
    Manifest m;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        CLI::detail::trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw Error(ErrorCode::BadInput, fmt::format("manifest line {}: expected key=value", line_no));
        }
        m[CLI::detail::trim_copy(line.substr(0, eq))] = CLI::detail::trim_copy(line.substr(eq + 1));
    }
    return m;
}

void write_manifest(std::ostream& out, const Manifest& m) {
    for (const auto& [k, v] : m) out << k << '=' << v << '\n';
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Monte Carlo and exact simulation of vacuum/one-photon teleportation with feed-forward", "telesim"};
    app.require_subcommand(1);

    Manifest run_flags, paper_flags;
    std::string manifest_path, out_dir = ".", event_log;
    std::size_t event_trials = 10;
    auto* run = app.add_subcommand("run", "sweep the phase knob and write fringe.csv + manifest.txt");
    add_config_flags(run, run_defaults(), run_flags, true);
    run->add_option("--manifest", manifest_path, "rerun from a manifest; explicit flags still override");
    run->add_option("--out", out_dir, "output directory")->capture_default_str();
    run->add_option("--event-log", event_log, "write timing event logs (CSV) of the first trials");
    run->add_option("--event-log-trials", event_trials, "trials to log")->capture_default_str();

    std::string analyze_csv;
    double bound = kClassicalFidelityBound;
    auto* analyze = app.add_subcommand("analyze", "fit fringes of a fringe CSV");
    analyze->add_option("csv", analyze_csv, "fringe CSV")->required();
    analyze->add_option("--classical-bound", bound, "fidelity bound for the verdict")->capture_default_str();

    std::string csv_a, csv_b, pair_a = "D1-D2*", pair_b = "D1-D2*";
    double tolerance = 0.05;
    auto* compare = app.add_subcommand("compare", "phase offset and visibility difference of two runs");
    compare->add_option("run_a", csv_a, "fringe CSV A")->required();
    compare->add_option("run_b", csv_b, "fringe CSV B")->required();
    const std::vector<std::string> pair_names = {"D1-D1*", "D1-D2*", "D2-D1*", "D2-D2*"};
    compare->add_option("--pair-a", pair_a, "pair fitted in A")->check(CLI::IsMember(pair_names))->capture_default_str();
    compare->add_option("--pair-b", pair_b, "pair fitted in B")->check(CLI::IsMember(pair_names))->capture_default_str();
    compare->add_option("--tolerance", tolerance, "phase tolerance (rad)")->capture_default_str();

    std::string bench_path;
    auto* validate_cmd = app.add_subcommand("validate-bench", "parse and check a bench file");
    validate_cmd->add_option("bench", bench_path, "bench file, or 'builtin'")->required();

    std::string paper_out;
    auto* paper = app.add_subcommand("reproduce-paper", "passive, inhibited and active sweeps with fitted fidelities");
    add_config_flags(paper, paper_defaults(), paper_flags, false);
    paper->add_option("--out", paper_out, "also write each run's CSV and manifest under this directory");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(std::move(reversed));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*run) return cmd_run(run_flags, manifest_path, out_dir, event_log, event_trials, out, err);
        if (*analyze) return cmd_analyze(analyze_csv, bound, out);
        if (*compare) {
            if (!(tolerance > 0.0)) throw Error(ErrorCode::BadParam, "--tolerance must be positive");
            return cmd_compare(csv_a, csv_b, pair_a, pair_b, tolerance, out);
        }
        if (*validate_cmd) return cmd_validate(bench_path, out, err);
        if (*paper) return cmd_reproduce(paper_flags, paper_out, out, err);
    } catch (const Exit& e) {
        if (!e.message.empty()) err << "error: " << e.message << "\n";
        return e.code;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}

}  // namespace telesim::cli
