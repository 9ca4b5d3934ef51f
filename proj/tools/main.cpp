#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "dfstomo/analysis.hpp"
#include "dfstomo/errors.hpp"
#include "dfstomo/io.hpp"
#include "dfstomo/scenarios.hpp"
#include "dfstomo/sim.hpp"
#include "dfstomo/states.hpp"
#include "dfstomo/tomography.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace dfstomo;

namespace {

constexpr const char* ACQ_FILE = "acquisition.jsonl";
constexpr const char* VAC_FILE = "vacuum.jsonl";
constexpr const char* TRUTH_FILE = "truth.json";
constexpr const char* GRID_FILE = "wigner.txt";
constexpr const char* PROFILE_FILE = "profile.txt";
constexpr const char* DIAG_FILE = "diagonals.txt";

struct SimulateOpts {
    std::string config;
    std::string scenario;
    std::string state_text;
    std::size_t n_samples = 200000;
    std::size_t vacuum_samples = 100000;
    double theta_start = 0.0;
    double theta_step = std::nan(""); // nan = scenario/default choice
    double raw_scale = 1.0;
    double electronic_noise = 0.0;
    std::uint64_t seed = 1;
    std::string out;
};

struct ReconstructOpts {
    std::string config;
    std::string in;
    std::string out;
    double kc = 6.4;
    std::string grid = "-4:4:0.125";
    int n_max = 10;
    int bootstrap_reps = 200;
    std::uint64_t seed = 1;
    int threads = 1;
};

struct AnalyzeOpts {
    std::string config;
    std::string in;
    std::string out;
    int bootstrap_reps = 200;
    std::uint64_t seed = 1;
};

struct CompareOpts {
    std::string config;
    std::string in;
    std::string state_text;
    std::string ref;
    std::string out;
};

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path.string());
    os << j.dump(2) << '\n';
    if (!os) throw IoError("write failed: " + path.string());
}

// Flat key=value config files; '#' starts a comment.  Explicit command-line
// flags win over config entries; unknown keys are rejected.
using ConfigHandlers = std::map<std::string, std::function<void(const std::string&)>>;

std::string trim(std::string s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
    return s;
}

double cfg_real(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config value for '" + key + "' is not a number: " + v);
    }
}

std::uint64_t cfg_uint(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const unsigned long long u = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return u;
    } catch (const std::exception&) {
        throw ConfigError("config value for '" + key + "' is not a count: " + v);
    }
}

void apply_config(CLI::App* cmd, const std::string& cfg_path, const ConfigHandlers& keys) {
    if (cfg_path.empty()) return;
    std::ifstream is(cfg_path, std::ios::binary);
    if (!is) throw IoError("cannot open config file: " + cfg_path);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + " is not key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = keys.find(key);
        if (it == keys.end()) throw ConfigError("unknown config key: " + key);
        if (cmd->count("--" + key) == 0) it->second(value);
    }
}

std::string state_label_for(const fs::path& dir) {
    const fs::path truth = dir / TRUTH_FILE;
    if (fs::exists(truth)) return read_truth_sidecar(truth).config.state.format();
    return "unknown";
}

void run_simulate(const SimulateOpts& o) {
    if (o.out.empty()) throw ConfigError("simulate needs --out");
    if (o.scenario.empty() == o.state_text.empty())
        throw ConfigError("give exactly one of --scenario or --state");

    AcquisitionConfig cfg;
    if (!o.scenario.empty()) {
        const auto sc = find_scenario(o.scenario);
        if (!sc) throw ConfigError("unknown scenario: " + o.scenario);
        cfg.state = sc->state;
        cfg.theta_step = sc->theta_step;
    } else {
        cfg.state = StateModel::parse(o.state_text);
        cfg.theta_step = cfg.state.phase_symmetric() ? 0.0 : 2.0 * std::numbers::pi / 4000.0;
    }
    if (!std::isnan(o.theta_step)) cfg.theta_step = o.theta_step;
    cfg.n_samples = o.n_samples;
    cfg.theta_start = o.theta_start;
    cfg.raw_scale = o.raw_scale;
    cfg.electronic_noise = o.electronic_noise;
    cfg.seed = o.seed;
    cfg.validate();

    std::error_code ec;
    fs::create_directories(o.out, ec);
    if (ec) throw IoError("cannot create output directory " + o.out + ": " + ec.message());

    const AcquisitionRun run = run_acquisition(cfg);
    AcquisitionConfig vac_cfg = cfg;
    vac_cfg.n_samples = o.vacuum_samples;
    const auto vacuum = vacuum_calibration_run(vac_cfg);

    const fs::path dir(o.out);
    write_records_jsonl(dir / ACQ_FILE, run.records, "acquisition");
    write_records_jsonl(dir / VAC_FILE, vacuum, "vacuum");
    write_truth_sidecar(dir / TRUTH_FILE, run.truth);

    std::cout << "state: " << cfg.state.format() << "\n"
              << "acquisition records: " << run.records.size() << "\n"
              << "vacuum records: " << vacuum.size() << "\n";
}

void run_reconstruct(const ReconstructOpts& o) {
    if (o.in.empty()) throw ConfigError("reconstruct needs --in");
    const fs::path in(o.in);
    const fs::path out = o.out.empty() ? in : fs::path(o.out);
    std::error_code ec;
    fs::create_directories(out, ec);

    const auto records = read_records_jsonl(in / ACQ_FILE);
    if (!fs::exists(in / VAC_FILE))
        throw CalibrationError("vacuum record file missing: " + (in / VAC_FILE).string());
    const auto vacuum = read_records_jsonl(in / VAC_FILE);
    const auto scaled = scale_to_vacuum(records, vacuum);
    const std::string label = state_label_for(in);

    bool fbp = true;
    CalibratedSamples cal;
    try {
        cal = assign_phases(scaled);
    } catch (const PhaseIndeterminateError&) {
        fbp = false;
    }

    std::vector<DiagonalEstimate> diag;
    if (fbp) {
        const GridSpec axis = GridSpec::parse(o.grid);
        WignerGrid grid = reconstruct_wigner_fbp(cal, axis, axis, o.kc, o.threads);
        grid.state_label = label;
        write_wigner_grid(out / GRID_FILE, grid);
        fs::remove(out / PROFILE_FILE, ec);
        diag = estimate_diagonals(cal, o.n_max, o.bootstrap_reps, o.seed);
        std::cout << "phase ramp detected: wrote " << (out / GRID_FILE).string() << "\n";
    } else {
        RadialProfile prof = reconstruct_wigner_abel(scaled);
        prof.state_label = label;
        write_radial_profile(out / PROFILE_FILE, prof);
        fs::remove(out / GRID_FILE, ec);
        diag = estimate_diagonals(std::span<const double>(scaled), o.n_max, o.bootstrap_reps,
                                  o.seed);
        std::cout << "phase-averaged data: wrote " << (out / PROFILE_FILE).string() << "\n";
    }
    write_diagonals(out / DIAG_FILE, diag);
    std::cout << "diagonals: " << (out / DIAG_FILE).string() << "\n";
}

void run_analyze(const AnalyzeOpts& o) {
    if (o.in.empty()) throw ConfigError("analyze needs --in");
    const fs::path in(o.in);
    const fs::path out_path = o.out.empty() ? in / "report.json" : fs::path(o.out);

    const bool has_grid = fs::exists(in / GRID_FILE);
    const bool has_profile = fs::exists(in / PROFILE_FILE);
    if (!has_grid && !has_profile)
        throw IoError("no reconstruction output in " + in.string() + "; run reconstruct first");
    if (!fs::exists(in / DIAG_FILE))
        throw IoError("missing " + (in / DIAG_FILE).string() + "; run reconstruct first");

    const auto records = read_records_jsonl(in / ACQ_FILE);
    if (!fs::exists(in / VAC_FILE))
        throw CalibrationError("vacuum record file missing: " + (in / VAC_FILE).string());
    const auto vacuum = read_records_jsonl(in / VAC_FILE);
    const auto scaled = scale_to_vacuum(records, vacuum);

    json report;
    report["n_samples"] = records.size();

    const PhaseFit ramp = fit_phase_ramp(scaled);
    report["phase_locked"] = ramp.determinate;

    CalibratedSamples cal;
    if (ramp.determinate) {
        cal = assign_phases(scaled);
        const AlphaFit af = fit_alpha(cal);
        const EtaFit ef =
            fit_eta(cal, af.alpha_abs, af.alpha_phase, o.bootstrap_reps, o.seed);
        report["alpha_abs"] = af.alpha_abs;
        report["stderr_alpha_abs"] = af.alpha_abs_stderr;
        report["alpha_phase_rad"] = af.alpha_phase;
        report["stderr_alpha_phase_rad"] = af.alpha_phase_stderr;
        report["eta"] = ef.eta;
        report["stderr_eta"] = ef.std_error;
    } else {
        // no recoverable phase: report the ramp-scan amplitude against the
        // null scale of a scanned maximum
        const double null_scale =
            ramp.amplitude_stderr * std::sqrt(2.0 * std::log(std::max(2.0, ramp.scan_bins)));
        report["alpha_abs"] = ramp.amplitude / std::numbers::sqrt2;
        report["stderr_alpha_abs"] = null_scale / std::numbers::sqrt2;
        report["alpha_phase_rad"] = nullptr;
        report["stderr_alpha_phase_rad"] = nullptr;
        CalibratedSamples flat;
        flat.x = scaled;
        flat.theta.assign(scaled.size(), 0.0);
        const EtaFit ef = fit_eta(flat, 0.0, 0.0, o.bootstrap_reps, o.seed);
        report["eta"] = ef.eta;
        report["stderr_eta"] = ef.std_error;
    }

    NegativityReport neg;
    if (has_grid) {
        const WignerGrid grid = read_wigner_grid(in / GRID_FILE);
        if (!ramp.determinate)
            throw PhaseCoverageError("grid present but phases are indeterminate");
        // search where the fit says the state sits
        const double a_abs = report.at("alpha_abs").get<double>();
        const double a_ph = report.at("alpha_phase_rad").get<double>();
        const NegativityCenter center{std::numbers::sqrt2 * a_abs * std::cos(a_ph),
                                      std::numbers::sqrt2 * a_abs * std::sin(a_ph), 0.5};
        neg = negativity_report(grid, cal, std::max(100, o.bootstrap_reps), o.seed, center);
        report["method"] = "fbp";
        report["kc"] = grid.k_c;
    } else {
        const RadialProfile prof = read_radial_profile(in / PROFILE_FILE);
        neg = negativity_report_radial(prof, scaled, std::max(100, o.bootstrap_reps), o.seed);
        report["method"] = "abel";
    }
    report["min_w"] = neg.min_value;
    report["loc_x"] = neg.loc_x;
    report["loc_p"] = neg.loc_p;
    report["z"] = neg.z;
    report["negativity_significant"] = neg.significant;

    const auto diag = read_diagonals(in / DIAG_FILE);
    const PeakReport peaks = peak_report(diag);
    report["peaks"] = peaks.peaks;
    report["dips"] = peaks.dips;
    json djson = json::array();
    for (const auto& d : diag)
        djson.push_back({{"n", d.n}, {"rho", d.rho}, {"stderr", d.std_error}});
    report["diagonals"] = djson;

    write_json_file(out_path, report);
    std::cout << report.dump(2) << "\n";
}

void run_compare(const CompareOpts& o) {
    if (o.in.empty()) throw ConfigError("compare needs --in");
    const fs::path in(o.in);

    json out;
    if (!o.ref.empty()) {
        const WignerGrid a = read_wigner_grid(in / GRID_FILE);
        const WignerGrid b = read_wigner_grid(o.ref);
        if (!(a.x_axis == b.x_axis) || !(a.p_axis == b.p_axis))
            throw ConfigError("grid mismatch between " + (in / GRID_FILE).string() + " and " +
                              o.ref);
        double max_abs = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < a.values.size(); ++i) {
            const double d = a.values[i] - b.values[i];
            max_abs = std::max(max_abs, std::abs(d));
            ss += d * d;
        }
        out["grid"] = {{"max_abs_diff", max_abs},
                       {"rms_diff", std::sqrt(ss / static_cast<double>(a.values.size()))}};
        write_json_file(o.out.empty() ? in / "compare.json" : fs::path(o.out), out);
        std::cout << out.dump(2) << "\n";
        return;
    }

    StateModel state = StateModel::vacuum();
    if (!o.state_text.empty()) {
        state = StateModel::parse(o.state_text);
    } else {
        const fs::path truth = in / TRUTH_FILE;
        if (!fs::exists(truth))
            throw ConfigError("compare needs --state, --ref, or a truth sidecar");
        state = read_truth_sidecar(truth).config.state;
    }
    out["state"] = state.format();

    if (fs::exists(in / GRID_FILE)) {
        const WignerGrid g = read_wigner_grid(in / GRID_FILE);
        double max_abs = 0.0, ss = 0.0;
        const int nx = g.x_axis.count(), np = g.p_axis.count();
        for (int ip = 0; ip < np; ++ip)
            for (int ix = 0; ix < nx; ++ix) {
                const double w =
                    wigner_analytic(state, g.x_axis.coord(ix), g.p_axis.coord(ip));
                const double d = g.at(ip, ix) - w;
                max_abs = std::max(max_abs, std::abs(d));
                ss += d * d;
            }
        out["grid"] = {{"max_abs_diff", max_abs},
                       {"rms_diff", std::sqrt(ss / static_cast<double>(g.values.size()))}};
    } else if (fs::exists(in / PROFILE_FILE)) {
        const RadialProfile prof = read_radial_profile(in / PROFILE_FILE);
        double max_abs = 0.0, ss = 0.0;
        for (std::size_t k = 0; k < prof.w.size(); ++k) {
            const double w = wigner_analytic(state, prof.r(static_cast<int>(k)), 0.0);
            const double d = prof.w[k] - w;
            max_abs = std::max(max_abs, std::abs(d));
            ss += d * d;
        }
        out["profile"] = {{"max_abs_diff", max_abs},
                          {"rms_diff", std::sqrt(ss / static_cast<double>(prof.w.size()))}};
    }

    if (fs::exists(in / DIAG_FILE)) {
        const auto diag = read_diagonals(in / DIAG_FILE);
        const auto theory = photon_statistics(state, diag.back().n);
        double chi2 = 0.0, max_sigma = 0.0;
        for (const auto& d : diag) {
            const double delta = d.rho - theory[static_cast<std::size_t>(d.n)];
            if (d.std_error > 0.0) {
                const double s = delta / d.std_error;
                chi2 += s * s;
                max_sigma = std::max(max_sigma, std::abs(s));
            }
        }
        out["diagonals"] = {{"chi2", chi2},
                            {"n", diag.size()},
                            {"max_abs_sigma", max_sigma},
                            {"within_4_stderr", max_sigma <= 4.0}};
    }

    write_json_file(o.out.empty() ? in / "compare.json" : fs::path(o.out), out);
    std::cout << out.dump(2) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"homodyne tomography of displaced Fock states"};
    app.require_subcommand(1);

    SimulateOpts sim;
    auto* c_sim = app.add_subcommand("simulate", "generate a synthetic acquisition run");
    c_sim->add_option("--config", sim.config, "flat key=value config file");
    c_sim->add_option("--scenario", sim.scenario, "named scenario (fig3a..fig3d, fig4_a1.3, fig4_a2.4)");
    c_sim->add_option("--state", sim.state_text, "explicit state text, e.g. 'displaced_mix alpha=0.6+0i eta=0.62'");
    c_sim->add_option("--n-samples", sim.n_samples, "acquisition record count");
    c_sim->add_option("--vacuum-samples", sim.vacuum_samples, "vacuum calibration record count");
    c_sim->add_option("--theta-start", sim.theta_start, "ramp start phase, rad");
    c_sim->add_option("--theta-step", sim.theta_step, "ramp step, rad/sample (0 = free-running)");
    c_sim->add_option("--raw-scale", sim.raw_scale, "volts per quadrature unit");
    c_sim->add_option("--electronic-noise", sim.electronic_noise, "detector noise std-dev, quadrature units");
    c_sim->add_option("--seed", sim.seed, "RNG seed");
    c_sim->add_option("--out", sim.out, "output directory");
    c_sim->callback([&] {
        apply_config(c_sim, sim.config,
                     {{"scenario", [&](const std::string& v) { sim.scenario = v; }},
                      {"state", [&](const std::string& v) { sim.state_text = v; }},
                      {"n-samples", [&](const std::string& v) { sim.n_samples = cfg_uint("n-samples", v); }},
                      {"vacuum-samples", [&](const std::string& v) { sim.vacuum_samples = cfg_uint("vacuum-samples", v); }},
                      {"theta-start", [&](const std::string& v) { sim.theta_start = cfg_real("theta-start", v); }},
                      {"theta-step", [&](const std::string& v) { sim.theta_step = cfg_real("theta-step", v); }},
                      {"raw-scale", [&](const std::string& v) { sim.raw_scale = cfg_real("raw-scale", v); }},
                      {"electronic-noise", [&](const std::string& v) { sim.electronic_noise = cfg_real("electronic-noise", v); }},
                      {"seed", [&](const std::string& v) { sim.seed = cfg_uint("seed", v); }},
                      {"out", [&](const std::string& v) { sim.out = v; }}});
        run_simulate(sim);
    });

    ReconstructOpts rec;
    auto* c_rec = app.add_subcommand("reconstruct", "calibrate records and reconstruct the state");
    c_rec->add_option("--config", rec.config, "flat key=value config file");
    c_rec->add_option("--in", rec.in, "directory with acquisition.jsonl and vacuum.jsonl");
    c_rec->add_option("--out", rec.out, "output directory (default: --in)");
    c_rec->add_option("--kc", rec.kc, "filter cutoff frequency");
    c_rec->add_option("--grid", rec.grid, "grid spec min:max:step for both axes");
    c_rec->add_option("--n-max", rec.n_max, "highest diagonal photon number");
    c_rec->add_option("--bootstrap-reps", rec.bootstrap_reps, "bootstrap resamples for stderr");
    c_rec->add_option("--seed", rec.seed, "bootstrap RNG seed");
    c_rec->add_option("--threads", rec.threads, "worker count cap");
    c_rec->callback([&] {
        apply_config(c_rec, rec.config,
                     {{"in", [&](const std::string& v) { rec.in = v; }},
                      {"out", [&](const std::string& v) { rec.out = v; }},
                      {"kc", [&](const std::string& v) { rec.kc = cfg_real("kc", v); }},
                      {"grid", [&](const std::string& v) { rec.grid = v; }},
                      {"n-max", [&](const std::string& v) { rec.n_max = static_cast<int>(cfg_uint("n-max", v)); }},
                      {"bootstrap-reps", [&](const std::string& v) { rec.bootstrap_reps = static_cast<int>(cfg_uint("bootstrap-reps", v)); }},
                      {"seed", [&](const std::string& v) { rec.seed = cfg_uint("seed", v); }},
                      {"threads", [&](const std::string& v) { rec.threads = static_cast<int>(cfg_uint("threads", v)); }}});
        run_reconstruct(rec);
    });

    AnalyzeOpts ana;
    auto* c_ana = app.add_subcommand("analyze", "fit parameters and report nonclassicality");
    c_ana->add_option("--config", ana.config, "flat key=value config file");
    c_ana->add_option("--in", ana.in, "directory with records and reconstruction outputs");
    c_ana->add_option("--out", ana.out, "report path (default: <in>/report.json)");
    c_ana->add_option("--bootstrap-reps", ana.bootstrap_reps, "bootstrap resamples");
    c_ana->add_option("--seed", ana.seed, "bootstrap RNG seed");
    c_ana->callback([&] {
        apply_config(c_ana, ana.config,
                     {{"in", [&](const std::string& v) { ana.in = v; }},
                      {"out", [&](const std::string& v) { ana.out = v; }},
                      {"bootstrap-reps", [&](const std::string& v) { ana.bootstrap_reps = static_cast<int>(cfg_uint("bootstrap-reps", v)); }},
                      {"seed", [&](const std::string& v) { ana.seed = cfg_uint("seed", v); }}});
        run_analyze(ana);
    });

    CompareOpts cmp;
    auto* c_cmp = app.add_subcommand("compare", "error metrics against the analytic state or a reference grid");
    c_cmp->add_option("--config", cmp.config, "flat key=value config file");
    c_cmp->add_option("--in", cmp.in, "directory with reconstruction outputs");
    c_cmp->add_option("--state", cmp.state_text, "state model text (default: truth sidecar)");
    c_cmp->add_option("--ref", cmp.ref, "reference grid file to diff against");
    c_cmp->add_option("--out", cmp.out, "metrics path (default: <in>/compare.json)");
    c_cmp->callback([&] {
        apply_config(c_cmp, cmp.config,
                     {{"in", [&](const std::string& v) { cmp.in = v; }},
                      {"state", [&](const std::string& v) { cmp.state_text = v; }},
                      {"ref", [&](const std::string& v) { cmp.ref = v; }},
                      {"out", [&](const std::string& v) { cmp.out = v; }}});
        run_compare(cmp);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const CalibrationError& e) {
        std::cerr << "calibration error: " << e.what() << "\n";
        return 4;
    } catch (const PhaseCoverageError& e) {
        std::cerr << "phase coverage error: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
