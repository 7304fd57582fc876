// membrane-works: command-line workbench for square-membrane resonator
// analysis — biaxial stress fitting, peak/ring-down estimation, Allan
// stability, and the cavity-electromechanical swap protocol simulator.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "memws/memws.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GlobalOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    unsigned jobs = 1;
    std::string format = "json";
    std::string verbosity = "info";
};

struct RunContext {
    memws::ToolkitConfig config;
    GlobalOptions opts;
    fs::path out;
    memws::RunManifest manifest;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

    bool chatty() const { return opts.verbosity != "quiet"; }

    fs::path out_file(const std::string& name) {
        manifest.outputs.push_back((out / name).string());
        return out / name;
    }
    void add_input(const std::string& path) {
        manifest.input_digests.emplace_back(path, memws::file_digest(path));
    }
    void warn(const std::string& msg) {
        manifest.warnings.push_back(msg);
        if (chatty()) std::cerr << "warning: " << msg << "\n";
    }
    void finish() {
        manifest.wall_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - started)
                               .count();
        const fs::path path = out / (manifest.subcommand + "_manifest.json");
        manifest.write(path.string());
        if (chatty()) std::cerr << "manifest: " << path.string() << "\n";
    }
};

RunContext make_context(const GlobalOptions& opts, const std::string& subcommand) {
    RunContext ctx;
    ctx.opts = opts;
    if (!opts.config_path.empty()) {
        ctx.config = memws::load_config(opts.config_path);
    } else {
        ctx.config.validate();
    }
    if (opts.seed) ctx.config.seed = *opts.seed;
    if (!opts.out_dir.empty()) ctx.config.output_directory = opts.out_dir;
    if (const char* env = std::getenv("MEMBRANE_WORKS_LOG"))
        ctx.opts.verbosity = env;
    else if (opts.verbosity == "info")
        ctx.opts.verbosity = ctx.config.verbosity;

    ctx.out = ctx.config.output_directory;
    fs::create_directories(ctx.out);
    ctx.manifest.subcommand = subcommand;
    ctx.manifest.seed = ctx.config.seed;
    ctx.manifest.config_digest = memws::fnv1a_hex(ctx.config.canonical_text());
    if (!opts.config_path.empty()) ctx.add_input(opts.config_path);
    for (const std::string& w : ctx.config.validate()) ctx.warn(w);
    return ctx;
}

void write_json(RunContext& ctx, const std::string& name, const json& j) {
    const fs::path path = ctx.out_file(name);
    std::ofstream out(path);
    if (!out) throw memws::validation_error("cannot write " + path.string());
    out << j.dump(2) << "\n";
    if (!ctx.chatty()) return;
    if (ctx.opts.format == "csv") {
        // flat key,value summary on stdout; nested values stay JSON-encoded
        for (const auto& [key, value] : j.items())
            std::cout << key << ',' << (value.is_string() ? value.get<std::string>() : value.dump())
                      << '\n';
    } else {
        std::cout << j.dump(2) << "\n";
    }
}

// ---- fit-stress ----

int cmd_fit_stress(const GlobalOptions& opts, const std::string& table_path) {
    RunContext ctx = make_context(opts, "fit-stress");
    if (fs::exists(table_path) && fs::file_size(table_path) == 0)
        throw memws::validation_error(table_path + ": no modes (empty file)");
    ctx.add_input(table_path);

    std::vector<memws::ModeRecord> modes = memws::read_mode_table_csv(table_path);
    if (modes.empty()) throw memws::validation_error(table_path + ": no modes");

    bool assigned = false;
    for (auto& m : modes)
        if (!m.index) assigned = true;
    if (assigned) {
        std::vector<double> freqs;
        for (const auto& m : modes) freqs.push_back(m.freq_hz);
        std::sort(freqs.begin(), freqs.end());
        auto res = memws::assign_indices(freqs, ctx.config.membrane,
                                         ctx.config.assign_cutoff_factor);
        for (const std::string& w : res.warnings) ctx.warn(w);
        modes = res.modes;
        memws::write_mode_table_csv(ctx.out_file("assigned_modes.csv").string(), modes);
    }

    const memws::StressFitResult fit = memws::fit_biaxial_stress(
        modes, ctx.config.membrane.side_length_m, ctx.config.membrane.density_kg_m3);
    const auto [dx, dy] = memws::stress_resolution(fit);

    memws::write_stress_curve_csv(ctx.out_file("stress_curve.csv").string(), modes, fit);
    json j;
    j["stress_x_pa"] = fit.stress_x_pa;
    j["stress_y_pa"] = fit.stress_y_pa;
    j["stress_x_stderr_pa"] = dx;
    j["stress_y_stderr_pa"] = dy;
    j["covariance_pa2"] = fit.covariance_pa2;
    j["r_squared"] = fit.r_squared;
    j["n_modes"] = modes.size();
    j["residuals_hz"] = fit.residuals_hz;
    write_json(ctx, "stress_fit.json", j);
    ctx.finish();
    return 0;
}

// ---- fit-peak ----

int cmd_fit_peak(const GlobalOptions& opts, const std::string& spectrum_path,
                 std::optional<std::pair<double, double>> window) {
    RunContext ctx = make_context(opts, "fit-peak");
    ctx.add_input(spectrum_path);
    const memws::Spectrum s = memws::read_spectrum_csv(spectrum_path);
    const memws::LorentzianFit fit = memws::fit_lorentzian(s, window);
    json j;
    j["center_hz"] = fit.center_hz;
    j["center_stderr_hz"] = fit.center_stderr;
    j["linewidth_hz"] = fit.linewidth_hz;
    j["linewidth_stderr_hz"] = fit.linewidth_stderr;
    j["amplitude"] = fit.amplitude;
    j["offset"] = fit.offset;
    j["q_factor"] = fit.quality_factor();
    j["residual_norm"] = fit.residual_norm;
    j["iterations"] = fit.iterations;
    write_json(ctx, "peak_fit.json", j);
    ctx.finish();
    return 0;
}

// ---- ringdown ----

int cmd_ringdown(const GlobalOptions& opts, const std::string& trace_path,
                 std::optional<double> linewidth_hz) {
    RunContext ctx = make_context(opts, "ringdown");
    ctx.add_input(trace_path);
    const memws::RingdownTrace trace = memws::read_ringdown_csv(trace_path);
    const memws::RingdownFit fit = memws::fit_ringdown(trace);
    json j;
    j["energy_decay_hz"] = fit.energy_decay_hz;
    j["energy_decay_stderr_hz"] = fit.energy_decay_stderr;
    j["initial_amplitude"] = fit.initial_amplitude;
    j["residual_norm"] = fit.residual_norm;
    if (linewidth_hz) {
        j["linewidth_hz"] = *linewidth_hz;
        j["pure_dephasing_hz"] =
            memws::decoherence_decomposition(*linewidth_hz, fit.energy_decay_hz);
    }
    write_json(ctx, "ringdown_fit.json", j);
    ctx.finish();
    return 0;
}

// ---- allan ----

int cmd_allan(const GlobalOptions& opts, const std::string& series_path,
              std::optional<double> interval_override) {
    RunContext ctx = make_context(opts, "allan");
    ctx.add_input(series_path);
    const memws::FrequencySeries series =
        memws::read_freq_series_csv(series_path, interval_override);
    const memws::AllanCurve curve =
        memws::allan_curve(series, memws::default_tau_grid(series));
    for (const std::string& w : curve.warnings) ctx.warn(w);
    memws::write_allan_curve_csv(ctx.out_file("allan_curve.csv").string(), curve);

    json j;
    j["n_points"] = curve.points.size();
    try {
        const memws::NoiseModelFit noise = memws::fit_noise_model(curve);
        j["amplitude"] = noise.amplitude;
        j["amplitude_stderr"] = noise.amplitude_stderr;
        j["exponent"] = noise.exponent;
        j["exponent_stderr"] = noise.exponent_stderr;
        j["white_noise_consistent"] = noise.white_noise_consistent;
    } catch (const std::exception& e) {
        // Degenerate curves (e.g. a constant series) still produce the CSV.
        j["noise_fit_error"] = e.what();
        ctx.warn(std::string("noise-model fit failed: ") + e.what());
    }
    try {
        const memws::DriftResult drift = memws::drift_detect(series);
        j["drift_slope_hz_per_day"] = drift.slope_hz_per_day;
        j["drift_slope_stderr_hz_per_day"] = drift.slope_stderr_hz_per_day;
        j["ppm_span"] = drift.ppm_span;
    } catch (const std::exception& e) {
        ctx.warn(std::string("drift detection skipped: ") + e.what());
    }
    write_json(ctx, "allan_fit.json", j);
    ctx.finish();
    return 0;
}

// ---- simulate-swap ----

struct SwapOverrides {
    std::optional<double> swap_period_s;
    std::optional<double> mismatch_hz;
    std::optional<double> swap_duration_s;
    std::optional<std::string> convention;
    std::optional<std::string> budget;
    bool lossless = false;
};

memws::ProtocolSchedule apply_overrides(memws::ProtocolSchedule sched, const SwapOverrides& ov) {
    if (ov.swap_period_s) sched.swap_period_s = *ov.swap_period_s;
    if (ov.mismatch_hz) sched.swap_tone_mismatch_hz = *ov.mismatch_hz;
    if (ov.swap_duration_s) sched.swapping_duration_s = *ov.swap_duration_s;
    if (ov.convention) {
        if (*ov.convention == "exchange")
            sched.period_convention = memws::PeriodConvention::exchange;
        else if (*ov.convention == "occupancy")
            sched.period_convention = memws::PeriodConvention::occupancy;
        else
            throw memws::validation_error("--convention must be exchange|occupancy");
    }
    if (ov.budget) {
        if (*ov.budget == "none")
            sched.loss_budget = memws::SwapLossBudget::none;
        else if (*ov.budget == "resonant")
            sched.loss_budget = memws::SwapLossBudget::resonant;
        else if (*ov.budget == "full")
            sched.loss_budget = memws::SwapLossBudget::full;
        else
            throw memws::validation_error("--budget must be none|resonant|full");
    }
    if (ov.lossless) sched.loss_budget = memws::SwapLossBudget::none;
    return sched;
}

// Swap-only run used for the model-ambiguity confidence band: same swap
// physics, trivial surrounding phases, unit excitation injected directly.
double variant_efficiency(const memws::EMSystem& system, memws::ProtocolSchedule sched) {
    sched.cooling_duration_s = 1e-3;
    sched.excitation_duration_s = 1e-3;
    sched.readout_duration_s = 1e-3;
    sched.excitation_phonons = 0.0;
    memws::InitialState init;
    init.b1 = {1.0, 0.0};
    return memws::transfer_efficiency(memws::simulate(system, sched, init));
}

int cmd_simulate_swap(const GlobalOptions& opts, const SwapOverrides& ov) {
    RunContext ctx = make_context(opts, "simulate-swap");
    memws::EMSystem system = ctx.config.emsystem;
    if (ov.lossless) {
        system.mode1.energy_decay_hz = system.mode1.linewidth_hz = 1e-15;
        system.mode2.energy_decay_hz = system.mode2.linewidth_hz = 1e-15;
    }
    const memws::ProtocolSchedule sched = apply_overrides(ctx.config.protocol, ov);
    for (const std::string& w : sched.validate(system)) ctx.warn(w);

    const memws::SimTrace trace = memws::simulate(system, sched, memws::InitialState{});
    const memws::SwapMetrics metrics = memws::swap_metrics(trace);
    memws::write_sim_trace_csv(ctx.out_file("swap_trace.csv").string(), trace);

    // Model-ambiguity band: the period-convention reading of the configured
    // swap period and the residual-sideband loss budget are both documented
    // choices; the band spans the four combinations.
    std::vector<memws::ProtocolSchedule> variants;
    for (auto conv : {memws::PeriodConvention::exchange, memws::PeriodConvention::occupancy})
        for (auto budget : {memws::SwapLossBudget::resonant, memws::SwapLossBudget::full}) {
            memws::ProtocolSchedule v = sched;
            v.period_convention = conv;
            v.loss_budget = ov.lossless ? memws::SwapLossBudget::none : budget;
            variants.push_back(v);
        }
    std::vector<double> effs(variants.size());
    if (opts.jobs > 1) {
        std::vector<std::future<double>> futures;
        for (const auto& v : variants)
            futures.push_back(std::async(std::launch::async, variant_efficiency, system, v));
        for (std::size_t i = 0; i < futures.size(); ++i) effs[i] = futures[i].get();
    } else {
        for (std::size_t i = 0; i < variants.size(); ++i)
            effs[i] = variant_efficiency(system, variants[i]);
    }
    double lo = metrics.efficiency, hi = metrics.efficiency;
    for (double e : effs) {
        lo = std::min(lo, e);
        hi = std::max(hi, e);
    }

    const double j_hz = memws::effective_swap_coupling(system, sched);
    json j;
    j["efficiency"] = metrics.efficiency;
    j["confidence_low"] = lo;
    j["confidence_high"] = hi;
    j["first_exchange_time_s"] = metrics.first_exchange_time_s;
    j["start_occupation"] = metrics.start_occupation;
    j["peak_occupation"] = metrics.peak_occupation;
    j["j_hz"] = j_hz;
    j["occupancy_period_s"] = memws::swap_period_from_coupling(j_hz);
    j["convention"] =
        sched.period_convention == memws::PeriodConvention::exchange ? "exchange" : "occupancy";
    j["loss_budget"] = sched.loss_budget == memws::SwapLossBudget::none
                           ? "none"
                           : (sched.loss_budget == memws::SwapLossBudget::resonant ? "resonant"
                                                                                   : "full");
    write_json(ctx, "swap_efficiency.json", j);
    ctx.finish();
    return 0;
}

// ---- synth ----

struct SynthOptions {
    std::string kind;
    std::string output;
    // mode-table
    double cutoff_mhz = 2.556;
    std::size_t count = 0;
    double noise_hz = 0.0;
    bool drop_indices = false;
    // spectrum
    double center_khz = 871.93;
    double linewidth_millihz = 8.13;
    double amplitude = 1.0;
    double offset = 0.01;
    double span_linewidths = 20.0;
    std::size_t points = 2001;
    double noise_rel = 0.0;
    // ringdown
    double decay_millihz = 6.13;
    double a0 = 1.0;
    double duration_s = 400.0;
    double rate_hz = 2.0;
    double gate_period_s = 40.0;
    double duty = 0.5;
    // freq-series
    double f0_khz = 871.93;
    double interval_s = 5.0;
    std::size_t samples = 4096;
    double white_noise_hz = 0.0;
    double drift_hz_per_day = 0.0;
    double wander_ppm = 0.0;
    // mode-shape
    int shape_m = 3;
    int shape_n = 1;
    std::size_t resolution = 101;
    int shape_m2 = 0;
    int shape_n2 = 0;
    double shape_alpha = 1.0;
    double shape_beta = 1.0;
    int shape_sign = +1;
};

int cmd_synth(const GlobalOptions& opts, const SynthOptions& so) {
    RunContext ctx = make_context(opts, "synth");
    const std::uint64_t seed = ctx.config.seed;

    if (so.kind == "mode-table") {
        auto modes = memws::synth_mode_table(ctx.config.membrane, so.cutoff_mhz * 1e6, so.count,
                                             so.noise_hz, seed, !so.drop_indices);
        const std::string name = so.output.empty() ? "mode_table.csv" : so.output;
        memws::write_mode_table_csv(ctx.out_file(name).string(), modes);
        if (ctx.chatty()) std::cout << "wrote " << modes.size() << " modes\n";
    } else if (so.kind == "spectrum") {
        const double f0 = so.center_khz * 1e3;
        const double gamma = so.linewidth_millihz * 1e-3;
        const double span = so.span_linewidths * gamma;
        const double spacing = 2.0 * span / double(so.points - 1);
        const memws::Spectrum s =
            memws::synth_spectrum(f0, gamma, so.amplitude, so.offset, f0 - span, spacing,
                                  so.points, so.noise_rel, seed);
        const std::string name = so.output.empty() ? "spectrum.csv" : so.output;
        memws::write_spectrum_csv(ctx.out_file(name).string(), s);
    } else if (so.kind == "ringdown") {
        const memws::RingdownTrace t =
            memws::synth_ringdown(so.decay_millihz * 1e-3, so.a0, so.duration_s, so.rate_hz,
                                  so.gate_period_s, so.duty, so.noise_rel, seed);
        const std::string name = so.output.empty() ? "ringdown.csv" : so.output;
        memws::write_ringdown_csv(ctx.out_file(name).string(), t);
    } else if (so.kind == "freq-series") {
        const memws::FrequencySeries s = memws::synth_freq_series(
            so.f0_khz * 1e3, so.interval_s, so.samples, so.white_noise_hz,
            so.drift_hz_per_day / 86400.0, so.wander_ppm, seed);
        const std::string name = so.output.empty() ? "freq_series.csv" : so.output;
        memws::write_freq_series_csv(ctx.out_file(name).string(), s);
    } else if (so.kind == "mode-shape") {
        const double side = ctx.config.membrane.side_length_m;
        memws::ModeShapeField field =
            memws::sample_mode_shape({so.shape_m, so.shape_n}, side, so.resolution);
        if (so.shape_m2 > 0 && so.shape_n2 > 0) {
            const memws::ModeShapeField other =
                memws::sample_mode_shape({so.shape_m2, so.shape_n2}, side, so.resolution);
            field = memws::superpose_shapes(so.shape_alpha, so.shape_beta, field, other,
                                            so.shape_sign);
        }
        const std::string name = so.output.empty() ? "mode_shape.csv" : so.output;
        memws::write_mode_shape_csv(ctx.out_file(name).string(), field);
    } else {
        throw memws::validation_error("synth: unknown kind '" + so.kind +
                                      "' (mode-table|spectrum|ringdown|freq-series|mode-shape)");
    }
    ctx.finish();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"membrane-works: stress, stability, and state-swap workbench "
                 "for square membrane resonators"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOptions opts;
    app.add_option("--config", opts.config_path, "Toolkit config file (sectioned key=value)");
    app.add_option("--out", opts.out_dir, "Output directory (overrides config)");
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed", seed_value, "Random seed (overrides config)");
    app.add_option("--jobs", opts.jobs, "Parallel workers for sweep/Monte-Carlo workloads");
    app.add_option("--format", opts.format, "Result format")
        ->check(CLI::IsMember({"csv", "json"}));

    auto* fit_stress = app.add_subcommand("fit-stress", "Collective biaxial stress fit of a mode table");
    std::string table_path;
    fit_stress->add_option("table", table_path, "Mode-table CSV (m,n,freq_hz,q)")->required();

    auto* fit_peak = app.add_subcommand("fit-peak", "Lorentzian fit of a PSD spectrum");
    std::string spectrum_path;
    std::vector<double> window_pair;
    fit_peak->add_option("spectrum", spectrum_path, "Spectrum CSV (freq_hz,psd)")->required();
    fit_peak->add_option("--window", window_pair, "Fit window: low and high frequency (Hz)")
        ->expected(2);

    auto* ringdown = app.add_subcommand("ringdown", "Energy decay rate from a gated ring-down");
    std::string ringdown_path;
    double linewidth_millihz = 0.0;
    ringdown->add_option("trace", ringdown_path, "Ring-down CSV (time_s,amplitude,gate)")
        ->required();
    auto* lw_opt = ringdown->add_option("--linewidth-millihz", linewidth_millihz,
                                        "PSD linewidth; adds the pure dephasing rate");

    auto* allan = app.add_subcommand("allan", "Allan deviation curve and noise-model fit");
    std::string series_path;
    double interval_s = 0.0;
    allan->add_option("series", series_path, "Frequency series CSV")->required();
    auto* interval_opt =
        allan->add_option("--interval", interval_s, "Sampling interval override (s)");

    auto* swap = app.add_subcommand("simulate-swap", "Four-phase cool/excite/swap/readout run");
    SwapOverrides ov;
    double ov_period = 0, ov_mismatch = 0, ov_duration = 0;
    std::string ov_convention, ov_budget;
    auto* p_opt = swap->add_option("--swap-period", ov_period, "Swap period (s)");
    auto* m_opt = swap->add_option("--mismatch", ov_mismatch, "Swap-tone separation error (Hz)");
    auto* d_opt = swap->add_option("--swap-duration", ov_duration, "Swapping phase length (s)");
    auto* c_opt = swap->add_option("--convention", ov_convention,
                                   "Period convention: exchange|occupancy");
    auto* b_opt = swap->add_option("--budget", ov_budget, "Loss budget: none|resonant|full");
    swap->add_flag("--lossless", ov.lossless, "Zero mechanical loss and cavity budget");

    auto* synth = app.add_subcommand("synth", "Generate synthetic data files");
    SynthOptions so;
    synth->add_option("kind", so.kind, "mode-table|spectrum|ringdown|freq-series|mode-shape")
        ->required();
    synth->add_option("--output", so.output, "Output file name (within --out)");
    synth->add_option("--cutoff-mhz", so.cutoff_mhz, "mode-table: frequency cutoff (MHz)");
    synth->add_option("--count", so.count, "mode-table: keep only the lowest N modes");
    synth->add_option("--noise-hz", so.noise_hz, "mode-table: Gaussian frequency noise (Hz)");
    synth->add_flag("--drop-indices", so.drop_indices, "mode-table: omit (m,n) columns");
    synth->add_option("--center-khz", so.center_khz, "spectrum: line center (kHz)");
    synth->add_option("--linewidth-millihz", so.linewidth_millihz, "spectrum: full width (mHz)");
    synth->add_option("--amplitude", so.amplitude, "spectrum: peak height");
    synth->add_option("--offset", so.offset, "spectrum: baseline offset");
    synth->add_option("--span-linewidths", so.span_linewidths, "spectrum: half-span in widths");
    synth->add_option("--points", so.points, "spectrum: grid points");
    synth->add_option("--noise-rel", so.noise_rel, "spectrum/ringdown: relative noise sigma");
    synth->add_option("--decay-millihz", so.decay_millihz, "ringdown: energy decay rate (mHz)");
    synth->add_option("--a0", so.a0, "ringdown: initial amplitude");
    synth->add_option("--duration-s", so.duration_s, "ringdown: length (s)");
    synth->add_option("--rate-hz", so.rate_hz, "ringdown: sample rate (Hz)");
    synth->add_option("--gate-period-s", so.gate_period_s, "ringdown: gate period (s)");
    synth->add_option("--duty", so.duty, "ringdown: gate duty cycle");
    synth->add_option("--f0-khz", so.f0_khz, "freq-series: reference frequency (kHz)");
    synth->add_option("--interval-s", so.interval_s, "freq-series: sample interval (s)");
    synth->add_option("--samples", so.samples, "freq-series: number of samples");
    synth->add_option("--white-noise-hz", so.white_noise_hz, "freq-series: white noise sigma");
    synth->add_option("--drift-hz-per-day", so.drift_hz_per_day, "freq-series: linear drift");
    synth->add_option("--wander-ppm", so.wander_ppm, "freq-series: bounded wander amplitude");
    synth->add_option("--m", so.shape_m, "mode-shape: antinodes along x");
    synth->add_option("--n", so.shape_n, "mode-shape: antinodes along y");
    synth->add_option("--resolution", so.resolution, "mode-shape: grid points per side");
    synth->add_option("--m2", so.shape_m2, "mode-shape: second index m for a superposition");
    synth->add_option("--n2", so.shape_n2, "mode-shape: second index n for a superposition");
    synth->add_option("--alpha", so.shape_alpha, "mode-shape: weight of the first shape");
    synth->add_option("--beta", so.shape_beta, "mode-shape: weight of the second shape");
    synth->add_option("--sign", so.shape_sign, "mode-shape: superposition sign, +1 or -1");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage problems are validation errors
    }

    if (*seed_opt) opts.seed = seed_value;

    try {
        if (*fit_stress) return cmd_fit_stress(opts, table_path);
        if (*fit_peak) {
            std::optional<std::pair<double, double>> window;
            if (window_pair.size() == 2) window = {window_pair[0], window_pair[1]};
            return cmd_fit_peak(opts, spectrum_path, window);
        }
        if (*ringdown) {
            std::optional<double> lw;
            if (*lw_opt) lw = linewidth_millihz * 1e-3;
            return cmd_ringdown(opts, ringdown_path, lw);
        }
        if (*allan) {
            std::optional<double> interval;
            if (*interval_opt) interval = interval_s;
            return cmd_allan(opts, series_path, interval);
        }
        if (*swap) {
            if (*p_opt) ov.swap_period_s = ov_period;
            if (*m_opt) ov.mismatch_hz = ov_mismatch;
            if (*d_opt) ov.swap_duration_s = ov_duration;
            if (*c_opt) ov.convention = ov_convention;
            if (*b_opt) ov.budget = ov_budget;
            return cmd_simulate_swap(opts, ov);
        }
        if (*synth) return cmd_synth(opts, so);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const memws::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const memws::computation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
