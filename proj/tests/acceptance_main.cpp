// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Library-level checks anchored to the quoted device values.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "memws/memws.hpp"

using namespace memws;

namespace {

struct CheckFailure {
    std::string what;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw CheckFailure{what};
}

void require_close(double got, double want, double rel, const std::string& what) {
    if (!(std::abs(got - want) <= rel * std::abs(want)))
        throw CheckFailure{what + ": got " + std::to_string(got) + ", want " +
                           std::to_string(want)};
}

MembraneSpec device_spec() {
    return {500e-6, 50e-9, 3210.0, 242.95e6, 245.81e6, 437e9, 0.268};
}

EMSystem device_system() {
    EMSystem s;
    s.cavity_freq_hz = 5.39e9;
    s.kappa_ext_hz = 100.25e3;
    s.kappa_int_hz = 100.0e3;
    s.mode1 = {871.93e3, 8.13e-3, 6.13e-3, 2.0, 238.45};
    s.mode2 = {885.39e3, 5.63e-3, 4.4e-3, 2.0, 234.84};
    return s;
}

ProtocolSchedule swap_only_schedule() {
    ProtocolSchedule sched;
    sched.cooling_duration_s = 1e-3;
    sched.excitation_duration_s = 1e-3;
    sched.readout_duration_s = 1e-3;
    sched.swapping_duration_s = 5.0;
    sched.excitation_phonons = 0.0;
    sched.cooling_pump_amplitude = 0.0;
    sched.excitation_pump_amplitude = 0.0;
    return sched;
}

double oracle_allan(const std::vector<double>& samples, double f0, std::size_t k) {
    const std::size_t n_win = samples.size() / k;
    std::vector<double> means(n_win);
    for (std::size_t w = 0; w < n_win; ++w) {
        double acc = 0.0;
        for (std::size_t i = w * k; i < (w + 1) * k; ++i) acc += samples[i];
        means[w] = acc / double(k);
    }
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i + 1 < n_win; ++i) {
        const double d = (means[i + 1] - means[i]) / f0;
        sum += d * d;
        ++count;
    }
    return std::sqrt(sum / (2.0 * double(count)));
}

int g_failures = 0;

void criterion(int number, const std::string& label, double limit_s,
               const std::function<void()>& body) {
    const auto start = std::chrono::steady_clock::now();
    std::string failure;
    try {
        body();
    } catch (const CheckFailure& f) {
        failure = f.what;
    } catch (const std::exception& e) {
        failure = e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (failure.empty() && limit_s > 0.0 && elapsed > limit_s)
        failure = "runtime " + std::to_string(elapsed) + " s exceeds " +
                  std::to_string(limit_s) + " s";
    if (failure.empty()) {
        std::printf("PASS criterion %d (%.2fs): %s\n", number, elapsed, label.c_str());
    } else {
        std::printf("FAIL criterion %d (%.2fs): %s -- %s\n", number, elapsed, label.c_str(),
                    failure.c_str());
        ++g_failures;
    }
    std::fflush(stdout);
}

}  // namespace

int main() {
    criterion(1, "frequency-law reproduction of the four measured pair modes", 1.0, [] {
        const MembraneSpec spec = device_spec();
        const struct {
            ModeIndex idx;
            double measured_hz;
        } rows[] = {{{3, 1}, 868.70e3}, {{1, 3}, 875.54e3}, {{6, 5}, 2.152e6}, {{5, 6}, 2.158e6}};
        for (const auto& row : rows) {
            const double pred = mode_frequency(spec, row.idx);
            require(std::abs(pred - row.measured_hz) / row.measured_hz < 0.003,
                    "mode (" + std::to_string(row.idx.m) + "," + std::to_string(row.idx.n) +
                        ") deviates by more than 0.3%");
        }
    });

    criterion(2, "dilution factor of mode(3,1) in [363, 378]", 1.0, [] {
        const double dq = dilution_factor(device_spec(), {3, 1}, 244.38e6);
        require(dq >= 363.0 && dq <= 378.0, "D_Q = " + std::to_string(dq));
    });

    criterion(3, "stress-fit round trip and sub-0.5 MPa resolution over 100 seeds", 10.0, [] {
        const MembraneSpec spec = device_spec();
        const auto clean = synth_mode_table(spec, 2.556e6, 57);
        require(clean.size() == 57, "57-mode table");
        const StressFitResult fit =
            fit_biaxial_stress(clean, spec.side_length_m, spec.density_kg_m3);
        require_close(fit.stress_x_pa, 242.95e6, 1e-6, "noiseless stress_x");
        require_close(fit.stress_y_pa, 245.81e6, 1e-6, "noiseless stress_y");
        require(fit.r_squared >= 1.0 - 1e-12, "R^2 = 1 for the noiseless table");

        std::vector<double> xs;
        for (int seed = 1; seed <= 100; ++seed) {
            const auto noisy = synth_mode_table(spec, 2.556e6, 57, 10.0, std::uint64_t(seed));
            const StressFitResult f =
                fit_biaxial_stress(noisy, spec.side_length_m, spec.density_kg_m3);
            const auto [dx, dy] = stress_resolution(f);
            require(dx < 0.5e6 && dy < 0.5e6, "reported 1-sigma uncertainty below 0.5 MPa");
            xs.push_back(f.stress_x_pa);
        }
        double mean = 0.0, var = 0.0;
        for (double v : xs) mean += v / xs.size();
        for (double v : xs) var += (v - mean) * (v - mean) / (xs.size() - 1);
        require(std::sqrt(var) < 0.5e6, "empirical stress scatter below 0.5 MPa");
    });

    criterion(4, "Q factors 1.07e8 and 1.57e8 from Lorentzian fits within 1%", 5.0, [] {
        const struct {
            double f0, gamma, q;
        } rows[] = {{871.93e3, 8.13e-3, 1.07e8}, {885.39e3, 5.63e-3, 1.57e8}};
        for (const auto& row : rows) {
            const double span = 20.0 * row.gamma;
            const Spectrum s = synth_spectrum(row.f0, row.gamma, 1.0, 0.01, row.f0 - span,
                                              2.0 * span / 2000.0, 2001, 0.0, 1);
            const LorentzianFit fit = fit_lorentzian(s);
            require(std::abs(fit.quality_factor() - row.q) / row.q < 0.01,
                    "Q = " + std::to_string(fit.quality_factor()));
        }
    });

    criterion(5, "Allan estimator: oracle equivalence, white-noise exponent, exact alternating case",
              30.0, [] {
        std::mt19937_64 rng(12345);
        std::normal_distribution<double> gauss(0.0, 2.0);
        for (std::size_t n = 3; n <= 64; ++n) {
            std::vector<double> samples(n);
            for (double& v : samples) v = 1e6 + gauss(rng);
            FrequencySeries s;
            s.sample_interval_s = 1.0;
            s.reference_freq_hz = 1e6;
            s.samples_hz = samples;
            for (std::size_t k = 1; 2 * k <= n; ++k)
                require(allan_deviation(s, double(k)) == oracle_allan(samples, 1e6, k),
                        "bit-for-bit oracle equality at n=" + std::to_string(n) +
                            ", k=" + std::to_string(k));
        }

        double mean_exponent = 0.0;
        const int seeds = 100;
        for (int seed = 1; seed <= seeds; ++seed) {
            const FrequencySeries s =
                synth_freq_series(1e6, 1.0, 1 << 14, 0.5, 0.0, 0.0, std::uint64_t(seed));
            const NoiseModelFit fit = fit_noise_model(allan_curve(s, default_tau_grid(s)));
            mean_exponent += fit.exponent / seeds;
        }
        require(mean_exponent > -0.55 && mean_exponent < -0.45,
                "mean exponent " + std::to_string(mean_exponent));

        const double f0 = 1048576.0, delta = 0.25;
        FrequencySeries alt;
        alt.sample_interval_s = 1.0;
        alt.reference_freq_hz = f0;
        for (int i = 0; i < 64; ++i)
            alt.samples_hz.push_back(f0 + (i % 2 == 0 ? delta : -delta));
        require_close(allan_deviation(alt, 1.0), std::sqrt(2.0) * delta / f0, 1e-15,
                      "alternating series sigma");
    });

    criterion(6, "noise-model amplitude through (tau=3e4 s, sigma=6e-10) within 1%", 0.0, [] {
        AllanCurve curve;
        for (double tau : {1e3, 3e3, 1e4, 3e4, 1e5})
            curve.points.push_back({tau, 6e-10 * std::sqrt(3e4 / tau), 50});
        const NoiseModelFit fit = fit_noise_model(curve);
        const double a_closed_form = 6e-10 * std::sqrt(3e4);
        require(std::abs(fit.amplitude - a_closed_form) / a_closed_form < 0.01,
                "A = " + std::to_string(fit.amplitude));
        require(std::abs(fit.exponent + 0.5) < 1e-9, "exponent -1/2");
    });

    criterion(7, "swap dynamics: lossless limit, device-anchored efficiency, damping monotonicity",
              60.0, [] {
        // lossless limit
        EMSystem lossless = device_system();
        lossless.mode1.linewidth_hz = lossless.mode1.energy_decay_hz = 1e-15;
        lossless.mode2.linewidth_hz = lossless.mode2.energy_decay_hz = 1e-15;
        ProtocolSchedule ideal = swap_only_schedule();
        ideal.loss_budget = SwapLossBudget::none;
        InitialState one;
        one.b1 = {1.0, 0.0};
        require(std::abs(transfer_efficiency(simulate(lossless, ideal, one)) - 1.0) < 1e-6,
                "lossless transfer efficiency 1.0 within 1e-6");

        // device-anchored full protocol, >= 10 s of simulated time
        const EMSystem sys = device_system();
        const ProtocolSchedule sched;
        const SimTrace trace = simulate(sys, sched, InitialState{});
        require(trace.time_s.back() >= 10.0, "trace spans at least 10 s");
        const SwapMetrics m = swap_metrics(trace);
        require(m.efficiency >= 0.70 && m.efficiency <= 0.85,
                "efficiency " + std::to_string(m.efficiency) + " in [0.70, 0.85]");

        double lo = m.efficiency, hi = m.efficiency;
        for (auto conv : {PeriodConvention::exchange, PeriodConvention::occupancy})
            for (auto budget : {SwapLossBudget::resonant, SwapLossBudget::full}) {
                ProtocolSchedule v = swap_only_schedule();
                v.period_convention = conv;
                v.loss_budget = budget;
                const double eff = transfer_efficiency(simulate(sys, v, one));
                lo = std::min(lo, eff);
                hi = std::max(hi, eff);
            }
        require(lo <= 0.7818 && 0.7818 <= hi,
                "0.7818 inside the reported confidence [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]");

        double prev = 1.1;
        for (double scale : {1.0, 5.0, 10.0}) {
            EMSystem damped = sys;
            damped.mode1.energy_decay_hz *= scale;
            damped.mode1.linewidth_hz *= scale;
            damped.mode2.energy_decay_hz *= scale;
            damped.mode2.linewidth_hz *= scale;
            const double eff =
                transfer_efficiency(simulate(damped, swap_only_schedule(), one));
            require(eff < prev, "efficiency decreases monotonically with added damping");
            prev = eff;
        }
    });

    criterion(8, "stroboscopic readout of a free decay recovers gamma_E to 1e-4", 0.0, [] {
        const double gamma_e = 6.13e-3;
        EMSystem sys = device_system();
        sys.mode1.linewidth_hz = sys.mode1.energy_decay_hz = gamma_e;
        sys.mode1.coupling_g0_hz = sys.mode2.coupling_g0_hz = 0.0;
        ProtocolSchedule sched = swap_only_schedule();
        sched.swap_pump_amplitude = 1.0;  // no coupling: pure free decay
        sched.swapping_duration_s = 1.0;
        sched.readout_duration_s = 500.0;
        InitialState init;
        init.b1 = {1.0, 0.0};
        const SimTrace trace = simulate(sys, sched, init);
        std::vector<Interval> gates;
        for (double t0 = 10.0; t0 + 20.0 < 500.0; t0 += 40.0) gates.push_back({t0, t0 + 20.0});
        const RingdownFit fit = fit_ringdown(stroboscopic_readout(trace, gates));
        require_close(fit.energy_decay_hz, gamma_e, 1e-4, "recovered gamma_E");
    });

    if (g_failures == 0) {
        std::printf("all acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria FAILED\n", g_failures);
    return 1;
}
