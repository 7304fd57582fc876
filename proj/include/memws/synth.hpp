#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "memws/allan.hpp"
#include "memws/errors.hpp"
#include "memws/membrane.hpp"
#include "memws/spectral.hpp"
#include "memws/stress.hpp"

namespace memws {

// Synthetic-data generators. Every generator takes an explicit seed and is
// deterministic for fixed inputs (byte-identical output files).

/// Model-generated mode table: all (m,n) with f <= cutoff, optionally the
/// lowest `max_count` of them, with optional Gaussian frequency noise.
inline std::vector<ModeRecord> synth_mode_table(const MembraneSpec& spec, double cutoff_hz,
                                                std::size_t max_count = 0,
                                                double freq_noise_hz = 0.0,
                                                std::uint64_t seed = 1,
                                                bool keep_indices = true) {
    const auto candidates = enumerate_candidates(spec, cutoff_hz);
    if (candidates.empty())
        throw validation_error("synth_mode_table: cutoff below the fundamental mode");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<ModeRecord> out;
    for (const ModeCandidate& c : candidates) {
        if (max_count > 0 && out.size() >= max_count) break;
        ModeRecord r;
        if (keep_indices) r.index = c.index;
        r.freq_hz = c.freq_hz + (freq_noise_hz > 0.0 ? freq_noise_hz * gauss(rng) : 0.0);
        out.push_back(r);
    }
    return out;
}

/// Gated exponential ring-down: amplitude a0 exp(-gamma_E t / 2) sampled at
/// `rate_hz`, gate square wave with the given period and duty cycle,
/// optional multiplicative Gaussian noise on the gated samples.
inline RingdownTrace synth_ringdown(double energy_decay_hz, double a0, double duration_s,
                                    double rate_hz, double gate_period_s, double gate_duty,
                                    double noise_rel = 0.0, std::uint64_t seed = 1) {
    if (!(energy_decay_hz >= 0.0))
        throw validation_error("synth_ringdown: decay rate must be >= 0");
    if (!(a0 > 0.0)) throw validation_error("synth_ringdown: initial amplitude must be > 0");
    if (!(duration_s > 0.0) || !(rate_hz > 0.0))
        throw validation_error("synth_ringdown: duration and rate must be > 0");
    if (!(gate_period_s > 0.0) || !(gate_duty > 0.0) || gate_duty > 1.0)
        throw validation_error("synth_ringdown: gate period must be > 0 and duty in (0,1]");

    RingdownTrace t;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto n = static_cast<std::size_t>(duration_s * rate_hz);
    for (std::size_t i = 0; i < n; ++i) {
        const double time = double(i) / rate_hz;
        const double in_period = std::fmod(time, gate_period_s) / gate_period_s;
        const bool on = in_period < gate_duty;
        double amp = on ? a0 * std::exp(-0.5 * energy_decay_hz * time) : 0.0;
        if (on && noise_rel > 0.0) amp *= 1.0 + noise_rel * gauss(rng);
        t.time_s.push_back(time);
        t.amplitude.push_back(amp);
        t.gate.push_back(on);
    }
    return t;
}

/// Frequency series around f0: white Gaussian noise of the given standard
/// deviation, plus optional linear drift and bounded uniform wander.
inline FrequencySeries synth_freq_series(double f0_hz, double tau0_s, std::size_t n_samples,
                                         double white_noise_hz, double drift_hz_per_s = 0.0,
                                         double wander_ppm = 0.0, std::uint64_t seed = 1) {
    if (!(f0_hz > 0.0)) throw validation_error("synth_freq_series: f0 must be > 0");
    if (!(tau0_s > 0.0)) throw validation_error("synth_freq_series: tau0 must be > 0");
    if (n_samples < 3) throw validation_error("synth_freq_series: need >= 3 samples");

    FrequencySeries s;
    s.sample_interval_s = tau0_s;
    s.reference_freq_hz = f0_hz;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    const double wander_hz = wander_ppm * 1e-6 * f0_hz;
    for (std::size_t i = 0; i < n_samples; ++i) {
        double f = f0_hz + drift_hz_per_s * double(i) * tau0_s;
        if (white_noise_hz > 0.0) f += white_noise_hz * gauss(rng);
        if (wander_hz > 0.0) f += wander_hz * uni(rng);
        s.samples_hz.push_back(f);
    }
    return s;
}

}  // namespace memws
