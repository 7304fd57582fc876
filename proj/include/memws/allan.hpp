#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "memws/errors.hpp"
#include "memws/linfit.hpp"

namespace memws {

/// Uniformly sampled resonance-frequency record. Gaps are carried as
/// invalidated samples; windows touching a gap are dropped, never bridged.
struct FrequencySeries {
    double sample_interval_s = 0.0;  // tau0
    double reference_freq_hz = 0.0;  // f0
    double start_time_s = 0.0;
    std::vector<double> samples_hz;
    std::vector<bool> valid;  // empty means all valid

    void validate() const {
        if (!(sample_interval_s > 0.0))
            throw validation_error("FrequencySeries: sample interval must be > 0");
        if (!(reference_freq_hz > 0.0))
            throw validation_error("FrequencySeries: reference frequency must be > 0");
        if (samples_hz.size() < 3)
            throw validation_error("FrequencySeries: need at least 3 samples");
        if (!valid.empty() && valid.size() != samples_hz.size())
            throw validation_error("FrequencySeries: validity mask length mismatch");
    }
    bool is_valid(std::size_t i) const { return valid.empty() || valid[i]; }
    double duration_s() const { return sample_interval_s * double(samples_hz.size()); }
};

struct AllanPoint {
    double tau_s = 0.0;
    double sigma = 0.0;       // dimensionless fractional-frequency deviation
    std::size_t n_diffs = 0;  // number of window differences averaged
};

struct AllanCurve {
    std::vector<AllanPoint> points;
    std::vector<std::string> warnings;  // taus skipped and why
};

namespace detail {

// Non-overlapping window averages of length k; windows containing an
// invalidated sample are dropped (flagged false).
inline void window_means(const FrequencySeries& s, std::size_t k,
                         std::vector<double>& means, std::vector<bool>& ok) {
    const std::size_t n_win = s.samples_hz.size() / k;
    means.assign(n_win, 0.0);
    ok.assign(n_win, true);
    for (std::size_t w = 0; w < n_win; ++w) {
        double acc = 0.0;
        for (std::size_t i = w * k; i < (w + 1) * k; ++i) {
            if (!s.is_valid(i)) {
                ok[w] = false;
                break;
            }
            acc += s.samples_hz[i];
        }
        if (ok[w]) means[w] = acc / double(k);
    }
}

}  // namespace detail

/// Two-sample (Allan) deviation at integration time tau = k * tau0,
///   sigma(tau) = sqrt( 1/(2(N-1)) * sum_i ((fbar_{i+1} - fbar_i)/f0)^2 )
/// over non-overlapping window averages fbar_i. Requires at least two
/// complete windows; only differences of adjacent intact windows count.
inline double allan_deviation(const FrequencySeries& series, double tau_s) {
    series.validate();
    const double ratio = tau_s / series.sample_interval_s;
    const auto k = static_cast<std::size_t>(std::llround(ratio));
    if (k < 1 || std::abs(ratio - double(k)) > 1e-9)
        throw validation_error("allan_deviation: tau must be a positive integer multiple of the sample interval");
    if (series.samples_hz.size() < 2 * k)
        throw validation_error("allan_deviation: series too short for two windows at this tau");

    std::vector<double> means;
    std::vector<bool> ok;
    detail::window_means(series, k, means, ok);

    double acc = 0.0;
    std::size_t n_diffs = 0;
    for (std::size_t i = 0; i + 1 < means.size(); ++i) {
        if (!ok[i] || !ok[i + 1]) continue;
        const double d = (means[i + 1] - means[i]) / series.reference_freq_hz;
        acc += d * d;
        ++n_diffs;
    }
    if (n_diffs < 1)
        throw validation_error("allan_deviation: no adjacent intact window pairs at this tau");
    return std::sqrt(acc / (2.0 * double(n_diffs)));
}

/// Number of adjacent intact window differences available at tau.
inline std::size_t allan_n_diffs(const FrequencySeries& series, double tau_s) {
    const auto k = static_cast<std::size_t>(std::llround(tau_s / series.sample_interval_s));
    std::vector<double> means;
    std::vector<bool> ok;
    detail::window_means(series, k, means, ok);
    std::size_t n = 0;
    for (std::size_t i = 0; i + 1 < means.size(); ++i)
        if (ok[i] && ok[i + 1]) ++n;
    return n;
}

/// Octave-spaced default tau grid: {1, 2, 4, ...} * tau0 up to N*tau0/4.
inline std::vector<double> default_tau_grid(const FrequencySeries& series) {
    series.validate();
    std::vector<double> taus;
    for (std::size_t k = 1; k <= series.samples_hz.size() / 4; k *= 2)
        taus.push_back(double(k) * series.sample_interval_s);
    if (taus.empty()) taus.push_back(series.sample_interval_s);
    return taus;
}

/// Allan curve over a tau list. Invalid taus are skipped with a warning;
/// points with fewer than 2 differences are dropped per the curve contract.
inline AllanCurve allan_curve(const FrequencySeries& series, const std::vector<double>& taus) {
    series.validate();
    if (taus.empty()) throw validation_error("allan_curve: empty tau list");
    AllanCurve curve;
    for (double tau : taus) {
        try {
            const double sigma = allan_deviation(series, tau);
            const std::size_t nd = allan_n_diffs(series, tau);
            if (nd < 2) {
                curve.warnings.push_back("tau=" + std::to_string(tau) +
                                         "s skipped: fewer than 2 window differences");
                continue;
            }
            if (!curve.points.empty() && !(tau > curve.points.back().tau_s))
                throw validation_error("allan_curve: tau list must be strictly increasing");
            curve.points.push_back({tau, sigma, nd});
        } catch (const validation_error& e) {
            curve.warnings.push_back("tau=" + std::to_string(tau) + "s skipped: " + e.what());
        }
    }
    return curve;
}

/// Power-law noise model sigma(tau) = A * tau^exponent fitted by log-log
/// linear regression. exponent in [-0.6,-0.4] flags white frequency noise.
struct NoiseModelFit {
    double amplitude = 0.0;  // A, dimensionless * s^(1/2) for white noise
    double exponent = 0.0;
    double exponent_stderr = 0.0;
    double amplitude_stderr = 0.0;  // propagated from log-intercept error
    bool white_noise_consistent = false;
};

inline NoiseModelFit fit_noise_model(const AllanCurve& curve) {
    if (curve.points.size() < 3)
        throw validation_error("fit_noise_model: need >= 3 curve points");
    std::vector<double> lt, ls;
    for (const auto& p : curve.points) {
        if (!(p.sigma > 0.0))
            throw computation_error("fit_noise_model: sigma(tau)=0 point, log model undefined");
        lt.push_back(std::log(p.tau_s));
        ls.push_back(std::log(p.sigma));
    }
    if (lt.front() == lt.back())
        throw validation_error("fit_noise_model: degenerate single-tau input");
    const LineFit lf = fit_line(lt, ls);
    NoiseModelFit out;
    out.exponent = lf.slope;
    out.exponent_stderr = lf.slope_stderr;
    out.amplitude = std::exp(lf.intercept);
    out.amplitude_stderr = out.amplitude * lf.intercept_stderr;
    out.white_noise_consistent = out.exponent >= -0.6 && out.exponent <= -0.4;
    return out;
}

/// Linear drift rate and peak-to-peak wander of windowed means.
struct DriftResult {
    double slope_hz_per_day = 0.0;
    double slope_stderr_hz_per_day = 0.0;
    double ppm_span = 0.0;  // (max windowed mean - min windowed mean)/f0 * 1e6
};

inline DriftResult drift_detect(const FrequencySeries& series, std::size_t n_windows = 10) {
    series.validate();
    if (series.samples_hz.size() < 10)
        throw validation_error("drift_detect: series duration must span >= 10 samples");
    std::vector<double> t, f;
    for (std::size_t i = 0; i < series.samples_hz.size(); ++i) {
        if (!series.is_valid(i)) continue;
        t.push_back(series.start_time_s + double(i) * series.sample_interval_s);
        f.push_back(series.samples_hz[i]);
    }
    const LineFit lf = fit_line(t, f);

    DriftResult out;
    out.slope_hz_per_day = lf.slope * 86400.0;
    out.slope_stderr_hz_per_day = lf.slope_stderr * 86400.0;

    n_windows = std::max<std::size_t>(1, std::min(n_windows, f.size()));
    const std::size_t wlen = f.size() / n_windows;
    double lo = 0, hi = 0;
    bool first = true;
    for (std::size_t w = 0; w < n_windows; ++w) {
        double acc = 0;
        for (std::size_t i = w * wlen; i < (w + 1) * wlen; ++i) acc += f[i];
        const double mean = acc / double(wlen);
        if (first || mean < lo) lo = mean;
        if (first || mean > hi) hi = mean;
        first = false;
    }
    out.ppm_span = (hi - lo) / series.reference_freq_hz * 1e6;
    return out;
}

/// Resonator response time tau_r = 1 / (pi * gamma_m).
inline double response_time(double linewidth_hz) {
    if (!(linewidth_hz > 0.0))
        throw validation_error("response_time: linewidth must be > 0");
    return 1.0 / (std::numbers::pi * linewidth_hz);
}

}  // namespace memws
