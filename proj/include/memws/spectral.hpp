#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "memws/errors.hpp"
#include "memws/linfit.hpp"

namespace memws {

/// Uniformly gridded one-sided PSD trace.
struct Spectrum {
    std::vector<double> freq_hz;   // strictly increasing, uniform spacing
    std::vector<double> psd;       // >= 0, arbitrary power units
    std::string tag;

    void validate() const {
        if (freq_hz.size() != psd.size())
            throw validation_error("Spectrum: frequency and psd lengths differ");
        if (freq_hz.size() < 16)
            throw validation_error("Spectrum: need at least 16 points");
        // Uniformity is judged against the affine model through the end
        // points; adjacent differences cancel catastrophically when the
        // spacing is ~1e-10 of the frequency itself.
        const double df = (freq_hz.back() - freq_hz.front()) / double(freq_hz.size() - 1);
        if (!(df > 0.0)) throw validation_error("Spectrum: grid must be increasing");
        const double tol =
            1e-9 * std::max(std::abs(freq_hz.front()), std::abs(freq_hz.back()));
        for (std::size_t i = 1; i < freq_hz.size(); ++i) {
            if (!(freq_hz[i] > freq_hz[i - 1]))
                throw validation_error("Spectrum: grid must be strictly increasing");
            if (std::abs(freq_hz[i] - (freq_hz.front() + double(i) * df)) > tol)
                throw validation_error("Spectrum: grid spacing not uniform");
        }
        for (double p : psd)
            if (!(p >= 0.0)) throw validation_error("Spectrum: psd values must be >= 0");
    }
    double spacing_hz() const { return freq_hz[1] - freq_hz[0]; }
};

/// Lorentzian line parameters: psd(f) = offset + amplitude*(g/2)^2 / ((f-f0)^2 + (g/2)^2)
/// with g the full linewidth. amplitude is the peak height above the baseline.
struct LorentzianFit {
    double center_hz = 0.0;
    double linewidth_hz = 0.0;  // full width gamma
    double amplitude = 0.0;     // peak height, power units
    double offset = 0.0;
    double center_stderr = 0.0;
    double linewidth_stderr = 0.0;
    double amplitude_stderr = 0.0;
    double offset_stderr = 0.0;
    double residual_norm = 0.0;
    int iterations = 0;

    double quality_factor() const { return center_hz / linewidth_hz; }
};

namespace detail {

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double hi = v[mid];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
        return 0.5 * (hi + v[mid - 1]);
    }
    return hi;
}

// Solve the symmetric 4x4 system M x = rhs by Gaussian elimination with
// partial pivoting. Throws on (near-)singular input.
inline std::array<double, 4> solve4(std::array<std::array<double, 4>, 4> m,
                                    std::array<double, 4> rhs) {
    for (int col = 0; col < 4; ++col) {
        int piv = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
        std::swap(m[col], m[piv]);
        std::swap(rhs[col], rhs[piv]);
        if (std::abs(m[col][col]) < 1e-300)
            throw computation_error("lorentzian fit: singular normal equations");
        for (int r = col + 1; r < 4; ++r) {
            const double f = m[r][col] / m[col][col];
            for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::array<double, 4> x{};
    for (int r = 3; r >= 0; --r) {
        double s = rhs[r];
        for (int c = r + 1; c < 4; ++c) s -= m[r][c] * x[c];
        x[r] = s / m[r][r];
    }
    return x;
}

// Invert a 4x4 SPD-ish matrix column by column; used for the fit covariance.
inline std::array<std::array<double, 4>, 4> invert4(const std::array<std::array<double, 4>, 4>& m) {
    std::array<std::array<double, 4>, 4> inv{};
    for (int c = 0; c < 4; ++c) {
        std::array<double, 4> e{};
        e[c] = 1.0;
        const std::array<double, 4> col = solve4(m, e);
        for (int r = 0; r < 4; ++r) inv[r][c] = col[r];
    }
    return inv;
}

}  // namespace detail

/// Levenberg-Marquardt fit of a Lorentzian peak over an optional frequency
/// window. The window must hold the global psd maximum and >= 8 points.
/// Parameters are solved in window-scaled coordinates to keep the normal
/// equations conditioned regardless of f0/gamma disparity.
inline LorentzianFit fit_lorentzian(const Spectrum& s,
                                    std::optional<std::pair<double, double>> window = {}) {
    s.validate();

    std::size_t lo = 0, hi = s.freq_hz.size();
    if (window) {
        if (!(window->first < window->second))
            throw validation_error("fit_lorentzian: empty window");
        lo = std::lower_bound(s.freq_hz.begin(), s.freq_hz.end(), window->first) - s.freq_hz.begin();
        hi = std::upper_bound(s.freq_hz.begin(), s.freq_hz.end(), window->second) - s.freq_hz.begin();
        if (hi - lo < 8)
            throw validation_error("fit_lorentzian: window holds fewer than 8 grid points");
        const std::size_t gmax =
            std::max_element(s.psd.begin(), s.psd.end()) - s.psd.begin();
        if (gmax < lo || gmax >= hi)
            throw validation_error("fit_lorentzian: window does not contain the global psd maximum");
    }
    const std::size_t n = hi - lo;

    std::vector<double> win_psd(s.psd.begin() + lo, s.psd.begin() + hi);
    const double pmax = *std::max_element(win_psd.begin(), win_psd.end());
    const double pmed = detail::median_of(win_psd);
    if (!(pmed > 0.0) || pmax / pmed < 2.0)
        throw computation_error("fit_lorentzian: no peak (max/median < 2)");

    // Scaled coordinates: u in [-1,1] over the window, psd normalized by range.
    const double fc = 0.5 * (s.freq_hz[lo] + s.freq_hz[hi - 1]);
    const double fs = std::max(0.5 * (s.freq_hz[hi - 1] - s.freq_hz[lo]), s.spacing_hz());
    const double pmin = *std::min_element(win_psd.begin(), win_psd.end());
    const double ps = std::max(pmax - pmin, 1e-300);

    std::vector<double> u(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        u[i] = (s.freq_hz[lo + i] - fc) / fs;
        y[i] = s.psd[lo + i] / ps;
    }

    // Initial guesses: center at argmax, offset from the window-edge median,
    // width from the second moment of the background-subtracted psd.
    const std::size_t imax = std::max_element(y.begin(), y.end()) - y.begin();
    const std::size_t edge = std::max<std::size_t>(2, n / 16);
    std::vector<double> edges(y.begin(), y.begin() + edge);
    edges.insert(edges.end(), y.end() - edge, y.end());
    double c0 = detail::median_of(edges);
    double u0 = u[imax];
    double msum = 0, m2 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double wgt = std::max(0.0, y[i] - c0);
        msum += wgt;
        m2 += wgt * (u[i] - u0) * (u[i] - u0);
    }
    double g0 = msum > 0 ? 2.0 * std::sqrt(m2 / msum) : 0.1;
    g0 = std::clamp(g0, 2.0 * s.spacing_hz() / fs, 2.0);
    double a0 = std::max(y[imax] - c0, 1e-6);

    // theta = (u0, g, height, offset) in scaled units
    std::array<double, 4> theta{u0, g0, a0, c0};
    auto model = [&](double ui, const std::array<double, 4>& t) {
        const double hw = 0.5 * t[1];
        const double d = (ui - t[0]) * (ui - t[0]) + hw * hw;
        return t[3] + t[2] * hw * hw / d;
    };
    auto jacobian_row = [&](double ui, const std::array<double, 4>& t, std::array<double, 4>& j) {
        const double hw = 0.5 * t[1];
        const double du = ui - t[0];
        const double d = du * du + hw * hw;
        const double lor = hw * hw / d;
        j[0] = t[2] * lor * 2.0 * du / d;                  // d/d u0
        j[1] = t[2] * hw * du * du / (d * d);              // d/d g  (= A*hw*du^2/d^2)
        j[2] = lor;                                        // d/d height
        j[3] = 1.0;                                        // d/d offset
    };

    auto chi2_of = [&](const std::array<double, 4>& t) {
        double c = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double r = model(u[i], t) - y[i];
            c += r * r;
        }
        return c;
    };

    constexpr int max_iter = 200;
    double lambda = 1e-3;
    double chi2 = chi2_of(theta);
    int iter = 0;
    bool converged = false;
    std::array<std::array<double, 4>, 4> jtj{};
    for (; iter < max_iter; ++iter) {
        jtj = {};
        std::array<double, 4> jtr{};
        std::array<double, 4> jrow{};
        for (std::size_t i = 0; i < n; ++i) {
            const double r = model(u[i], theta) - y[i];
            jacobian_row(u[i], theta, jrow);
            for (int p = 0; p < 4; ++p) {
                jtr[p] += jrow[p] * r;
                for (int q = p; q < 4; ++q) jtj[p][q] += jrow[p] * jrow[q];
            }
        }
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < p; ++q) jtj[p][q] = jtj[q][p];

        auto damped = jtj;
        for (int p = 0; p < 4; ++p) damped[p][p] += lambda * std::max(jtj[p][p], 1e-30);
        std::array<double, 4> step{};
        try {
            step = detail::solve4(damped, {-jtr[0], -jtr[1], -jtr[2], -jtr[3]});
        } catch (const computation_error&) {
            lambda *= 10.0;
            continue;
        }

        std::array<double, 4> trial = theta;
        for (int p = 0; p < 4; ++p) trial[p] += step[p];
        trial[1] = std::abs(trial[1]);  // linewidth stays positive
        const double trial_chi2 = chi2_of(trial);
        if (trial_chi2 <= chi2) {
            bool small = true;
            for (int p = 0; p < 4; ++p)
                if (std::abs(step[p]) > 1e-10 * (std::abs(theta[p]) + 1e-14)) small = false;
            theta = trial;
            chi2 = trial_chi2;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (small) {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
    }
    if (!converged && chi2 > 1e-18 * double(n))
        throw fit_error("fit_lorentzian: no convergence within iteration budget",
                        std::sqrt(chi2) * ps);

    // Covariance in scaled space, then mapped back to physical units.
    std::array<std::array<double, 4>, 4> cov{};
    const double dof = double(n) - 4.0;
    const double s2 = dof > 0 ? chi2 / dof : 0.0;
    try {
        cov = detail::invert4(jtj);
    } catch (const computation_error&) {
        cov = {};  // flat directions: report zero errors rather than fail the fit
    }

    LorentzianFit out;
    out.center_hz = fc + theta[0] * fs;
    out.linewidth_hz = theta[1] * fs;
    out.amplitude = theta[2] * ps;
    out.offset = theta[3] * ps;
    out.center_stderr = std::sqrt(std::max(0.0, s2 * cov[0][0])) * fs;
    out.linewidth_stderr = std::sqrt(std::max(0.0, s2 * cov[1][1])) * fs;
    out.amplitude_stderr = std::sqrt(std::max(0.0, s2 * cov[2][2])) * ps;
    out.offset_stderr = std::sqrt(std::max(0.0, s2 * cov[3][3])) * ps;
    out.residual_norm = std::sqrt(chi2) * ps;
    out.iterations = iter + 1;
    if (!(out.linewidth_hz > 0.0) || !(out.amplitude > 0.0))
        throw fit_error("fit_lorentzian: degenerate solution (non-positive width or height)",
                        out.residual_norm);
    return out;
}

/// Gated (stroboscopic) ring-down time trace. Samples whose gate flag is
/// false are excluded from fitting.
struct RingdownTrace {
    std::vector<double> time_s;
    std::vector<double> amplitude;
    std::vector<bool> gate;

    void validate() const {
        if (time_s.size() != amplitude.size() || time_s.size() != gate.size())
            throw validation_error("RingdownTrace: column lengths differ");
        for (std::size_t i = 1; i < time_s.size(); ++i)
            if (!(time_s[i] > time_s[i - 1]))
                throw validation_error("RingdownTrace: time stamps must be strictly increasing");
    }

    // Contiguous runs of gated samples.
    std::vector<std::pair<std::size_t, std::size_t>> gated_segments() const {
        std::vector<std::pair<std::size_t, std::size_t>> seg;
        std::size_t i = 0;
        while (i < gate.size()) {
            if (!gate[i]) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < gate.size() && gate[j]) ++j;
            seg.emplace_back(i, j);
            i = j;
        }
        return seg;
    }
};

/// Energy decay rate from a gated exponential ring-down.
struct RingdownFit {
    double energy_decay_hz = 0.0;  // gamma_E; amplitude decays at gamma_E/2
    double energy_decay_stderr = 0.0;
    double initial_amplitude = 0.0;
    double residual_norm = 0.0;
};

/// Joint fit of amplitude(t) = A0 exp(-gamma_E t / 2) across all gated
/// segments: log-linear solve first, then one Gauss-Newton refinement pass.
inline RingdownFit fit_ringdown(const RingdownTrace& trace) {
    trace.validate();
    const auto segments = trace.gated_segments();
    std::size_t usable = 0;
    for (const auto& [a, b] : segments)
        if (b - a >= 4) ++usable;
    if (usable < 3)
        throw validation_error("fit_ringdown: need >= 3 gated segments with >= 4 samples each");

    std::vector<double> t, la;
    for (const auto& [a, b] : segments)
        for (std::size_t i = a; i < b; ++i)
            if (trace.amplitude[i] > 0.0) {
                t.push_back(trace.time_s[i]);
                la.push_back(std::log(trace.amplitude[i]));
            }
    if (t.size() < 8)
        throw validation_error("fit_ringdown: too few positive gated samples");

    const LineFit lf = fit_line(t, la);
    double gamma = -2.0 * lf.slope;
    double log_a0 = lf.intercept;

    // One Gauss-Newton pass on (A0, gamma) against the raw amplitudes.
    double a0 = std::exp(log_a0);
    {
        double s11 = 0, s12 = 0, s22 = 0, r1 = 0, r2 = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double e = std::exp(-0.5 * gamma * t[i]);
            const double m = a0 * e;
            const double res = m - std::exp(la[i]);
            const double ja = e;                 // d m / d A0
            const double jg = -0.5 * t[i] * m;   // d m / d gamma
            s11 += ja * ja;
            s12 += ja * jg;
            s22 += jg * jg;
            r1 += ja * res;
            r2 += jg * res;
        }
        const double det = s11 * s22 - s12 * s12;
        if (std::abs(det) > 1e-30) {
            a0 -= (s22 * r1 - s12 * r2) / det;
            gamma -= (s11 * r2 - s12 * r1) / det;
        }
    }

    if (!(gamma > 0.0))
        throw computation_error(
            "fit_ringdown: non-decaying trace (gamma_E <= 0); drive contamination?");

    // Standard error of gamma from the residuals about the refined model.
    double ss = 0, sjj = 0, sja = 0, saa = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double m = a0 * std::exp(-0.5 * gamma * t[i]);
        const double res = m - std::exp(la[i]);
        ss += res * res;
        const double ja = std::exp(-0.5 * gamma * t[i]);
        const double jg = -0.5 * t[i] * m;
        saa += ja * ja;
        sja += ja * jg;
        sjj += jg * jg;
    }
    const double dof = double(t.size()) - 2.0;
    const double s2 = dof > 0 ? ss / dof : 0.0;
    const double det = saa * sjj - sja * sja;
    const double var_gamma = det > 0 ? s2 * saa / det : 0.0;

    RingdownFit out;
    out.energy_decay_hz = gamma;
    out.energy_decay_stderr = std::sqrt(std::max(0.0, var_gamma));
    out.initial_amplitude = a0;
    out.residual_norm = std::sqrt(ss);
    return out;
}

/// Synthetic Lorentzian PSD on a uniform grid with multiplicative Gaussian
/// noise. Deterministic for a fixed seed. The grid must cover f0 +/- 5*gamma.
inline Spectrum synth_spectrum(double center_hz, double linewidth_hz, double amplitude,
                               double offset, double grid_start_hz, double grid_spacing_hz,
                               std::size_t n_points, double noise_rel, std::uint64_t seed) {
    if (!(linewidth_hz > 0.0)) throw validation_error("synth_spectrum: linewidth must be > 0");
    if (!(amplitude > 0.0)) throw validation_error("synth_spectrum: amplitude must be > 0");
    if (!(offset >= 0.0)) throw validation_error("synth_spectrum: offset must be >= 0");
    if (!(grid_spacing_hz > 0.0) || n_points < 16)
        throw validation_error("synth_spectrum: need spacing > 0 and >= 16 points");
    const double grid_end_hz = grid_start_hz + grid_spacing_hz * double(n_points - 1);
    if (grid_start_hz > center_hz - 5.0 * linewidth_hz ||
        grid_end_hz < center_hz + 5.0 * linewidth_hz)
        throw validation_error("synth_spectrum: grid must cover center +/- 5 linewidths");

    Spectrum s;
    s.freq_hz.resize(n_points);
    s.psd.resize(n_points);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double hw = 0.5 * linewidth_hz;
    for (std::size_t i = 0; i < n_points; ++i) {
        const double f = grid_start_hz + grid_spacing_hz * double(i);
        const double d = (f - center_hz) * (f - center_hz) + hw * hw;
        double p = offset + amplitude * hw * hw / d;
        if (noise_rel > 0.0) p *= 1.0 + noise_rel * gauss(rng);
        s.freq_hz[i] = f;
        s.psd[i] = std::max(0.0, p);
    }
    return s;
}

/// Pure dephasing rate gamma_m - gamma_E from the PSD linewidth and the
/// ring-down energy decay rate.
inline double decoherence_decomposition(double total_linewidth_hz, double energy_decay_hz) {
    if (!(energy_decay_hz > 0.0))
        throw validation_error("decoherence_decomposition: energy decay rate must be > 0");
    if (total_linewidth_hz < energy_decay_hz)
        throw validation_error(
            "decoherence_decomposition: total linewidth below energy decay rate "
            "(inconsistent measurement pair)");
    return total_linewidth_hz - energy_decay_hz;
}

}  // namespace memws
