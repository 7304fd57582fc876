#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "memws/errors.hpp"
#include "memws/hungarian.hpp"
#include "memws/linfit.hpp"
#include "memws/membrane.hpp"

namespace memws {

/// One measured (or predicted) out-of-plane mode.
struct ModeRecord {
    std::optional<ModeIndex> index;
    double freq_hz = 0.0;
    std::optional<double> linewidth_hz;
    std::optional<double> quality_factor;
    double weight = 1.0;

    void validate() const {
        if (!(freq_hz > 0.0)) throw validation_error("ModeRecord: frequency must be > 0");
        if (quality_factor && !(*quality_factor > 0.0))
            throw validation_error("ModeRecord: Q must be > 0 when present");
        if (!(weight > 0.0)) throw validation_error("ModeRecord: weight must be > 0");
        if (index) index->validate();
    }
};

/// Collective biaxial-stress fit over an indexed mode table.
struct StressFitResult {
    double stress_x_pa = 0.0;
    double stress_y_pa = 0.0;
    std::array<double, 4> covariance_pa2{};  // row-major 2x2, symmetric PSD
    double r_squared = 0.0;                  // computed in frequency space
    std::vector<double> residuals_hz;        // f_meas - f_pred, input order
    std::vector<double> predicted_hz;
};

/// Candidate (m,n) list with model frequencies below a cutoff, sorted by
/// predicted frequency.
struct ModeCandidate {
    ModeIndex index;
    double freq_hz;
};

inline std::vector<ModeCandidate> enumerate_candidates(const MembraneSpec& spec,
                                                       double max_freq_hz) {
    spec.validate();
    if (!(max_freq_hz > 0.0))
        throw validation_error("enumerate_candidates: cutoff must be > 0");
    std::vector<ModeCandidate> out;
    for (int m = 1; mode_frequency(spec, {m, 1}) <= max_freq_hz; ++m)
        for (int n = 1; mode_frequency(spec, {m, n}) <= max_freq_hz; ++n)
            out.push_back({{m, n}, mode_frequency(spec, {m, n})});
    std::sort(out.begin(), out.end(),
              [](const ModeCandidate& a, const ModeCandidate& b) { return a.freq_hz < b.freq_hz; });
    return out;
}

struct AssignmentResult {
    std::vector<ModeRecord> modes;       // input order, indices filled in
    std::vector<std::string> warnings;
};

/// Pair each measured frequency with a unique (m,n) by minimal-cost
/// matching against the model of spec_guess. Candidates run up to
/// max(frequencies) * cutoff_factor. Near-degenerate pairs are oriented so
/// that with stress_x < stress_y the lower frequency of a split pair takes
/// the index with m > n (and the mirror rule for stress_x > stress_y).
inline AssignmentResult assign_indices(const std::vector<double>& frequencies_hz,
                                       const MembraneSpec& spec_guess,
                                       double cutoff_factor = 1.05) {
    spec_guess.validate();
    if (frequencies_hz.empty())
        throw validation_error("assign_indices: no frequencies given");
    if (!(cutoff_factor >= 1.0))
        throw validation_error("assign_indices: cutoff factor must be >= 1");
    for (double f : frequencies_hz)
        if (!(f > 0.0)) throw validation_error("assign_indices: frequencies must be > 0");
    if (!std::is_sorted(frequencies_hz.begin(), frequencies_hz.end()))
        throw validation_error("assign_indices: frequencies must be sorted ascending");

    AssignmentResult result;
    const double fmax = frequencies_hz.back();
    const auto candidates = enumerate_candidates(spec_guess, fmax * cutoff_factor);
    if (candidates.size() < frequencies_hz.size())
        throw computation_error("assign_indices: more measured modes than model candidates below cutoff");

    for (std::size_t i = 0; i + 1 < frequencies_hz.size(); ++i)
        if (frequencies_hz[i + 1] - frequencies_hz[i] < 1.0)
            result.warnings.push_back("duplicate frequencies within 1 Hz near " +
                                      std::to_string(frequencies_hz[i]) + " Hz; both assigned");

    const std::size_t nr = frequencies_hz.size();
    const std::size_t nc = candidates.size();
    std::vector<double> cost(nr * nc);
    for (std::size_t i = 0; i < nr; ++i)
        for (std::size_t j = 0; j < nc; ++j)
            cost[i * nc + j] = std::abs(frequencies_hz[i] - candidates[j].freq_hz);
    std::vector<std::size_t> match = min_cost_assignment(cost, nr, nc);

    // Tie-break within assigned transposed pairs: orientation per the sign
    // of the stress anisotropy, applied only when it does not raise cost.
    const double sx = spec_guess.stress_x_pa, sy = spec_guess.stress_y_pa;
    if (sx != sy) {
        for (std::size_t i = 0; i < nr; ++i) {
            const ModeIndex a = candidates[match[i]].index;
            if (a.m == a.n) continue;
            for (std::size_t k = i + 1; k < nr; ++k) {
                const ModeIndex b = candidates[match[k]].index;
                if (!(b.m == a.n && b.n == a.m)) continue;
                // rows are sorted, so i holds the lower measured frequency
                const bool want_mgtn_low = sx < sy;
                const bool low_has_mgtn = a.m > a.n;
                if (want_mgtn_low != low_has_mgtn) {
                    const double before = cost[i * nc + match[i]] + cost[k * nc + match[k]];
                    const double after = cost[i * nc + match[k]] + cost[k * nc + match[i]];
                    if (after <= before) std::swap(match[i], match[k]);
                }
                break;
            }
        }
    } else {
        for (std::size_t i = 0; i < nr; ++i) {
            const ModeIndex a = candidates[match[i]].index;
            if (a.m != a.n)
                for (std::size_t k = i + 1; k < nr; ++k) {
                    const ModeIndex b = candidates[match[k]].index;
                    if (b.m == a.n && b.n == a.m) {
                        result.warnings.push_back(
                            "isotropic guess: pair (" + std::to_string(a.m) + "," +
                            std::to_string(a.n) + ")/(" + std::to_string(b.m) + "," +
                            std::to_string(b.n) + ") orientation unspecified");
                        break;
                    }
                }
        }
    }

    result.modes.reserve(nr);
    for (std::size_t i = 0; i < nr; ++i) {
        ModeRecord rec;
        rec.freq_hz = frequencies_hz[i];
        rec.index = candidates[match[i]].index;
        result.modes.push_back(rec);
    }
    return result;
}

/// Weighted least squares of f^2 = (m^2 sx + n^2 sy) / (4 L^2 rho), which is
/// exactly linear in (sx, sy). R^2 is evaluated in frequency space; the
/// parameter covariance is propagated from the squared-frequency solve.
inline StressFitResult fit_biaxial_stress(const std::vector<ModeRecord>& modes,
                                          double side_length_m, double density_kg_m3) {
    if (!(side_length_m > 0.0))
        throw validation_error("fit_biaxial_stress: side length must be > 0");
    if (!(density_kg_m3 > 0.0))
        throw validation_error("fit_biaxial_stress: density must be > 0");
    if (modes.size() < 2)
        throw validation_error("fit_biaxial_stress: need at least 2 indexed modes");

    const double denom = 4.0 * side_length_m * side_length_m * density_kg_m3;
    std::vector<double> a, b, y, w;
    for (const ModeRecord& rec : modes) {
        rec.validate();
        if (!rec.index)
            throw validation_error("fit_biaxial_stress: all modes must carry (m,n) indices");
        a.push_back(double(rec.index->m) * rec.index->m / denom);
        b.push_back(double(rec.index->n) * rec.index->n / denom);
        y.push_back(rec.freq_hz * rec.freq_hz);
        w.push_back(rec.weight);
    }

    // Rank check: rows must span two independent (m^2, n^2) directions.
    bool independent = false;
    for (std::size_t i = 1; i < a.size() && !independent; ++i)
        if (std::abs(a[0] * b[i] - a[i] * b[0]) > 1e-12 * std::abs(a[0] * b[i] + a[i] * b[0] + 1e-300))
            independent = true;
    if (!independent)
        throw computation_error(
            "fit_biaxial_stress: all modes share one (m^2,n^2) direction; stresses are not separable");

    const LinFit2 fit = linfit2(a, b, y, w);
    if (!(fit.params[0] > 0.0) || !(fit.params[1] > 0.0))
        throw computation_error(
            "fit_biaxial_stress: fitted stress not positive; check density and side length");

    StressFitResult out;
    out.stress_x_pa = fit.params[0];
    out.stress_y_pa = fit.params[1];
    out.covariance_pa2 = fit.covariance;

    double mean_f = 0.0;
    for (const ModeRecord& rec : modes) mean_f += rec.freq_hz;
    mean_f /= double(modes.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i) {
        const double f2 = a[i] * out.stress_x_pa + b[i] * out.stress_y_pa;
        const double fp = std::sqrt(std::max(0.0, f2));
        out.predicted_hz.push_back(fp);
        const double r = modes[i].freq_hz - fp;
        out.residuals_hz.push_back(r);
        ss_res += r * r;
        ss_tot += (modes[i].freq_hz - mean_f) * (modes[i].freq_hz - mean_f);
    }
    out.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
    return out;
}

/// One-standard-deviation stress uncertainties from the fit covariance.
inline std::pair<double, double> stress_resolution(const StressFitResult& result) {
    const double vx = result.covariance_pa2[0];
    const double vy = result.covariance_pa2[3];
    if (vx < 0.0 || vy < 0.0)
        throw validation_error("stress_resolution: covariance diagonal must be non-negative");
    return {std::sqrt(vx), std::sqrt(vy)};
}

}  // namespace memws
