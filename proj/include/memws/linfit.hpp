#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "memws/errors.hpp"

namespace memws {

/// Result of a two-parameter weighted linear least-squares solve.
struct LinFit2 {
    std::array<double, 2> params{};      // minimizer of sum w (y - a*p0 - b*p1)^2
    std::array<double, 4> covariance{};  // row-major 2x2, scaled by residual variance
    double residual_norm = 0.0;          // sqrt(sum w r^2)
    std::size_t n_points = 0;

    double stderr0() const { return std::sqrt(std::max(0.0, covariance[0])); }
    double stderr1() const { return std::sqrt(std::max(0.0, covariance[3])); }
};

/// Weighted least squares for y ~ a*p0 + b*p1 via the 2x2 normal equations.
/// Covariance is s^2 (X^T W X)^-1 with s^2 the weighted residual variance
/// (unit variance assumed when dof == 0).
inline LinFit2 linfit2(std::span<const double> a, std::span<const double> b,
                       std::span<const double> y, std::span<const double> w) {
    const std::size_t n = y.size();
    if (a.size() != n || b.size() != n || w.size() != n)
        throw validation_error("linfit2: input spans must have equal length");
    if (n < 2) throw validation_error("linfit2: need at least 2 points");

    double saa = 0, sab = 0, sbb = 0, say = 0, sby = 0;
    for (std::size_t i = 0; i < n; ++i) {
        saa += w[i] * a[i] * a[i];
        sab += w[i] * a[i] * b[i];
        sbb += w[i] * b[i] * b[i];
        say += w[i] * a[i] * y[i];
        sby += w[i] * b[i] * y[i];
    }
    const double det = saa * sbb - sab * sab;
    const double scale = std::max({std::abs(saa), std::abs(sbb), std::abs(sab)});
    if (!(std::abs(det) > 1e-12 * scale * scale))
        throw computation_error("linfit2: rank-deficient normal equations");

    LinFit2 fit;
    fit.n_points = n;
    fit.params[0] = (sbb * say - sab * sby) / det;
    fit.params[1] = (saa * sby - sab * say) / det;

    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.params[0] * a[i] - fit.params[1] * b[i];
        ss += w[i] * r * r;
    }
    fit.residual_norm = std::sqrt(ss);
    const double dof = double(n) - 2.0;
    const double s2 = dof > 0 ? ss / dof : 1.0;
    fit.covariance = {s2 * sbb / det, -s2 * sab / det, -s2 * sab / det, s2 * saa / det};
    return fit;
}

/// Ordinary straight-line fit y ~ slope*x + intercept (unit weights).
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double intercept_stderr = 0.0;
    double residual_norm = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (y.size() != n) throw validation_error("fit_line: input spans must have equal length");
    if (n < 2) throw validation_error("fit_line: need at least 2 points");
    // Centered form: immune to the cancellation that plain normal equations
    // suffer when |intercept| dwarfs the slope contribution.
    double xm = 0, ym = 0;
    for (std::size_t i = 0; i < n; ++i) {
        xm += x[i];
        ym += y[i];
    }
    xm /= double(n);
    ym /= double(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - xm) * (x[i] - xm);
        sxy += (x[i] - xm) * (y[i] - ym);
    }
    if (!(sxx > 0.0)) throw computation_error("fit_line: degenerate abscissa");

    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = ym - fit.slope * xm;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.slope * x[i] - fit.intercept;
        ss += r * r;
    }
    fit.residual_norm = std::sqrt(ss);
    const double dof = double(n) - 2.0;
    const double s2 = dof > 0 ? ss / dof : 0.0;
    fit.slope_stderr = std::sqrt(s2 / sxx);
    fit.intercept_stderr = std::sqrt(s2 * (1.0 / double(n) + xm * xm / sxx));
    return fit;
}

}  // namespace memws
