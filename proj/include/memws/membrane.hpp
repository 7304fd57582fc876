#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "memws/errors.hpp"

namespace memws {

/// Geometry, material, and biaxial stress state of one square membrane.
/// All fields are SI base units.
struct MembraneSpec {
    double side_length_m = 0.0;
    double thickness_m = 0.0;
    double density_kg_m3 = 0.0;
    double stress_x_pa = 0.0;
    double stress_y_pa = 0.0;
    double youngs_modulus_pa = 0.0;
    double poisson_ratio = 0.0;

    // Throws validation_error naming the offending field. Returns
    // non-fatal warnings (thin-plate validity).
    std::vector<std::string> validate() const {
        if (!(side_length_m > 0.0))
            throw validation_error("MembraneSpec.side_length: must be > 0");
        if (!(thickness_m > 0.0))
            throw validation_error("MembraneSpec.thickness: must be > 0");
        if (!(density_kg_m3 > 0.0))
            throw validation_error("MembraneSpec.density: must be > 0");
        if (!(stress_x_pa > 0.0))
            throw validation_error("MembraneSpec.stress_x: taut membrane requires > 0");
        if (!(stress_y_pa > 0.0))
            throw validation_error("MembraneSpec.stress_y: taut membrane requires > 0");
        if (!(youngs_modulus_pa > 0.0))
            throw validation_error("MembraneSpec.youngs_modulus: must be > 0");
        if (!(poisson_ratio >= 0.0 && poisson_ratio < 0.5))
            throw validation_error("MembraneSpec.poisson_ratio: must lie in [0, 0.5)");
        std::vector<std::string> warnings;
        if (thickness_m / side_length_m > 0.01)
            warnings.push_back("thickness/side_length > 0.01: thin-membrane model validity is marginal");
        return warnings;
    }

    double mean_stress_pa() const { return 0.5 * (stress_x_pa + stress_y_pa); }
};

/// Antinode counts of an out-of-plane mode along x and y.
struct ModeIndex {
    int m = 1;
    int n = 1;

    void validate() const {
        if (m < 1) throw validation_error("ModeIndex.m: must be >= 1");
        if (n < 1) throw validation_error("ModeIndex.n: must be >= 1");
    }
    ModeIndex transposed() const { return {n, m}; }
    int index_sum_sq() const { return m * m + n * n; }
    bool operator==(const ModeIndex&) const = default;
};

/// Out-of-plane eigenfrequency of mode (m,n) under biaxial tension,
/// f = (1/2L) sqrt((m^2 sx + n^2 sy)/rho). Reduces to the familiar
/// sqrt((m^2+n^2) s / (4 L^2 rho)) when sx == sy.
inline double mode_frequency(const MembraneSpec& spec, ModeIndex index) {
    spec.validate();
    index.validate();
    const double num = double(index.m) * index.m * spec.stress_x_pa +
                       double(index.n) * index.n * spec.stress_y_pa;
    return std::sqrt(num / spec.density_kg_m3) / (2.0 * spec.side_length_m);
}

/// Frequency split f(n,m) - f(m,n) of a degeneracy-broken pair.
/// Positive when stress_y > stress_x and m > n; zero under isotropic stress.
inline double pair_splitting(const MembraneSpec& spec, ModeIndex index) {
    index.validate();
    if (index.m == index.n)
        throw validation_error("pair_splitting: (m,m) is a single self-symmetric mode, not a pair");
    return mode_frequency(spec, index.transposed()) - mode_frequency(spec, index);
}

/// Bending rigidity D = E h^3 / (12 (1 - nu^2)).
inline double bending_rigidity(const MembraneSpec& spec) {
    spec.validate();
    const double h = spec.thickness_m;
    return spec.youngs_modulus_pa * h * h * h /
           (12.0 * (1.0 - spec.poisson_ratio * spec.poisson_ratio));
}

/// Dissipation-dilution factor of mode (m,n):
///   lambda = sqrt(4 D / (sigma_mean h L^2))
///   D_Q    = (1/lambda) [1 + pi^2 lambda (m^2+n^2) / 4]^-1
/// Monotonically decreasing in m^2+n^2.
inline double dilution_factor(const MembraneSpec& spec, ModeIndex index, double mean_stress_pa) {
    index.validate();
    if (!(mean_stress_pa > 0.0))
        throw validation_error("dilution_factor: mean stress must be > 0");
    const double d = bending_rigidity(spec);
    const double lambda = std::sqrt(4.0 * d / (mean_stress_pa * spec.thickness_m *
                                               spec.side_length_m * spec.side_length_m));
    const double pi2 = std::numbers::pi * std::numbers::pi;
    return (1.0 / lambda) / (1.0 + pi2 * lambda * index.index_sum_sq() / 4.0);
}

/// Dilution factor with the default mean-stress rule (sx+sy)/2.
inline double dilution_factor(const MembraneSpec& spec, ModeIndex index) {
    return dilution_factor(spec, index, spec.mean_stress_pa());
}

/// Ideal-membrane mode shape sin(m pi x / L) sin(n pi y / L), zero on the
/// boundary, |value| <= 1.
inline double mode_shape(ModeIndex index, double x, double y, double side_length_m) {
    index.validate();
    if (!(side_length_m > 0.0))
        throw validation_error("mode_shape: side length must be > 0");
    if (x < 0.0 || x > side_length_m || y < 0.0 || y > side_length_m)
        throw validation_error("mode_shape: point lies outside the membrane");
    if (x == 0.0 || y == 0.0 || x == side_length_m || y == side_length_m)
        return 0.0;  // clamped edge, exactly
    const double pi = std::numbers::pi;
    return std::sin(index.m * pi * x / side_length_m) *
           std::sin(index.n * pi * y / side_length_m);
}

/// Mode shape sampled on a uniform (resolution x resolution) grid over
/// [0,L] x [0,L], peak magnitude normalized to 1.
struct ModeShapeField {
    ModeIndex index;
    std::size_t resolution = 0;       // points per side, endpoints included
    double side_length_m = 0.0;
    std::vector<double> amplitude;    // row-major, amplitude[iy*resolution + ix]

    double at(std::size_t ix, std::size_t iy) const { return amplitude[iy * resolution + ix]; }
    double x_of(std::size_t ix) const { return side_length_m * double(ix) / double(resolution - 1); }
    double y_of(std::size_t iy) const { return side_length_m * double(iy) / double(resolution - 1); }
};

inline void normalize_peak(std::vector<double>& values) {
    double peak = 0.0;
    for (double v : values) peak = std::max(peak, std::abs(v));
    if (peak > 0.0)
        for (double& v : values) v /= peak;
}

inline ModeShapeField sample_mode_shape(ModeIndex index, double side_length_m,
                                        std::size_t resolution) {
    if (resolution < 3)
        throw validation_error("sample_mode_shape: resolution must be >= 3");
    ModeShapeField field{index, resolution, side_length_m, {}};
    field.amplitude.resize(resolution * resolution);
    for (std::size_t iy = 0; iy < resolution; ++iy)
        for (std::size_t ix = 0; ix < resolution; ++ix)
            field.amplitude[iy * resolution + ix] =
                mode_shape(index, field.x_of(ix), field.y_of(iy), side_length_m);
    normalize_peak(field.amplitude);
    return field;
}

/// Weighted superposition alpha*a + sign*beta*b, renormalized to peak
/// magnitude 1. Grids must match exactly.
inline ModeShapeField superpose_shapes(double alpha, double beta, const ModeShapeField& a,
                                       const ModeShapeField& b, int sign) {
    if (sign != 1 && sign != -1)
        throw validation_error("superpose_shapes: sign must be +1 or -1");
    if (a.resolution != b.resolution || a.side_length_m != b.side_length_m)
        throw validation_error("superpose_shapes: mismatched sample grids");
    ModeShapeField out = a;
    for (std::size_t i = 0; i < out.amplitude.size(); ++i)
        out.amplitude[i] = alpha * a.amplitude[i] + sign * beta * b.amplitude[i];
    normalize_peak(out.amplitude);
    return out;
}

}  // namespace memws
