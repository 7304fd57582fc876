#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "memws/errors.hpp"
#include "memws/rk4.hpp"
#include "memws/spectral.hpp"

namespace memws {

// Rate conventions used throughout this module: frequencies (cavity, modes,
// detunings, couplings) are cyclic (Hz) in all interfaces and converted to
// angular internally where they set oscillation phases. Mechanical decay
// rates gamma follow the ring-down contract: energy decays as
// exp(-gamma_E t), amplitude as exp(-gamma t / 2), with gamma in 1/s as
// given — no 2*pi factor.

inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct MechModeParams {
    double freq_hz = 0.0;            // omega_m / 2pi
    double linewidth_hz = 0.0;       // gamma_m (PSD full width)
    double energy_decay_hz = 0.0;    // gamma_E from ring-down
    double coupling_g0_hz = 0.0;     // single-photon coupling, config-supplied
    double thermal_occupation = 0.0; // n_th

    void validate() const {
        if (!(freq_hz > 0.0)) throw validation_error("MechModeParams.freq: must be > 0");
        if (!(energy_decay_hz > 0.0))
            throw validation_error("MechModeParams.energy_decay: must be > 0");
        if (linewidth_hz < energy_decay_hz)
            throw validation_error("MechModeParams.linewidth: must be >= energy decay rate");
        if (thermal_occupation < 0.0)
            throw validation_error("MechModeParams.thermal_occupation: must be >= 0");
        if (coupling_g0_hz < 0.0)
            throw validation_error("MechModeParams.coupling_g0: must be >= 0");
    }
};

/// One microwave cavity coupled to two near-degenerate mechanical modes.
struct EMSystem {
    double cavity_freq_hz = 0.0;
    double kappa_ext_hz = 0.0;
    double kappa_int_hz = 0.0;
    MechModeParams mode1, mode2;

    double kappa_tot_hz() const { return kappa_ext_hz + kappa_int_hz; }

    std::vector<std::string> validate() const {
        if (!(cavity_freq_hz > 0.0)) throw validation_error("EMSystem.cavity_freq: must be > 0");
        if (!(kappa_ext_hz > 0.0)) throw validation_error("EMSystem.kappa_ext: must be > 0");
        if (!(kappa_int_hz > 0.0)) throw validation_error("EMSystem.kappa_int: must be > 0");
        mode1.validate();
        mode2.validate();
        std::vector<std::string> warnings;
        if (kappa_tot_hz() >= std::min(mode1.freq_hz, mode2.freq_hz))
            warnings.push_back("cavity linewidth exceeds a mechanical frequency: "
                               "not in the resolved-sideband regime");
        return warnings;
    }
};

struct Interval {
    double start_s = 0.0;
    double end_s = 0.0;
};

struct PumpTone {
    double freq_hz = 0.0;
    double amplitude = 0.0;  // sqrt of steady intracavity photons driven by this tone
    double phase_rad = 0.0;
    std::vector<Interval> on_intervals;

    void validate() const {
        if (amplitude < 0.0) throw validation_error("PumpTone.amplitude: must be >= 0");
        double prev_end = -std::numeric_limits<double>::infinity();
        for (const Interval& iv : on_intervals) {
            if (!(iv.end_s > iv.start_s))
                throw validation_error("PumpTone: empty or inverted on-interval");
            if (iv.start_s < prev_end)
                throw validation_error("PumpTone: on-intervals must be disjoint and ordered");
            prev_end = iv.end_s;
        }
    }
};

enum class ProtocolPhase { cooling, excitation, swapping, readout };

inline const char* phase_name(ProtocolPhase p) {
    switch (p) {
        case ProtocolPhase::cooling: return "cooling";
        case ProtocolPhase::excitation: return "excitation";
        case ProtocolPhase::swapping: return "swapping";
        default: return "readout";
    }
}

/// Which cavity-induced loss channels the eliminated swap model carries.
/// `resonant` keeps only the two overlapping beam-splitter sidebands;
/// `full` adds the residual (cross and Stokes) sidebands of both tones.
enum class SwapLossBudget { none, resonant, full };

/// How a configured "swap period" is read: `exchange` takes it as the time
/// of the first complete state exchange (1/(4J)); `occupancy` as the full
/// occupancy-oscillation period (1/(2J)).
enum class PeriodConvention { exchange, occupancy };

/// Timed four-phase pump program: cooling, excitation, swapping, readout.
struct ProtocolSchedule {
    double cooling_duration_s = 1.0;
    double excitation_duration_s = 0.5;
    double swapping_duration_s = 8.0;
    double readout_duration_s = 2.0;

    double swap_detuning_hz = 1.8e6;  // Delta, pump offset from the cavity
    double swap_period_s = 2.1;       // interpreted per period_convention
    PeriodConvention period_convention = PeriodConvention::exchange;
    SwapLossBudget loss_budget = SwapLossBudget::full;
    double swap_pump_amplitude = 0.0;  // 0 = calibrate G1=G2 from swap_period_s
    double swap_tone_mismatch_hz = 0.0;
    bool explicit_cavity_swap = false;

    double cooling_pump_amplitude = 1.0;
    double excitation_pump_amplitude = 1.0;
    double excitation_phonons = 1000.0;

    double total_duration_s() const {
        return cooling_duration_s + excitation_duration_s + swapping_duration_s +
               readout_duration_s;
    }
    double phase_start_s(ProtocolPhase p) const {
        switch (p) {
            case ProtocolPhase::cooling: return 0.0;
            case ProtocolPhase::excitation: return cooling_duration_s;
            case ProtocolPhase::swapping: return cooling_duration_s + excitation_duration_s;
            default:
                return cooling_duration_s + excitation_duration_s + swapping_duration_s;
        }
    }

    std::vector<std::string> validate(const EMSystem& system) const {
        auto warnings = system.validate();
        if (!(cooling_duration_s > 0.0) || !(excitation_duration_s > 0.0) ||
            !(swapping_duration_s > 0.0) || !(readout_duration_s > 0.0))
            throw validation_error("ProtocolSchedule: all phase durations must be > 0");
        if (!(swap_period_s > 0.0) && !(swap_pump_amplitude > 0.0))
            throw validation_error("ProtocolSchedule: need swap_period_s > 0 or pump amplitude");
        if (swap_detuning_hz != 0.0 &&
            std::abs(swap_detuning_hz) < 5.0 * system.kappa_tot_hz())
            warnings.push_back("swap detuning below 5x cavity linewidth: adiabatic "
                               "elimination is marginal");
        return warnings;
    }

    /// Red cooling tones, one per mode, on during the cooling phase.
    std::vector<PumpTone> cooling_tones(const EMSystem& s) const {
        const Interval on{phase_start_s(ProtocolPhase::cooling),
                          phase_start_s(ProtocolPhase::excitation)};
        return {{s.cavity_freq_hz - s.mode1.freq_hz, cooling_pump_amplitude, 0.0, {on}},
                {s.cavity_freq_hz - s.mode2.freq_hz, cooling_pump_amplitude, 0.0, {on}}};
    }

    /// Swap tones whose upper sidebands overlap at cavity - Delta. Their
    /// separation equals the mode splitting exactly; a nonzero mismatch is
    /// an explicit detuning-robustness knob applied to tone 2.
    std::vector<PumpTone> swap_tones(const EMSystem& s) const {
        const Interval on{phase_start_s(ProtocolPhase::swapping),
                          phase_start_s(ProtocolPhase::readout)};
        const double overlap = s.cavity_freq_hz - swap_detuning_hz;
        return {{overlap - s.mode1.freq_hz, swap_pump_amplitude, 0.0, {on}},
                {overlap - s.mode2.freq_hz - swap_tone_mismatch_hz, swap_pump_amplitude,
                 0.0, {on}}};
    }
};

/// One motional sideband of a pump tone.
struct Sideband {
    std::size_t tone_index = 0;
    int mode = 1;      // 1 or 2
    int sign = +1;     // tone + sign * omega_m
    double freq_hz = 0.0;
};

struct SidebandMap {
    std::vector<Sideband> sidebands;
    std::vector<std::pair<std::size_t, std::size_t>> coincident;  // index pairs
};

/// All tone +/- omega_m sidebands (2 x modes x tones), with pairs closer
/// than `coincidence_window_hz` annotated.
inline SidebandMap sideband_frequencies(const EMSystem& system,
                                        const std::vector<PumpTone>& tones,
                                        double coincidence_window_hz = 1.0) {
    system.validate();
    if (tones.empty()) throw validation_error("sideband_frequencies: need at least one tone");
    SidebandMap map;
    for (std::size_t i = 0; i < tones.size(); ++i) {
        for (int mode = 1; mode <= 2; ++mode) {
            const double fm = mode == 1 ? system.mode1.freq_hz : system.mode2.freq_hz;
            for (int sign : {-1, +1})
                map.sidebands.push_back({i, mode, sign, tones[i].freq_hz + sign * fm});
        }
    }
    for (std::size_t i = 0; i < map.sidebands.size(); ++i)
        for (std::size_t j = i + 1; j < map.sidebands.size(); ++j)
            if (std::abs(map.sidebands[i].freq_hz - map.sidebands[j].freq_hz) <=
                coincidence_window_hz)
                map.coincident.emplace_back(i, j);
    return map;
}

/// Cavity-mediated beam-splitter rate J (Hz) for the swap configuration:
/// J = G1 G2 Delta / (Delta^2 + (kappa/2)^2), G_i = g0_i * pump amplitude.
/// When the schedule calibrates by period instead, J follows the period
/// convention: full occupancy oscillation period = 1/(2J), first complete
/// exchange at 1/(4J).
inline double effective_swap_coupling(const EMSystem& system, const ProtocolSchedule& schedule) {
    schedule.validate(system);
    if (schedule.swap_detuning_hz == 0.0)
        throw computation_error("effective_swap_coupling: zero detuning divides out; "
                                "use a resonant cavity model instead");
    if (schedule.swap_pump_amplitude > 0.0) {
        const double g1 = system.mode1.coupling_g0_hz * schedule.swap_pump_amplitude;
        const double g2 = system.mode2.coupling_g0_hz * schedule.swap_pump_amplitude;
        return g1 * g2 / schedule.swap_detuning_hz;
    }
    return schedule.period_convention == PeriodConvention::exchange
               ? 1.0 / (4.0 * schedule.swap_period_s)
               : 1.0 / (2.0 * schedule.swap_period_s);
}

/// Full occupancy-oscillation period for a given beam-splitter rate.
inline double swap_period_from_coupling(double j_hz) {
    if (!(j_hz > 0.0)) throw validation_error("swap_period_from_coupling: J must be > 0");
    return 1.0 / (2.0 * j_hz);
}

struct InitialState {
    std::complex<double> cavity{0.0, 0.0};
    std::complex<double> b1{0.0, 0.0};
    std::complex<double> b2{0.0, 0.0};
};

struct StepControl {
    double dt_s = 0.0;        // 0 = auto per phase
    double store_dt_s = 0.0;  // 0 = auto (~2000 samples per phase)
    double steps_per_period = 20.0;
};

struct SimTrace {
    std::vector<double> time_s;
    std::vector<std::complex<double>> cavity, b1, b2;
    std::vector<ProtocolPhase> phase;
    std::vector<std::pair<double, ProtocolPhase>> boundaries;  // phase start markers

    double occ1(std::size_t i) const { return std::norm(b1[i]); }
    double occ2(std::size_t i) const { return std::norm(b2[i]); }
    std::size_t size() const { return time_s.size(); }
};

namespace detail {

// Per-mode optical damping rates (1/s) of the eliminated swap model.
// Angular-frequency ratios throughout; `j_rad` fixes the overall G scale.
struct SwapRates {
    double j_rad = 0.0;       // coherent beam-splitter rate, rad/s
    double j_diss = 0.0;      // dissipative coupling through the cavity, 1/s
    double gamma_opt1 = 0.0;  // cavity-induced damping, 1/s
    double gamma_opt2 = 0.0;
};

inline SwapRates swap_rates(const EMSystem& sys, const ProtocolSchedule& sched, double j_hz) {
    SwapRates r;
    r.j_rad = two_pi * j_hz;
    if (sched.loss_budget == SwapLossBudget::none) return r;

    const double kap = sys.kappa_tot_hz();
    const double del = sched.swap_detuning_hz;
    const double wm1 = sys.mode1.freq_hz, wm2 = sys.mode2.freq_hz;

    r.j_diss = r.j_rad * kap / (2.0 * del);
    auto lor = [&](double det) { return del * del / (det * det); };

    if (sched.loss_budget == SwapLossBudget::resonant) {
        r.gamma_opt1 = r.j_rad * kap / del;
        r.gamma_opt2 = r.j_rad * kap / del;
        return r;
    }
    // Full budget: both tones act on both modes; each anti-Stokes sideband
    // cools, each Stokes sideband heats. Equal pump amplitudes assumed for
    // the period-calibrated case.
    const double dm = wm2 - wm1;
    r.gamma_opt1 = r.j_rad * (kap / del) *
                   (lor(del) + lor(del + dm) - lor(del + 2.0 * wm1) - lor(del + wm1 + wm2));
    r.gamma_opt2 = r.j_rad * (kap / del) *
                   (lor(del) + lor(del - dm) - lor(del + 2.0 * wm2) - lor(del + wm1 + wm2));
    return r;
}

struct PhasePlan {
    ProtocolPhase phase;
    double duration = 0.0;
    bool has_cavity = false;  // cavity amplitude lives in the ODE state
    double dt = 0.0;
    double store_dt = 0.0;
};

}  // namespace detail

/// Integrate the four-phase protocol in the rotating frame of each mode.
/// The cavity is explicit during cooling/excitation/readout and adiabatically
/// eliminated during the swap unless the schedule requests otherwise.
/// Undriven mechanical amplitudes decay at gamma_m/2; during the swap each
/// mode damps at its energy decay rate gamma_E plus the configured
/// cavity-induced budget. Deterministic for fixed inputs.
inline SimTrace simulate(const EMSystem& system, const ProtocolSchedule& schedule,
                         const InitialState& initial, const StepControl& control = {}) {
    schedule.validate(system);

    const double kap_rad = two_pi * system.kappa_tot_hz();
    const double del_rad = two_pi * schedule.swap_detuning_hz;
    const double j_hz = effective_swap_coupling(system, schedule);
    const detail::SwapRates rates = detail::swap_rates(system, schedule, j_hz);
    const double mismatch_rad = two_pi * schedule.swap_tone_mismatch_hz;

    const double g_cool1 = two_pi * system.mode1.coupling_g0_hz * schedule.cooling_pump_amplitude;
    const double g_cool2 = two_pi * system.mode2.coupling_g0_hz * schedule.cooling_pump_amplitude;
    const double g_exc = two_pi * system.mode1.coupling_g0_hz * schedule.excitation_pump_amplitude;

    // Swap-tone couplings for the explicit-cavity variant, G1 = G2 chosen to
    // reproduce the calibrated J = G1 G2 / Delta.
    const double g_swap =
        del_rad != 0.0 ? std::sqrt(std::abs(rates.j_rad * del_rad)) : 0.0;

    // Excitation drive strength targeting schedule.excitation_phonons.
    double exc_drive = 0.0;
    if (schedule.excitation_phonons > 0.0 && g_exc > 0.0) {
        const double gamma1 = system.mode1.linewidth_hz;
        const double gamma_eff = gamma1 + 4.0 * g_exc * g_exc / kap_rad;
        const double ramp = 1.0 - std::exp(-0.5 * gamma_eff * schedule.excitation_duration_s);
        exc_drive = std::sqrt(schedule.excitation_phonons) * (0.5 * gamma_eff) * kap_rad /
                    (2.0 * g_exc * std::max(ramp, 1e-12));
    }

    std::vector<detail::PhasePlan> plans;
    for (ProtocolPhase p : {ProtocolPhase::cooling, ProtocolPhase::excitation,
                            ProtocolPhase::swapping, ProtocolPhase::readout}) {
        detail::PhasePlan plan;
        plan.phase = p;
        switch (p) {
            case ProtocolPhase::cooling: plan.duration = schedule.cooling_duration_s; break;
            case ProtocolPhase::excitation: plan.duration = schedule.excitation_duration_s; break;
            case ProtocolPhase::swapping: plan.duration = schedule.swapping_duration_s; break;
            case ProtocolPhase::readout: plan.duration = schedule.readout_duration_s; break;
        }
        // The cavity joins the ODE state only where a tone couples to it;
        // otherwise it evolves (and is displayed) as a bare decay.
        switch (p) {
            case ProtocolPhase::cooling:
                plan.has_cavity = g_cool1 > 0.0 || g_cool2 > 0.0;
                break;
            case ProtocolPhase::excitation:
                plan.has_cavity = g_exc > 0.0 && exc_drive != 0.0;
                break;
            case ProtocolPhase::swapping:
                plan.has_cavity = schedule.explicit_cavity_swap;
                break;
            case ProtocolPhase::readout:
                plan.has_cavity = false;
                break;
        }

        // Fastest retained rotating-frame frequency and stiffest rate.
        double f_osc = 0.0;
        double rate = std::max({system.mode1.linewidth_hz, system.mode2.linewidth_hz, 1e-9});
        if (p == ProtocolPhase::swapping) {
            f_osc = std::max(j_hz, std::abs(schedule.swap_tone_mismatch_hz));
            rate = std::max({rates.gamma_opt1 + system.mode1.energy_decay_hz,
                             rates.gamma_opt2 + system.mode2.energy_decay_hz, 1e-9});
            if (schedule.explicit_cavity_swap)
                f_osc = std::max(f_osc, std::abs(schedule.swap_detuning_hz));
        }
        if (plan.has_cavity) rate = std::max(rate, 0.5 * kap_rad);

        plan.store_dt = control.store_dt_s > 0.0 ? control.store_dt_s
                                                 : plan.duration / 2000.0;
        double dt = plan.duration / 64.0;
        dt = std::min(dt, plan.store_dt);
        if (f_osc > 0.0) dt = std::min(dt, 1.0 / (control.steps_per_period * f_osc));
        dt = std::min(dt, 0.5 / rate);
        if (p == ProtocolPhase::swapping && j_hz > 0.0)
            dt = std::min(dt, 1.0 / (4000.0 * j_hz));  // accuracy of the exchange peak

        if (control.dt_s > 0.0) {
            if (control.dt_s > dt * (1.0 + 1e-12))
                throw validation_error("simulate: step control violation in " +
                                       std::string(phase_name(p)) + " phase; requires dt <= " +
                                       std::to_string(dt) + " s");
            dt = control.dt_s;
        }
        plan.dt = dt;
        plans.push_back(plan);
    }

    SimTrace trace;
    std::complex<double> a = initial.cavity, b1 = initial.b1, b2 = initial.b2;
    double t0 = 0.0;

    for (const auto& plan : plans) {
        trace.boundaries.emplace_back(t0, plan.phase);

        const double gm1 = system.mode1.linewidth_hz;
        const double gm2 = system.mode2.linewidth_hz;
        const double ge1 = system.mode1.energy_decay_hz;
        const double ge2 = system.mode2.energy_decay_hz;
        const bool eliminated_swap =
            plan.phase == ProtocolPhase::swapping && !schedule.explicit_cavity_swap;

        Rk4::Rhs rhs;
        if (eliminated_swap) {
            const double gtot1 = ge1 + rates.gamma_opt1;
            const double gtot2 = ge2 + rates.gamma_opt2;
            rhs = [=](double t, const std::vector<double>& y, std::vector<double>& d) {
                const std::complex<double> v1(y[0], y[1]), v2(y[2], y[3]);
                const std::complex<double> coupling(-rates.j_diss, rates.j_rad);
                const std::complex<double> ph = std::polar(1.0, mismatch_rad * t);
                const std::complex<double> d1 = -0.5 * gtot1 * v1 + coupling * ph * v2;
                const std::complex<double> d2 = -0.5 * gtot2 * v2 + coupling * std::conj(ph) * v1;
                d[0] = d1.real();
                d[1] = d1.imag();
                d[2] = d2.real();
                d[3] = d2.imag();
            };
        } else if (!plan.has_cavity) {
            // No tone couples the cavity: the modes decay freely and the
            // cavity amplitude rings down independently (handled analytically).
            const double g1 = plan.phase == ProtocolPhase::swapping ? ge1 : gm1;
            const double g2 = plan.phase == ProtocolPhase::swapping ? ge2 : gm2;
            rhs = [=](double, const std::vector<double>& y, std::vector<double>& d) {
                d[0] = -0.5 * g1 * y[0];
                d[1] = -0.5 * g1 * y[1];
                d[2] = -0.5 * g2 * y[2];
                d[3] = -0.5 * g2 * y[3];
            };
        } else {
            const ProtocolPhase p = plan.phase;
            rhs = [=](double t, const std::vector<double>& y, std::vector<double>& d) {
                const std::complex<double> av(y[0], y[1]), v1(y[2], y[3]), v2(y[4], y[5]);
                std::complex<double> da{0.0, 0.0}, d1{0.0, 0.0}, d2{0.0, 0.0};
                const std::complex<double> im(0.0, 1.0);
                switch (p) {
                    case ProtocolPhase::cooling:
                        da = -0.5 * kap_rad * av - im * (g_cool1 * v1 + g_cool2 * v2);
                        d1 = -0.5 * gm1 * v1 - im * g_cool1 * av;
                        d2 = -0.5 * gm2 * v2 - im * g_cool2 * av;
                        break;
                    case ProtocolPhase::excitation:
                        da = -0.5 * kap_rad * av - im * g_exc * v1 - im * exc_drive;
                        d1 = -0.5 * gm1 * v1 - im * g_exc * av;
                        d2 = -0.5 * gm2 * v2;
                        break;
                    case ProtocolPhase::swapping: {
                        const std::complex<double> ph = std::polar(1.0, mismatch_rad * t);
                        da = -(im * del_rad + 0.5 * kap_rad) * av -
                             im * g_swap * (v1 + ph * v2);
                        d1 = -0.5 * ge1 * v1 - im * g_swap * av;
                        d2 = -0.5 * ge2 * v2 - im * g_swap * std::conj(ph) * av;
                        break;
                    }
                    case ProtocolPhase::readout:
                        da = -0.5 * kap_rad * av;
                        d1 = -0.5 * gm1 * v1;
                        d2 = -0.5 * gm2 * v2;
                        break;
                }
                d[0] = da.real();
                d[1] = da.imag();
                d[2] = d1.real();
                d[3] = d1.imag();
                d[4] = d2.real();
                d[5] = d2.imag();
            };
        }

        std::vector<double> y;
        if (plan.has_cavity)
            y = {a.real(), a.imag(), b1.real(), b1.imag(), b2.real(), b2.imag()};
        else
            y = {b1.real(), b1.imag(), b2.real(), b2.imag()};

        // Stride-based storage keeps the stored grid uniform within a phase.
        const auto stride = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(plan.store_dt / plan.dt)));
        std::size_t step_count = 0;
        const double phase_t0 = t0;
        const std::complex<double> a_entry = a;
        auto observe = [&](double t, const std::vector<double>& yy) {
            const bool due = step_count % stride == 0 || t >= plan.duration - 1e-15;
            ++step_count;
            if (!due) return;
            const double abs_t = phase_t0 + t;
            if (!trace.time_s.empty() &&
                abs_t <= trace.time_s.back() + 1e-15 * std::max(1.0, std::abs(abs_t)))
                return;  // phase boundaries would duplicate the time stamp
            std::complex<double> sa, s1, s2;
            if (plan.has_cavity) {
                sa = {yy[0], yy[1]};
                s1 = {yy[2], yy[3]};
                s2 = {yy[4], yy[5]};
            } else {
                s1 = {yy[0], yy[1]};
                s2 = {yy[2], yy[3]};
                if (eliminated_swap) {
                    sa = -std::complex<double>(0.0, 1.0) * g_swap * (s1 + s2) /
                         std::complex<double>(0.5 * kap_rad, del_rad);
                } else {
                    sa = a_entry * std::exp(-0.5 * kap_rad * t);
                }
            }
            trace.time_s.push_back(abs_t);
            trace.cavity.push_back(sa);
            trace.b1.push_back(s1);
            trace.b2.push_back(s2);
            trace.phase.push_back(plan.phase);
        };

        integrate_fixed(rhs, y, 0.0, plan.duration, plan.dt, observe);

        if (plan.has_cavity) {
            a = {y[0], y[1]};
            b1 = {y[2], y[3]};
            b2 = {y[4], y[5]};
        } else {
            b1 = {y[0], y[1]};
            b2 = {y[2], y[3]};
            a = eliminated_swap ? std::complex<double>{0.0, 0.0}
                                : a_entry * std::exp(-0.5 * kap_rad * plan.duration);
        }
        t0 += plan.duration;
    }
    return trace;
}

struct SwapMetrics {
    double efficiency = 0.0;
    double start_occupation = 0.0;
    double peak_occupation = 0.0;
    double first_exchange_time_s = 0.0;  // measured from swap start
};

/// Peak of |b2|^2 during the swap phase relative to |b1|^2 at swap start,
/// with parabolic refinement of the sampled maximum.
inline SwapMetrics swap_metrics(const SimTrace& trace) {
    std::size_t lo = trace.size(), hi = trace.size();
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace.phase[i] == ProtocolPhase::swapping) {
            if (lo == trace.size()) lo = i;
            hi = i + 1;
        }
    }
    if (lo == trace.size() || hi - lo < 3)
        throw validation_error("transfer_efficiency: trace has no usable swapping phase");

    // The state is continuous across the phase boundary: the swap-start
    // occupation lives on the sample at the boundary time, which carries
    // the previous phase's label.
    double t_start = trace.time_s[lo];
    for (const auto& [t, p] : trace.boundaries)
        if (p == ProtocolPhase::swapping) t_start = t;
    std::size_t start = lo;
    while (start > 0 && trace.time_s[start - 1] >= t_start - 1e-15) --start;
    if (start > 0 && trace.time_s[start] > t_start) --start;

    SwapMetrics m;
    m.start_occupation = trace.occ1(start);
    if (!(m.start_occupation > 0.0))
        throw computation_error("transfer_efficiency: zero initial occupation; undefined");

    std::size_t peak = lo;
    for (std::size_t i = lo + 1; i + 1 < hi; ++i) {
        if (trace.occ2(i) >= trace.occ2(i - 1) && trace.occ2(i) >= trace.occ2(i + 1)) {
            peak = i;
            break;
        }
    }
    if (peak == lo)
        throw validation_error("transfer_efficiency: swapping phase shorter than one half-period");

    // Parabola through the three samples around the maximum (general
    // spacing: the last stored point of a phase may sit off the grid).
    const double ta = trace.time_s[peak - 1], tb = trace.time_s[peak],
                 tc = trace.time_s[peak + 1];
    const double ya = trace.occ2(peak - 1), yb = trace.occ2(peak), yc = trace.occ2(peak + 1);
    const double d1 = (yb - ya) / (tb - ta);
    const double d2 = (yc - yb) / (tc - tb);
    const double curv = (d2 - d1) / (tc - ta);
    double t_peak = tb, value = yb;
    if (curv < 0.0) {
        t_peak = 0.5 * (ta + tb - d1 / curv);
        value = ya + d1 * (t_peak - ta) + curv * (t_peak - ta) * (t_peak - tb);
    }
    m.peak_occupation = value;
    m.first_exchange_time_s = t_peak - t_start;
    m.efficiency = m.peak_occupation / m.start_occupation;
    return m;
}

inline double transfer_efficiency(const SimTrace& trace) { return swap_metrics(trace).efficiency; }

/// Sideband-cooling occupation trajectory from the rate equation:
/// n_i(t) relaxes toward n_th * gamma_m / (gamma_m + Gopt) at rate
/// gamma_m + Gopt with Gopt = 4 G^2 / kappa_tot.
struct OccupationTrace {
    std::vector<double> time_s;
    std::vector<double> occ1, occ2;
};

inline OccupationTrace cool(const EMSystem& system, const std::vector<PumpTone>& red_tones,
                            double duration_s, std::size_t n_samples = 512) {
    system.validate();
    if (!(duration_s > 0.0)) throw validation_error("cool: duration must be > 0");
    if (red_tones.empty()) throw validation_error("cool: need at least one red tone");

    double gopt1 = 0.0, gopt2 = 0.0;
    for (const PumpTone& tone : red_tones) {
        tone.validate();
        if (tone.freq_hz > system.cavity_freq_hz)
            throw validation_error("cool: blue-detuned tone would anti-damp, not cool");
        const double r1 = std::abs((system.cavity_freq_hz - system.mode1.freq_hz) - tone.freq_hz);
        const double r2 = std::abs((system.cavity_freq_hz - system.mode2.freq_hz) - tone.freq_hz);
        const double tol = 0.5 * std::abs(system.mode2.freq_hz - system.mode1.freq_hz) + 1.0;
        const double g0 = r1 <= r2 ? system.mode1.coupling_g0_hz : system.mode2.coupling_g0_hz;
        const double g = g0 * tone.amplitude;
        if (std::min(r1, r2) > tol)
            throw validation_error("cool: tone is not at a red mechanical sideband");
        (r1 <= r2 ? gopt1 : gopt2) += 4.0 * g * g / system.kappa_tot_hz();
    }

    OccupationTrace out;
    out.time_s.resize(n_samples);
    out.occ1.resize(n_samples);
    out.occ2.resize(n_samples);
    auto evolve = [&](const MechModeParams& mode, double gopt, double t) {
        const double total = mode.linewidth_hz + gopt;
        const double nss = mode.thermal_occupation * mode.linewidth_hz / total;
        return nss + (mode.thermal_occupation - nss) * std::exp(-total * t);
    };
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double t = duration_s * double(i) / double(n_samples - 1);
        out.time_s[i] = t;
        out.occ1[i] = evolve(system.mode1, gopt1, t);
        out.occ2[i] = evolve(system.mode2, gopt2, t);
    }
    return out;
}

/// Gate the sideband amplitude |b_mode| of a simulation trace: samples
/// outside the gates are blanked (amplitude 0, gate flag 0). An empty gate
/// list yields an empty series.
inline RingdownTrace stroboscopic_readout(const SimTrace& trace,
                                          const std::vector<Interval>& gates, int mode = 1) {
    if (mode != 1 && mode != 2)
        throw validation_error("stroboscopic_readout: mode must be 1 or 2");
    RingdownTrace out;
    if (gates.empty()) return out;
    if (trace.size() == 0)
        throw validation_error("stroboscopic_readout: empty trace");
    for (const Interval& g : gates)
        if (!(g.end_s > g.start_s) || g.start_s < trace.time_s.front() - 1e-12 ||
            g.end_s > trace.time_s.back() + 1e-12)
            throw validation_error("stroboscopic_readout: gate outside trace span");

    for (std::size_t i = 0; i < trace.size(); ++i) {
        const double t = trace.time_s[i];
        bool on = false;
        for (const Interval& g : gates)
            if (t >= g.start_s && t <= g.end_s) {
                on = true;
                break;
            }
        out.time_s.push_back(t);
        out.amplitude.push_back(on ? std::abs(mode == 1 ? trace.b1[i] : trace.b2[i]) : 0.0);
        out.gate.push_back(on);
    }
    return out;
}

}  // namespace memws
