#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "memws/emsim.hpp"
#include "memws/errors.hpp"
#include "memws/membrane.hpp"

namespace memws {

/// Whole-toolkit configuration. Human units live only in the config keys
/// (suffix spells the unit); every struct field is SI base units.
struct ToolkitConfig {
    MembraneSpec membrane{
        .side_length_m = 500e-6,
        .thickness_m = 50e-9,
        .density_kg_m3 = 3210.0,
        .stress_x_pa = 242.95e6,
        .stress_y_pa = 245.81e6,
        .youngs_modulus_pa = 437e9,
        .poisson_ratio = 0.268,
    };
    EMSystem emsystem{
        .cavity_freq_hz = 5.39e9,
        .kappa_ext_hz = 100.25e3,
        .kappa_int_hz = 100.0e3,
        .mode1 = {.freq_hz = 871.93e3,
                  .linewidth_hz = 8.13e-3,
                  .energy_decay_hz = 6.13e-3,
                  .coupling_g0_hz = 2.0,
                  .thermal_occupation = 238.45},
        .mode2 = {.freq_hz = 885.39e3,
                  .linewidth_hz = 5.63e-3,
                  .energy_decay_hz = 4.4e-3,
                  .coupling_g0_hz = 2.0,
                  .thermal_occupation = 234.84},
    };
    ProtocolSchedule protocol{};  // device defaults live in the struct initializers
    std::uint64_t seed = 1;
    double assign_cutoff_factor = 1.05;
    std::string output_directory = "out";
    std::string verbosity = "info";

    std::vector<std::string> validate() const {
        std::vector<std::string> warnings = membrane.validate();
        auto w2 = protocol.validate(emsystem);  // also validates the EM system
        warnings.insert(warnings.end(), w2.begin(), w2.end());
        if (!(assign_cutoff_factor >= 1.0))
            throw validation_error("defaults.assign_cutoff_factor: must be >= 1");
        return warnings;
    }

    /// Canonical serialization used for the run-manifest config digest.
    std::string canonical_text() const;
};

namespace detail {

struct ConfigField {
    std::function<void(ToolkitConfig&, const std::string&)> set;
    std::function<std::string(const ToolkitConfig&)> get;
};

inline double to_number(const std::string& v, const std::string& where) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (const std::exception&) {
        throw validation_error("config: " + where + ": expected a number, got '" + v + "'");
    }
}

inline bool to_bool(const std::string& v, const std::string& where) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw validation_error("config: " + where + ": expected true/false, got '" + v + "'");
}

inline std::string fmt_cfg(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// The full key table: "section.key" -> accessors. Flat, strict, exhaustive.
inline const std::map<std::string, ConfigField>& config_fields() {
    static const std::map<std::string, ConfigField> fields = [] {
        std::map<std::string, ConfigField> f;
        auto mem = [&](const std::string& key, double scale, double MembraneSpec::* m) {
            f["membrane." + key] = ConfigField{
                [m, scale, key](ToolkitConfig& c, const std::string& v) {
                    c.membrane.*m = to_number(v, key) * scale;
                },
                [m, scale](const ToolkitConfig& c) { return fmt_cfg((c.membrane.*m) / scale); }};
        };
        mem("side_length_um", 1e-6, &MembraneSpec::side_length_m);
        mem("thickness_nm", 1e-9, &MembraneSpec::thickness_m);
        mem("density_kg_m3", 1.0, &MembraneSpec::density_kg_m3);
        mem("stress_x_mpa", 1e6, &MembraneSpec::stress_x_pa);
        mem("stress_y_mpa", 1e6, &MembraneSpec::stress_y_pa);
        mem("youngs_modulus_gpa", 1e9, &MembraneSpec::youngs_modulus_pa);
        mem("poisson_ratio", 1.0, &MembraneSpec::poisson_ratio);

        auto sys = [&](const std::string& key, double scale, double EMSystem::* m) {
            f["emsystem." + key] = ConfigField{
                [m, scale, key](ToolkitConfig& c, const std::string& v) {
                    c.emsystem.*m = to_number(v, key) * scale;
                },
                [m, scale](const ToolkitConfig& c) { return fmt_cfg((c.emsystem.*m) / scale); }};
        };
        sys("cavity_freq_ghz", 1e9, &EMSystem::cavity_freq_hz);
        sys("kappa_ext_khz", 1e3, &EMSystem::kappa_ext_hz);
        sys("kappa_int_khz", 1e3, &EMSystem::kappa_int_hz);

        auto mode = [&](const std::string& key, double scale, MechModeParams EMSystem::* which,
                        double MechModeParams::* m) {
            f["emsystem." + key] = ConfigField{
                [which, m, scale, key](ToolkitConfig& c, const std::string& v) {
                    c.emsystem.*which.*m = to_number(v, key) * scale;
                },
                [which, m, scale](const ToolkitConfig& c) {
                    return fmt_cfg((c.emsystem.*which.*m) / scale);
                }};
        };
        mode("mode1_freq_khz", 1e3, &EMSystem::mode1, &MechModeParams::freq_hz);
        mode("mode1_linewidth_millihz", 1e-3, &EMSystem::mode1, &MechModeParams::linewidth_hz);
        mode("mode1_energy_decay_millihz", 1e-3, &EMSystem::mode1,
             &MechModeParams::energy_decay_hz);
        mode("mode1_g0_hz", 1.0, &EMSystem::mode1, &MechModeParams::coupling_g0_hz);
        mode("mode1_thermal_occupation", 1.0, &EMSystem::mode1,
             &MechModeParams::thermal_occupation);
        mode("mode2_freq_khz", 1e3, &EMSystem::mode2, &MechModeParams::freq_hz);
        mode("mode2_linewidth_millihz", 1e-3, &EMSystem::mode2, &MechModeParams::linewidth_hz);
        mode("mode2_energy_decay_millihz", 1e-3, &EMSystem::mode2,
             &MechModeParams::energy_decay_hz);
        mode("mode2_g0_hz", 1.0, &EMSystem::mode2, &MechModeParams::coupling_g0_hz);
        mode("mode2_thermal_occupation", 1.0, &EMSystem::mode2,
             &MechModeParams::thermal_occupation);

        auto pro = [&](const std::string& key, double scale, double ProtocolSchedule::* m) {
            f["protocol." + key] = ConfigField{
                [m, scale, key](ToolkitConfig& c, const std::string& v) {
                    c.protocol.*m = to_number(v, key) * scale;
                },
                [m, scale](const ToolkitConfig& c) { return fmt_cfg((c.protocol.*m) / scale); }};
        };
        pro("cooling_duration_s", 1.0, &ProtocolSchedule::cooling_duration_s);
        pro("excitation_duration_s", 1.0, &ProtocolSchedule::excitation_duration_s);
        pro("swapping_duration_s", 1.0, &ProtocolSchedule::swapping_duration_s);
        pro("readout_duration_s", 1.0, &ProtocolSchedule::readout_duration_s);
        pro("swap_detuning_mhz", 1e6, &ProtocolSchedule::swap_detuning_hz);
        pro("swap_period_s", 1.0, &ProtocolSchedule::swap_period_s);
        pro("swap_pump_amplitude", 1.0, &ProtocolSchedule::swap_pump_amplitude);
        pro("swap_tone_mismatch_hz", 1.0, &ProtocolSchedule::swap_tone_mismatch_hz);
        pro("cooling_pump_amplitude", 1.0, &ProtocolSchedule::cooling_pump_amplitude);
        pro("excitation_pump_amplitude", 1.0, &ProtocolSchedule::excitation_pump_amplitude);
        pro("excitation_phonons", 1.0, &ProtocolSchedule::excitation_phonons);

        f["protocol.period_convention"] = ConfigField{
            [](ToolkitConfig& c, const std::string& v) {
                if (v == "exchange")
                    c.protocol.period_convention = PeriodConvention::exchange;
                else if (v == "occupancy")
                    c.protocol.period_convention = PeriodConvention::occupancy;
                else
                    throw validation_error(
                        "config: protocol.period_convention must be exchange|occupancy");
            },
            [](const ToolkitConfig& c) {
                return std::string(c.protocol.period_convention == PeriodConvention::exchange
                                       ? "exchange"
                                       : "occupancy");
            }};
        f["protocol.loss_budget"] = ConfigField{
            [](ToolkitConfig& c, const std::string& v) {
                if (v == "none")
                    c.protocol.loss_budget = SwapLossBudget::none;
                else if (v == "resonant")
                    c.protocol.loss_budget = SwapLossBudget::resonant;
                else if (v == "full")
                    c.protocol.loss_budget = SwapLossBudget::full;
                else
                    throw validation_error(
                        "config: protocol.loss_budget must be none|resonant|full");
            },
            [](const ToolkitConfig& c) {
                switch (c.protocol.loss_budget) {
                    case SwapLossBudget::none: return std::string("none");
                    case SwapLossBudget::resonant: return std::string("resonant");
                    default: return std::string("full");
                }
            }};
        f["protocol.explicit_cavity_swap"] = ConfigField{
            [](ToolkitConfig& c, const std::string& v) {
                c.protocol.explicit_cavity_swap = to_bool(v, "protocol.explicit_cavity_swap");
            },
            [](const ToolkitConfig& c) {
                return std::string(c.protocol.explicit_cavity_swap ? "true" : "false");
            }};

        f["defaults.seed"] = ConfigField{
            [](ToolkitConfig& c, const std::string& v) {
                c.seed = static_cast<std::uint64_t>(to_number(v, "defaults.seed"));
            },
            [](const ToolkitConfig& c) { return std::to_string(c.seed); }};
        f["defaults.assign_cutoff_factor"] = ConfigField{
            [](ToolkitConfig& c, const std::string& v) {
                c.assign_cutoff_factor = to_number(v, "defaults.assign_cutoff_factor");
            },
            [](const ToolkitConfig& c) { return fmt_cfg(c.assign_cutoff_factor); }};
        f["output.directory"] = ConfigField{
            [](ToolkitConfig& c, const std::string& v) { c.output_directory = v; },
            [](const ToolkitConfig& c) { return c.output_directory; }};
        f["output.verbosity"] = ConfigField{
            [](ToolkitConfig& c, const std::string& v) {
                if (v != "quiet" && v != "info" && v != "debug")
                    throw validation_error("config: output.verbosity must be quiet|info|debug");
                c.verbosity = v;
            },
            [](const ToolkitConfig& c) { return c.verbosity; }};
        return f;
    }();
    return fields;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Parse a flat sectioned key-value config file onto the built-in defaults.
/// Grammar: '[section]' headers, 'key = value' entries, '#' comments, blank
/// lines. Unknown sections or keys are fatal.
inline ToolkitConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open config file: " + path);

    ToolkitConfig cfg;
    const auto& fields = detail::config_fields();
    std::string line, section;
    long ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw parse_error(path, ln, "malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            bool known = false;
            for (const auto& [k, v] : fields)
                if (k.rfind(section + ".", 0) == 0) known = true;
            if (!known) throw parse_error(path, ln, "unknown section '" + section + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw parse_error(path, ln, "expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (section.empty()) throw parse_error(path, ln, "key outside any [section]");
        const auto it = fields.find(section + "." + key);
        if (it == fields.end())
            throw parse_error(path, ln, "unknown key '" + key + "' in section [" + section + "]");
        try {
            it->second.set(cfg, value);
        } catch (const validation_error& e) {
            throw parse_error(path, ln, e.what());
        }
    }
    cfg.validate();
    return cfg;
}

inline std::string ToolkitConfig::canonical_text() const {
    std::ostringstream out;
    for (const auto& [key, field] : detail::config_fields()) {
        if (key.rfind("output.", 0) == 0) continue;  // not an input to the physics
        out << key << "=" << field.get(*this) << "\n";
    }
    return out.str();
}

/// Write the current configuration in the file grammar (used by `synth`
/// to document defaults and by tests for round-trips).
inline void write_config(const std::string& path, const ToolkitConfig& cfg) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot write config file: " + path);
    std::string section;
    for (const auto& [key, field] : detail::config_fields()) {
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (sec != section) {
            if (!section.empty()) out << "\n";
            out << "[" << sec << "]\n";
            section = sec;
        }
        out << key.substr(dot + 1) << " = " << field.get(cfg) << "\n";
    }
}

}  // namespace memws
