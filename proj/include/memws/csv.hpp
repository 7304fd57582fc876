#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "memws/allan.hpp"
#include "memws/emsim.hpp"
#include "memws/errors.hpp"
#include "memws/membrane.hpp"
#include "memws/spectral.hpp"
#include "memws/stress.hpp"

namespace memws {

// All data files are comma-separated with a header row; physical columns
// are SI base units. Doubles are written with 17 significant digits so
// every file re-parses to the bit-identical value.

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, const std::string& path, long line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw parse_error(path, line, "expected a number, got '" + s + "'");
    }
}

inline std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open input file: " + path);
    return in;
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot open output file for writing: " + path);
    return out;
}

inline void expect_header(const std::string& got, const std::string& want,
                          const std::string& path, long line) {
    if (got != want)
        throw parse_error(path, line, "expected header '" + want + "', got '" + got + "'");
}

}  // namespace detail

// ---- Spectrum: freq_hz,psd ----

inline void write_spectrum_csv(const std::string& path, const Spectrum& s) {
    auto out = detail::open_output(path);
    out << "freq_hz,psd\n";
    for (std::size_t i = 0; i < s.freq_hz.size(); ++i)
        out << detail::fmt(s.freq_hz[i]) << ',' << detail::fmt(s.psd[i]) << '\n';
}

inline Spectrum read_spectrum_csv(const std::string& path) {
    auto in = detail::open_input(path);
    std::string line;
    long ln = 0;
    if (!std::getline(in, line)) throw parse_error(path, 1, "empty file");
    detail::expect_header(line, "freq_hz,psd", path, ++ln);
    Spectrum s;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty()) continue;
        const auto cols = detail::split_csv(line);
        if (cols.size() != 2) throw parse_error(path, ln, "expected 2 columns");
        s.freq_hz.push_back(detail::parse_double(cols[0], path, ln));
        s.psd.push_back(detail::parse_double(cols[1], path, ln));
    }
    s.validate();
    return s;
}

// ---- RingdownTrace: time_s,amplitude,gate ----

inline void write_ringdown_csv(const std::string& path, const RingdownTrace& t) {
    auto out = detail::open_output(path);
    out << "time_s,amplitude,gate\n";
    for (std::size_t i = 0; i < t.time_s.size(); ++i)
        out << detail::fmt(t.time_s[i]) << ',' << detail::fmt(t.amplitude[i]) << ','
            << (t.gate[i] ? 1 : 0) << '\n';
}

inline RingdownTrace read_ringdown_csv(const std::string& path) {
    auto in = detail::open_input(path);
    std::string line;
    long ln = 0;
    if (!std::getline(in, line)) throw parse_error(path, 1, "empty file");
    detail::expect_header(line, "time_s,amplitude,gate", path, ++ln);
    RingdownTrace t;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty()) continue;
        const auto cols = detail::split_csv(line);
        if (cols.size() != 3) throw parse_error(path, ln, "expected 3 columns");
        const double time = detail::parse_double(cols[0], path, ln);
        if (!t.time_s.empty() && !(time > t.time_s.back()))
            throw parse_error(path, ln, "time stamps must be strictly increasing");
        t.time_s.push_back(time);
        t.amplitude.push_back(detail::parse_double(cols[1], path, ln));
        const double g = detail::parse_double(cols[2], path, ln);
        if (g != 0.0 && g != 1.0) throw parse_error(path, ln, "gate must be 0 or 1");
        t.gate.push_back(g != 0.0);
    }
    t.validate();
    return t;
}

// ---- FrequencySeries: '# f0_hz=<value>' then time_s,freq_hz ----

inline void write_freq_series_csv(const std::string& path, const FrequencySeries& s) {
    auto out = detail::open_output(path);
    out << "# f0_hz=" << detail::fmt(s.reference_freq_hz) << '\n';
    out << "time_s,freq_hz\n";
    for (std::size_t i = 0; i < s.samples_hz.size(); ++i) {
        if (!s.is_valid(i)) continue;  // gaps are carried as missing rows
        out << detail::fmt(s.start_time_s + double(i) * s.sample_interval_s) << ','
            << detail::fmt(s.samples_hz[i]) << '\n';
    }
}

/// Reads a frequency series; row spacing must be an integer multiple of the
/// base interval. Missing multiples become invalidated (gap) samples.
inline FrequencySeries read_freq_series_csv(const std::string& path,
                                            std::optional<double> interval_override = {}) {
    auto in = detail::open_input(path);
    std::string line;
    long ln = 0;
    if (!std::getline(in, line)) throw parse_error(path, 1, "empty file");
    ++ln;
    const std::string prefix = "# f0_hz=";
    if (line.rfind(prefix, 0) != 0)
        throw parse_error(path, ln, "expected leading '# f0_hz=<value>' line");
    const double f0 = detail::parse_double(line.substr(prefix.size()), path, ln);
    if (!std::getline(in, line)) throw parse_error(path, 2, "missing column header");
    detail::expect_header(line, "time_s,freq_hz", path, ++ln);

    std::vector<double> times, freqs;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty()) continue;
        const auto cols = detail::split_csv(line);
        if (cols.size() != 2) throw parse_error(path, ln, "expected 2 columns");
        times.push_back(detail::parse_double(cols[0], path, ln));
        freqs.push_back(detail::parse_double(cols[1], path, ln));
        if (times.size() > 1 && !(times.back() > times[times.size() - 2]))
            throw parse_error(path, ln, "time stamps must be strictly increasing");
    }
    if (times.size() < 3) throw validation_error(path + ": need at least 3 samples");

    double tau0 = interval_override.value_or(times[1] - times[0]);
    if (!(tau0 > 0.0)) throw validation_error(path + ": non-positive sample interval");

    FrequencySeries s;
    s.sample_interval_s = tau0;
    s.reference_freq_hz = f0;
    s.start_time_s = times.front();
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double steps = (times[i] - times.front()) / tau0;
        const auto k = static_cast<long long>(std::llround(steps));
        if (std::abs(steps - double(k)) > 1e-6)
            throw validation_error(path + ": sample at t=" + std::to_string(times[i]) +
                                   " is not on the base interval grid");
        while (static_cast<long long>(s.samples_hz.size()) < k) {  // gap: flag, don't bridge
            s.samples_hz.push_back(0.0);
            s.valid.push_back(false);
        }
        s.samples_hz.push_back(freqs[i]);
        s.valid.push_back(true);
    }
    s.validate();
    return s;
}

// ---- Mode table: m,n,freq_hz,q (m,n,q may be blank) ----

inline void write_mode_table_csv(const std::string& path, const std::vector<ModeRecord>& modes) {
    auto out = detail::open_output(path);
    out << "m,n,freq_hz,q\n";
    for (const ModeRecord& r : modes) {
        if (r.index)
            out << r.index->m << ',' << r.index->n << ',';
        else
            out << ",,";
        out << detail::fmt(r.freq_hz) << ',';
        if (r.quality_factor) out << detail::fmt(*r.quality_factor);
        out << '\n';
    }
}

inline std::vector<ModeRecord> read_mode_table_csv(const std::string& path) {
    auto in = detail::open_input(path);
    std::string line;
    long ln = 0;
    if (!std::getline(in, line)) throw parse_error(path, 1, "empty file");
    detail::expect_header(line, "m,n,freq_hz,q", path, ++ln);
    std::vector<ModeRecord> modes;
    while (std::getline(in, line)) {
        ++ln;
        if (line.empty()) continue;
        const auto cols = detail::split_csv(line);
        if (cols.size() != 4) throw parse_error(path, ln, "expected 4 columns");
        ModeRecord r;
        if (!cols[0].empty() || !cols[1].empty()) {
            if (cols[0].empty() || cols[1].empty())
                throw parse_error(path, ln, "m and n must both be present or both blank");
            const double m = detail::parse_double(cols[0], path, ln);
            const double n = detail::parse_double(cols[1], path, ln);
            if (m != std::floor(m) || n != std::floor(n))
                throw parse_error(path, ln, "mode indices must be integers");
            r.index = ModeIndex{int(m), int(n)};
        }
        r.freq_hz = detail::parse_double(cols[2], path, ln);
        if (!cols[3].empty()) r.quality_factor = detail::parse_double(cols[3], path, ln);
        r.validate();
        modes.push_back(r);
    }
    return modes;
}

// ---- AllanCurve: tau_s,sigma,n_diffs ----

inline void write_allan_curve_csv(const std::string& path, const AllanCurve& c) {
    auto out = detail::open_output(path);
    out << "tau_s,sigma,n_diffs\n";
    for (const AllanPoint& p : c.points)
        out << detail::fmt(p.tau_s) << ',' << detail::fmt(p.sigma) << ',' << p.n_diffs << '\n';
}

// ---- Stress-fit companion: m2_plus_n2,f_meas_hz,f_pred_hz ----

inline void write_stress_curve_csv(const std::string& path, const std::vector<ModeRecord>& modes,
                                   const StressFitResult& fit) {
    if (modes.size() != fit.predicted_hz.size())
        throw validation_error("write_stress_curve_csv: mode/prediction length mismatch");
    auto out = detail::open_output(path);
    out << "m2_plus_n2,f_meas_hz,f_pred_hz\n";
    for (std::size_t i = 0; i < modes.size(); ++i) {
        if (!modes[i].index) throw validation_error("write_stress_curve_csv: unindexed mode");
        out << modes[i].index->index_sum_sq() << ',' << detail::fmt(modes[i].freq_hz) << ','
            << detail::fmt(fit.predicted_hz[i]) << '\n';
    }
}

// ---- SimTrace: time_s,re_b1,im_b1,re_b2,im_b2,occ1,occ2,phase_label ----

inline void write_sim_trace_csv(const std::string& path, const SimTrace& t) {
    auto out = detail::open_output(path);
    out << "time_s,re_b1,im_b1,re_b2,im_b2,occ1,occ2,phase_label\n";
    for (std::size_t i = 0; i < t.size(); ++i)
        out << detail::fmt(t.time_s[i]) << ',' << detail::fmt(t.b1[i].real()) << ','
            << detail::fmt(t.b1[i].imag()) << ',' << detail::fmt(t.b2[i].real()) << ','
            << detail::fmt(t.b2[i].imag()) << ',' << detail::fmt(t.occ1(i)) << ','
            << detail::fmt(t.occ2(i)) << ',' << phase_name(t.phase[i]) << '\n';
}

// ---- Mode shape grid: x_m,y_m,amplitude ----

inline void write_mode_shape_csv(const std::string& path, const ModeShapeField& f) {
    auto out = detail::open_output(path);
    out << "x_m,y_m,amplitude\n";
    for (std::size_t iy = 0; iy < f.resolution; ++iy)
        for (std::size_t ix = 0; ix < f.resolution; ++ix)
            out << detail::fmt(f.x_of(ix)) << ',' << detail::fmt(f.y_of(iy)) << ','
                << detail::fmt(f.at(ix, iy)) << '\n';
}

}  // namespace memws
