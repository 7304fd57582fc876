#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "memws/errors.hpp"

namespace memws {

/// Classic fixed-step 4th-order Runge-Kutta over a flat real state vector.
/// Deterministic: no adaptivity, no hidden state.
class Rk4 {
  public:
    using Rhs = std::function<void(double t, const std::vector<double>& y,
                                   std::vector<double>& dydt)>;

    explicit Rk4(std::size_t dim) : k1_(dim), k2_(dim), k3_(dim), k4_(dim), work_(dim) {}

    void step(const Rhs& rhs, double t, double dt, std::vector<double>& y) {
        const std::size_t n = y.size();
        rhs(t, y, k1_);
        for (std::size_t i = 0; i < n; ++i) work_[i] = y[i] + 0.5 * dt * k1_[i];
        rhs(t + 0.5 * dt, work_, k2_);
        for (std::size_t i = 0; i < n; ++i) work_[i] = y[i] + 0.5 * dt * k2_[i];
        rhs(t + 0.5 * dt, work_, k3_);
        for (std::size_t i = 0; i < n; ++i) work_[i] = y[i] + dt * k3_[i];
        rhs(t + dt, work_, k4_);
        for (std::size_t i = 0; i < n; ++i)
            y[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }

  private:
    std::vector<double> k1_, k2_, k3_, k4_, work_;
};

/// Integrate rhs from t0 over `duration` with fixed step dt (last step
/// shortened to land exactly on t0+duration). Calls observe(t, y) after
/// every accepted step, including the initial state. Throws on NaN/inf.
inline void integrate_fixed(const Rk4::Rhs& rhs, std::vector<double>& y, double t0,
                            double duration, double dt,
                            const std::function<void(double, const std::vector<double>&)>& observe) {
    if (!(dt > 0.0)) throw validation_error("integrate_fixed: step must be > 0");
    Rk4 solver(y.size());
    double t = t0;
    const double t_end = t0 + duration;
    if (observe) observe(t, y);
    while (t < t_end - 1e-15 * std::max(1.0, std::abs(t_end))) {
        const double h = std::min(dt, t_end - t);
        solver.step(rhs, t, h, y);
        t += h;
        for (double v : y)
            if (!std::isfinite(v))
                throw computation_error("integrate_fixed: non-finite state at t=" +
                                        std::to_string(t));
        if (observe) observe(t, y);
    }
}

}  // namespace memws
