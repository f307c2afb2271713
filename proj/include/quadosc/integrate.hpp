#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "quadosc/model.hpp"

namespace quadosc {

enum class Method { FixedRK4, Adaptive54 };

const char* method_name(Method m);

/// Accepts "fixed-rk4" or "adaptive-embedded".
Method method_from_name(const std::string& name);

struct SolverConfig {
  Method method = Method::Adaptive54;
  double dt = 1e-3;        ///< step size, FixedRK4 only
  double rel_tol = 1e-9;   ///< Adaptive54 only
  double abs_tol = 1e-12;  ///< Adaptive54 only
  double t_start = 0.0;
  double t_end = 100.0;
  std::int64_t max_steps = 50000000;  ///< counts attempts, incl. rejections
};

/// Throws ConstraintViolation naming the first violated invariant.
void validate(const SolverConfig& cfg);

enum class Termination { Completed, DomainViolation, StepLimit };

const char* termination_name(Termination t);

struct Trajectory {
  std::vector<double> times;   ///< strictly increasing
  std::vector<State> states;   ///< same length as times
  Termination termination = Termination::Completed;
};

/// One accepted step with endpoint derivatives: exactly the data needed
/// for cubic Hermite dense output in between.
struct StepRecord {
  double t0 = 0.0, t1 = 0.0;
  State y0, y1;  ///< states at t0, t1
  State f0, f1;  ///< derivatives at t0, t1
};

/// Cubic Hermite interpolant of a step, exact at both endpoints.
/// Requires t0 <= t <= t1.
State hermite_eval(const StepRecord& r, double t);

/// Classical fourth-order Runge-Kutta update. rhs(State, t) -> State may
/// throw DomainViolation from any internal stage.
template <class Rhs>
State step_rk4(Rhs&& rhs, const State& s, double t, double dt) {
  const State k1 = rhs(s, t);
  const State k2 =
      rhs(State{s.x + 0.5 * dt * k1.x, s.y + 0.5 * dt * k1.y}, t + 0.5 * dt);
  const State k3 =
      rhs(State{s.x + 0.5 * dt * k2.x, s.y + 0.5 * dt * k2.y}, t + 0.5 * dt);
  const State k4 = rhs(State{s.x + dt * k3.x, s.y + dt * k3.y}, t + dt);
  return {s.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          s.y + dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y)};
}

namespace detail {

// Dormand-Prince 5(4) coefficients. b row = 5th-order weights (equal to
// the last stage row: first-same-as-last), e row = weight differences
// against the embedded 4th-order solution.
inline constexpr double kC[7] = {0.0,     1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0,
                                 8.0 / 9.0, 1.0,     1.0};
inline constexpr double kA2[1] = {1.0 / 5.0};
inline constexpr double kA3[2] = {3.0 / 40.0, 9.0 / 40.0};
inline constexpr double kA4[3] = {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0};
inline constexpr double kA5[4] = {19372.0 / 6561.0, -25360.0 / 2187.0,
                                  64448.0 / 6561.0, -212.0 / 729.0};
inline constexpr double kA6[5] = {9017.0 / 3168.0, -355.0 / 33.0,
                                  46732.0 / 5247.0, 49.0 / 176.0,
                                  -5103.0 / 18656.0};
inline constexpr double kB[6] = {35.0 / 384.0,     0.0, 500.0 / 1113.0,
                                 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0};
inline constexpr double kE[7] = {71.0 / 57600.0, 0.0,          -71.0 / 16695.0,
                                 71.0 / 1920.0, -17253.0 / 339200.0,
                                 22.0 / 525.0,  -1.0 / 40.0};

// PI step-size controller constants.
inline constexpr double kSafe = 0.9;
inline constexpr double kBetaPi = 0.04;
inline constexpr double kExpo = 0.2 - 0.75 * kBetaPi;
inline constexpr double kFacMin = 0.2;   // strongest shrink per step
inline constexpr double kFacMax = 10.0;  // strongest growth per step

inline double step_floor(double t) {
  return 1e-13 * std::max(1.0, std::abs(t));
}

// Hairer-style starting step size; conservative fallback if the probe
// evaluation leaves the domain.
template <class Rhs>
double initial_step(Rhs&& rhs, const State& y0, const State& f0, double t0,
                    double span, double rel_tol, double abs_tol) {
  const double scx = abs_tol + rel_tol * std::abs(y0.x);
  const double scy = abs_tol + rel_tol * std::abs(y0.y);
  const auto rms = [&](double ax, double ay) {
    return std::sqrt(0.5 * ((ax / scx) * (ax / scx) + (ay / scy) * (ay / scy)));
  };
  const double d0 = rms(y0.x, y0.y);
  const double d1 = rms(f0.x, f0.y);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * (d0 / d1);
  h0 = std::min(h0, span);
  double d2 = 0.0;
  try {
    const State y1{y0.x + h0 * f0.x, y0.y + h0 * f0.y};
    const State f1 = rhs(y1, t0 + h0);
    d2 = rms(f1.x - f0.x, f1.y - f0.y) / h0;
  } catch (const DomainViolation&) {
    return std::min(1e-6, span);
  }
  const double dm = std::max(d1, d2);
  const double h1 = (dm <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                  : std::pow(0.01 / dm, 0.2);
  return std::min({100.0 * h0, h1, span});
}

}  // namespace detail

/// Core driver shared by both methods. Calls on_step(const StepRecord&)
/// after every accepted step; a false return stops integration early
/// (still Termination::Completed). Domain violations raised by rhs are
/// never propagated: fixed steps terminate, adaptive steps retry with a
/// smaller h first. The final step lands on cfg.t_end exactly.
template <class Rhs, class OnStep>
Termination integrate_steps(Rhs&& rhs, State y, const SolverConfig& cfg,
                            OnStep&& on_step) {
  validate(cfg);
  double t = cfg.t_start;
  State f;
  try {
    f = rhs(y, t);
  } catch (const DomainViolation&) {
    return Termination::DomainViolation;
  }
  std::int64_t attempts = 0;

  if (cfg.method == Method::FixedRK4) {
    while (t < cfg.t_end) {
      if (++attempts > cfg.max_steps) return Termination::StepLimit;
      const bool last = t + cfg.dt >= cfg.t_end;
      const double t1 = last ? cfg.t_end : t + cfg.dt;
      const double h = t1 - t;
      StepRecord rec;
      try {
        rec.y1 = step_rk4(rhs, y, t, h);
        rec.f1 = rhs(rec.y1, t1);
      } catch (const DomainViolation&) {
        return Termination::DomainViolation;
      }
      rec.t0 = t;
      rec.t1 = t1;
      rec.y0 = y;
      rec.f0 = f;
      if (!on_step(static_cast<const StepRecord&>(rec)))
        return Termination::Completed;
      t = t1;
      y = rec.y1;
      f = rec.f1;
    }
    return Termination::Completed;
  }

  using namespace detail;
  double h = initial_step(rhs, y, f, t, cfg.t_end - t, cfg.rel_tol,
                          cfg.abs_tol);
  double facold = 1e-4;
  bool rejected = false;
  State k[7];
  k[0] = f;

  while (t < cfg.t_end) {
    if (++attempts > cfg.max_steps) return Termination::StepLimit;
    bool last = false;
    if (t + 1.01 * h >= cfg.t_end) {
      h = cfg.t_end - t;
      last = true;
    }

    bool domain_ok = true;
    State y1{}, f1{};
    double err = 0.0;
    try {
      const auto stage = [&](int n, const double* a, double c) {
        State z = y;
        for (int j = 0; j < n; ++j) {
          z.x += h * a[j] * k[j].x;
          z.y += h * a[j] * k[j].y;
        }
        k[n] = rhs(z, t + c * h);
      };
      stage(1, kA2, kC[1]);
      stage(2, kA3, kC[2]);
      stage(3, kA4, kC[3]);
      stage(4, kA5, kC[4]);
      stage(5, kA6, kC[5]);
      y1 = y;
      for (int j = 0; j < 6; ++j) {
        y1.x += h * kB[j] * k[j].x;
        y1.y += h * kB[j] * k[j].y;
      }
      f1 = rhs(y1, last ? cfg.t_end : t + h);
      k[6] = f1;
      double ex = 0.0, ey = 0.0;
      for (int j = 0; j < 7; ++j) {
        ex += kE[j] * k[j].x;
        ey += kE[j] * k[j].y;
      }
      ex *= h;
      ey *= h;
      const double scx =
          cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y.x), std::abs(y1.x));
      const double scy =
          cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y.y), std::abs(y1.y));
      err = std::sqrt(0.5 * ((ex / scx) * (ex / scx) + (ey / scy) * (ey / scy)));
    } catch (const DomainViolation&) {
      domain_ok = false;
    }

    if (!domain_ok) {
      // A stage left the domain: retry smaller. If h is already at the
      // floor the trajectory genuinely hits the domain wall.
      h *= 0.25;
      rejected = true;
      if (h < step_floor(t)) return Termination::DomainViolation;
      continue;
    }

    if (err <= 1.0) {
      const double fac11 = std::pow(err, kExpo);
      double fac = fac11 / std::pow(facold, kBetaPi);
      fac = std::max(1.0 / kFacMax, std::min(1.0 / kFacMin, fac / kSafe));
      double hnew = h / fac;
      if (rejected) hnew = std::min(hnew, h);
      facold = std::max(err, 1e-4);

      StepRecord rec;
      rec.t0 = t;
      rec.t1 = last ? cfg.t_end : t + h;
      rec.y0 = y;
      rec.y1 = y1;
      rec.f0 = k[0];
      rec.f1 = f1;
      if (!on_step(static_cast<const StepRecord&>(rec)))
        return Termination::Completed;

      t = rec.t1;
      y = y1;
      k[0] = f1;  // first-same-as-last
      h = hnew;
      rejected = false;
    } else {
      const double fac11 = std::pow(err, kExpo);
      h /= std::min(1.0 / kFacMin, fac11 / kSafe);
      rejected = true;
      if (h < step_floor(t)) return Termination::StepLimit;
    }
  }
  return Termination::Completed;
}

/// Full-trajectory integration of the forced system; dense output at the
/// accepted solver steps. Failures are encoded in Trajectory::termination,
/// never thrown.
Trajectory integrate(OscillatorKind kind, const Params& p, const State& ic,
                     const SolverConfig& cfg);

struct StroboSample {
  std::int64_t k = 0;  ///< period index: sampled at t = cfg.t_start + k*T
  double x = 0.0;
  double y = 0.0;
};

/// Stroboscopic samples of the forced flow at t_k = t_start + 2*pi*k/omega,
/// k = n_skip .. n_skip + n_keep - 1, interpolated from dense output.
struct StroboSeries {
  std::vector<StroboSample> samples;
  std::int64_t n_skipped = 0;
  double period = 0.0;       ///< 2*pi/omega
  double t_start = 0.0;
  Termination termination = Termination::Completed;  ///< partial if not Completed
};

/// Integrates continuously across [t_start, t_start + (n_skip+n_keep-1)*T]
/// and interpolates at the strobe instants; never lands steps on them.
/// Dies early -> partial series with the termination recorded.
StroboSeries strobe_sample(OscillatorKind kind, const Params& p,
                           const State& ic, const SolverConfig& cfg,
                           std::int64_t n_skip, std::int64_t n_keep);

/// max_i |E(s_i) - E(s_0)| over the recorded states.
double energy_drift(OscillatorKind kind, const Params& p,
                    const Trajectory& traj);

}  // namespace quadosc
