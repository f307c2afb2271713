#include "quadosc/integrate.hpp"

#include <cmath>
#include <numbers>

namespace quadosc {

const char* method_name(Method m) {
  return m == Method::FixedRK4 ? "fixed-rk4" : "adaptive-embedded";
}

Method method_from_name(const std::string& name) {
  if (name == "fixed-rk4") return Method::FixedRK4;
  if (name == "adaptive-embedded") return Method::Adaptive54;
  throw ConstraintViolation("unknown method '" + name +
                            "' (expected fixed-rk4 or adaptive-embedded)");
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::Completed: return "completed";
    case Termination::DomainViolation: return "domain_violation";
    case Termination::StepLimit: return "step_limit";
  }
  return "?";
}

void validate(const SolverConfig& cfg) {
  if (!std::isfinite(cfg.t_start) || !std::isfinite(cfg.t_end))
    throw ConstraintViolation("t_start and t_end must be finite");
  if (!(cfg.t_end > cfg.t_start))
    throw ConstraintViolation("t_end must be > t_start");
  if (cfg.max_steps <= 0) throw ConstraintViolation("max_steps must be > 0");
  if (cfg.method == Method::FixedRK4) {
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt))
      throw ConstraintViolation("dt must be > 0");
  } else {
    if (!(cfg.rel_tol > 0.0) || !std::isfinite(cfg.rel_tol))
      throw ConstraintViolation("rel_tol must be > 0");
    if (!(cfg.abs_tol > 0.0) || !std::isfinite(cfg.abs_tol))
      throw ConstraintViolation("abs_tol must be > 0");
  }
}

State hermite_eval(const StepRecord& r, double t) {
  const double h = r.t1 - r.t0;
  const double th = (t - r.t0) / h;
  const double om = 1.0 - th;
  const double h00 = (1.0 + 2.0 * th) * om * om;
  const double h10 = th * om * om;
  const double h01 = th * th * (3.0 - 2.0 * th);
  const double h11 = th * th * (th - 1.0);
  return {h00 * r.y0.x + h * (h10 * r.f0.x + h11 * r.f1.x) + h01 * r.y1.x,
          h00 * r.y0.y + h * (h10 * r.f0.y + h11 * r.f1.y) + h01 * r.y1.y};
}

Trajectory integrate(OscillatorKind kind, const Params& p, const State& ic,
                     const SolverConfig& cfg) {
  Trajectory tr;
  tr.times.push_back(cfg.t_start);
  tr.states.push_back(ic);
  const auto rhs = [&](const State& s, double t) {
    return rhs_forced(kind, p, s, t);
  };
  tr.termination = integrate_steps(rhs, ic, cfg, [&](const StepRecord& rec) {
    tr.times.push_back(rec.t1);
    tr.states.push_back(rec.y1);
    return true;
  });
  return tr;
}

StroboSeries strobe_sample(OscillatorKind kind, const Params& p,
                           const State& ic, const SolverConfig& cfg,
                           std::int64_t n_skip, std::int64_t n_keep) {
  validate(p);
  if (n_skip < 0) throw ConstraintViolation("n_skip must be >= 0");
  if (n_keep < 1) throw ConstraintViolation("n_keep must be >= 1");

  StroboSeries out;
  out.n_skipped = n_skip;
  out.period = 2.0 * std::numbers::pi / p.omega;
  out.t_start = cfg.t_start;
  const std::int64_t k_last = n_skip + n_keep - 1;

  std::int64_t next_k = n_skip;
  if (next_k == 0) {
    out.samples.push_back({0, ic.x, ic.y});
    ++next_k;
  }
  if (next_k > k_last) return out;  // n_skip = 0, n_keep = 1

  SolverConfig run = cfg;
  run.t_end = cfg.t_start + static_cast<double>(k_last) * out.period;
  const auto rhs = [&](const State& s, double t) {
    return rhs_forced(kind, p, s, t);
  };
  out.termination =
      integrate_steps(rhs, ic, run, [&](const StepRecord& rec) {
        while (next_k <= k_last) {
          const double tk =
              cfg.t_start + static_cast<double>(next_k) * out.period;
          if (tk > rec.t1) break;
          const State s = hermite_eval(rec, tk);
          out.samples.push_back({next_k, s.x, s.y});
          ++next_k;
        }
        return true;
      });
  return out;
}

double energy_drift(OscillatorKind kind, const Params& p,
                    const Trajectory& traj) {
  if (traj.states.empty())
    throw ConstraintViolation("energy_drift requires a nonempty trajectory");
  const double e0 = energy(kind, p, traj.states.front());
  double drift = 0.0;
  for (const State& s : traj.states)
    drift = std::max(drift, std::abs(energy(kind, p, s) - e0));
  return drift;
}

}  // namespace quadosc
