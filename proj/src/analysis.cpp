#include "quadosc/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <thread>

namespace quadosc {

namespace {

// Union-find over point indices; path halving is plenty at strobe sizes.
struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

struct ClusterScan {
  int count = 0;        // clusters at the cutoff (0 if aborted, > cap)
  bool tight = false;   // every cluster radius < cutoff
};

// Single-linkage grouping of the samples, coordinates pre-scaled by their
// sample standard deviation (floored). Radius = max distance to centroid.
ClusterScan scan_clusters(const StroboSeries& series,
                          const ClassifierConfig& cc) {
  const int n = static_cast<int>(series.samples.size());
  double mx = 0.0, my = 0.0;
  for (const auto& s : series.samples) {
    mx += s.x;
    my += s.y;
  }
  mx /= n;
  my /= n;
  double vx = 0.0, vy = 0.0;
  for (const auto& s : series.samples) {
    vx += (s.x - mx) * (s.x - mx);
    vy += (s.y - my) * (s.y - my);
  }
  const double sx = std::max(std::sqrt(vx / n), cc.norm_floor);
  const double sy = std::max(std::sqrt(vy / n), cc.norm_floor);

  std::vector<double> px(n), py(n);
  for (int i = 0; i < n; ++i) {
    px[i] = series.samples[i].x / sx;
    py[i] = series.samples[i].y / sy;
  }

  DisjointSet ds(n);
  const double r2 = cc.cluster_radius * cc.cluster_radius;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double dx = px[i] - px[j];
      const double dy = py[i] - py[j];
      if (dx * dx + dy * dy <= r2) ds.unite(i, j);
    }

  std::vector<int> root(n);
  std::vector<int> roots;
  for (int i = 0; i < n; ++i) {
    root[i] = ds.find(i);
    if (root[i] == i) roots.push_back(i);
  }
  ClusterScan out;
  out.count = static_cast<int>(roots.size());
  if (out.count > cc.max_period) {
    out.count = 0;
    return out;
  }

  out.tight = true;
  for (int r : roots) {
    double cx = 0.0, cy = 0.0;
    int m = 0;
    for (int i = 0; i < n; ++i)
      if (root[i] == r) {
        cx += px[i];
        cy += py[i];
        ++m;
      }
    cx /= m;
    cy /= m;
    for (int i = 0; i < n && out.tight; ++i)
      if (root[i] == r) {
        const double dx = px[i] - cx;
        const double dy = py[i] - cy;
        if (dx * dx + dy * dy >= r2) out.tight = false;
      }
    if (!out.tight) break;
  }
  return out;
}

AttractorClass classify_impl(const StroboSeries& series,
                             const std::function<LyapunovEstimate()>& lyap,
                             const ClassifierConfig& cc) {
  if (series.samples.size() < cc.min_samples)
    throw InsufficientData("classification needs at least " +
                           std::to_string(cc.min_samples) + " samples, got " +
                           std::to_string(series.samples.size()));
  const ClusterScan scan = scan_clusters(series, cc);
  AttractorClass out;
  out.cluster_count = scan.count;
  if (scan.count >= 1 && scan.tight) {
    out.label = AttractorLabel::Periodic;
    out.period = scan.count;
    return out;
  }
  const LyapunovEstimate est = lyap();
  out.lyapunov_estimate = est.lambda_max;
  if (!est.converged)
    out.label = AttractorLabel::Undetermined;
  else if (est.lambda_max > cc.lyap_threshold)
    out.label = AttractorLabel::Chaotic;
  else
    out.label = AttractorLabel::Quasiperiodic;
  return out;
}

}  // namespace

LyapunovEstimate lyapunov_max(OscillatorKind kind, const Params& p,
                              const State& ic, double d0, double tau,
                              std::int64_t n_renorm, const SolverConfig& cfg) {
  validate(p);
  if (!(d0 > 0.0) || d0 > 1e-4)
    throw ConstraintViolation("d0 must be in (0, 1e-4]");
  if (!(tau > 0.0)) throw ConstraintViolation("tau must be > 0");
  if (n_renorm < 10) throw ConstraintViolation("n_renorm must be >= 10");

  LyapunovEstimate est;
  est.n_renorm = n_renorm;
  est.d0 = d0;
  est.tau = tau;
  est.convergence_series.reserve(static_cast<std::size_t>(n_renorm));

  State a = ic;
  State b{ic.x + d0, ic.y};
  double sum = 0.0;
  for (std::int64_t i = 1; i <= n_renorm; ++i) {
    const double t0 = cfg.t_start + static_cast<double>(i - 1) * tau;
    SolverConfig win = cfg;
    win.t_start = t0;
    a = advance(kind, p, a, tau, win);
    b = advance(kind, p, b, tau, win);
    double d = std::hypot(b.x - a.x, b.y - a.y);
    if (d < 1e-300) d = 1e-300;
    sum += std::log(d / d0);
    est.convergence_series.push_back(sum /
                                     (static_cast<double>(i) * tau));
    const double scale = d0 / d;
    b = {a.x + (b.x - a.x) * scale, a.y + (b.y - a.y) * scale};
  }

  const std::size_t half = est.convergence_series.size() / 2;
  double lo = est.convergence_series[half], hi = lo, mean = 0.0;
  for (std::size_t i = half; i < est.convergence_series.size(); ++i) {
    const double v = est.convergence_series[i];
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    mean += v;
  }
  mean /= static_cast<double>(est.convergence_series.size() - half);
  est.lambda_max = mean;
  est.spread = hi - lo;
  est.converged =
      est.spread <= kLyapSpreadTol * std::max(std::abs(mean), kLyapSpreadFloor);
  return est;
}

std::string attractor_label(const AttractorClass& c) {
  switch (c.label) {
    case AttractorLabel::Periodic:
      return "periodic(" + std::to_string(c.period) + ")";
    case AttractorLabel::Quasiperiodic: return "quasiperiodic";
    case AttractorLabel::Chaotic: return "chaotic";
    case AttractorLabel::Undetermined: return "undetermined";
  }
  return "?";
}

AttractorClass classify_attractor(const StroboSeries& series,
                                  const LyapunovEstimate& lyap,
                                  const ClassifierConfig& cc) {
  return classify_impl(series, [&] { return lyap; }, cc);
}

AttractorClass classify_attractor(
    const StroboSeries& series,
    const std::function<LyapunovEstimate()>& lyap_provider,
    const ClassifierConfig& cc) {
  return classify_impl(series, lyap_provider, cc);
}

StroboSeries poincare_map(OscillatorKind kind, const Params& p,
                          const State& ic, const SolverConfig& cfg,
                          std::int64_t n_skip, std::int64_t n_keep) {
  return strobe_sample(kind, p, ic, cfg, n_skip, n_keep);
}

State advance(OscillatorKind kind, const Params& p, const State& ic,
              double t_span, const SolverConfig& cfg) {
  if (!(t_span > 0.0)) throw ConstraintViolation("t_span must be > 0");
  SolverConfig run = cfg;
  run.t_end = cfg.t_start + t_span;
  const auto rhs = [&](const State& s, double t) {
    return rhs_forced(kind, p, s, t);
  };
  State last = ic;
  const Termination term =
      integrate_steps(rhs, ic, run, [&](const StepRecord& rec) {
        last = rec.y1;
        return true;
      });
  if (term == Termination::DomainViolation)
    throw DomainViolation("trajectory left the valid domain before t = " +
                          std::to_string(run.t_end));
  if (term == Termination::StepLimit)
    throw Error("step limit exhausted before t = " +
                std::to_string(run.t_end));
  return last;
}

RegimeReport classify_regime(OscillatorKind kind, const Params& p,
                             const State& ic, const SolverConfig& cfg,
                             std::int64_t n_skip, std::int64_t n_keep,
                             double d0, std::int64_t n_renorm,
                             const ClassifierConfig& cc) {
  RegimeReport rep;
  rep.series = strobe_sample(kind, p, ic, cfg, n_skip, n_keep);
  const double period = rep.series.period;
  rep.cls = classify_impl(
      rep.series,
      [&]() {
        // Post-transient launch state for the exponent, drive phase
        // aligned because the transient is an integer number of periods.
        State start = ic;
        SolverConfig win = cfg;
        if (n_skip > 0)
          start = advance(kind, p, ic,
                          static_cast<double>(n_skip) * period, win);
        win.t_start = cfg.t_start + static_cast<double>(n_skip) * period;
        rep.lyap = lyapunov_max(kind, p, start, d0, period, n_renorm, win);
        return *rep.lyap;
      },
      cc);
  return rep;
}

BifurcationData bifurcation_sweep(OscillatorKind kind, const Params& p,
                                  const std::vector<double>& gamma_grid,
                                  const State& ic, const SolverConfig& cfg,
                                  std::int64_t n_skip, std::int64_t n_keep,
                                  int threads) {
  if (gamma_grid.empty())
    throw ConstraintViolation("gamma_grid must be nonempty");
  for (std::size_t i = 0; i < gamma_grid.size(); ++i) {
    if (gamma_grid[i] < 0.0)
      throw ConstraintViolation("gamma_grid values must be >= 0");
    if (i > 0 && !(gamma_grid[i] > gamma_grid[i - 1]))
      throw ConstraintViolation("gamma_grid must be strictly ascending");
  }
  if (threads < 1) threads = 1;
  // Fail on bad knobs here, on this thread, before any worker can.
  validate(p);
  if (n_skip < 0) throw ConstraintViolation("n_skip must be >= 0");
  if (n_keep < 1) throw ConstraintViolation("n_keep must be >= 1");
  {
    SolverConfig probe = cfg;
    probe.t_end = cfg.t_start + 1.0;
    validate(probe);
  }

  std::vector<StroboSeries> per_gamma(gamma_grid.size());
  std::atomic<std::size_t> cursor{0};
  std::vector<std::exception_ptr> errors(
      static_cast<std::size_t>(threads), nullptr);
  const auto worker = [&](std::size_t slot) {
    try {
      for (;;) {
        const std::size_t i = cursor.fetch_add(1);
        if (i >= gamma_grid.size()) return;
        Params pg = p;
        pg.gamma = gamma_grid[i];
        per_gamma[i] = strobe_sample(kind, pg, ic, cfg, n_skip, n_keep);
      }
    } catch (...) {
      errors[slot] = std::current_exception();
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int i = 0; i < threads; ++i)
      pool.emplace_back(worker, static_cast<std::size_t>(i));
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  BifurcationData out;
  out.grid = gamma_grid;
  out.n_skip = n_skip;
  out.n_keep = n_keep;
  out.status.reserve(gamma_grid.size());
  out.points.reserve(gamma_grid.size() * static_cast<std::size_t>(n_keep));
  for (std::size_t i = 0; i < gamma_grid.size(); ++i) {
    out.status.push_back(per_gamma[i].termination);
    for (const auto& s : per_gamma[i].samples)
      out.points.emplace_back(gamma_grid[i], s.y);
  }
  return out;
}

VerifyResult verify_equilibrium(OscillatorKind kind, const Params& p,
                                const Equilibrium& eq, double radius,
                                double horizon, const SolverConfig& cfg,
                                unsigned seed) {
  validate(p);
  if (p.gamma != 0.0 || p.f != 0.0)
    throw ConstraintViolation("verify_equilibrium requires gamma = 0, f = 0");
  if (!(horizon > 0.0)) throw ConstraintViolation("horizon must be > 0");
  double r = radius;
  if (!(r > 0.0)) r = 1e-2 * std::max(1.0, std::abs(eq.x_star));

  std::mt19937 rng(seed);
  const double phase =
      seed == 0 ? 0.0
                : std::uniform_real_distribution<double>(
                      0.0, 2.0 * std::numbers::pi / 8.0)(rng);

  VerifyResult res;
  res.confined = true;
  const double r_escape = 10.0 * r;
  const auto rhs = [&](const State& s, double t) {
    return rhs_forced(kind, p, s, t);
  };
  SolverConfig run = cfg;
  run.t_start = 0.0;
  run.t_end = horizon;

  for (int j = 0; j < 8; ++j) {
    const double th = phase + j * (2.0 * std::numbers::pi / 8.0);
    const State ic{eq.x_star + r * std::cos(th), r * std::sin(th)};
    double t_last = 0.0;
    bool escaped = false;
    const Termination term =
        integrate_steps(rhs, ic, run, [&](const StepRecord& rec) {
          t_last = rec.t1;
          if (std::hypot(rec.y1.x - eq.x_star, rec.y1.y) > r_escape) {
            escaped = true;
            return false;
          }
          return true;
        });
    if (term != Termination::Completed) escaped = true;  // died: not confined
    if (escaped) {
      res.confined = false;
      const double t_esc = t_last;
      if (std::isnan(res.t_escape) || t_esc < res.t_escape)
        res.t_escape = t_esc;
    }
  }

  // Energy-surface verdict: strict minimum over the centered 5x5 grid.
  res.energy_local_min = true;
  try {
    const double e0 = energy(kind, p, {eq.x_star, 0.0});
    for (int ix = -2; ix <= 2 && res.energy_local_min; ++ix)
      for (int iy = -2; iy <= 2; ++iy) {
        if (ix == 0 && iy == 0) continue;
        const double e =
            energy(kind, p, {eq.x_star + ix * (r / 2.0), iy * (r / 2.0)});
        if (!(e > e0)) {
          res.energy_local_min = false;
          break;
        }
      }
  } catch (const DomainViolation&) {
    res.energy_local_min = false;
  }
  return res;
}

}  // namespace quadosc
