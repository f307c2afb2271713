#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "quadosc/analysis.hpp"
#include "quadosc/model.hpp"
#include "support.hpp"

using namespace quadosc;

namespace {

constexpr double kPi = std::numbers::pi;

Params conservative_deformed() {
  Params p;
  p.lambda = 0.5;
  p.alpha = 1.0;
  p.beta = 0.34;
  return p;
}

// The forced family behind the chaos studies: strong drive on the
// confining branch.
Params forced_params(double gamma, double f) {
  Params p;
  p.lambda = -0.5;
  p.alpha = 2.0;
  p.beta = 0.1;
  p.gamma = gamma;
  p.f = f;
  p.omega = 1.0;
  return p;
}

StroboSeries synthetic_series(const std::vector<State>& pts, int n,
                              double jitter = 1e-10) {
  StroboSeries s;
  s.period = 2.0 * kPi;
  for (int i = 0; i < n; ++i) {
    const State& b = pts[static_cast<std::size_t>(i) % pts.size()];
    // deterministic sub-cutoff jitter
    const double j = jitter * ((i * 2654435761u) % 97);
    s.samples.push_back({i, b.x + j, b.y - j});
  }
  return s;
}

LyapunovEstimate fake_lyap(double lambda, bool converged) {
  LyapunovEstimate e;
  e.lambda_max = lambda;
  e.converged = converged;
  e.spread = 0.0;
  return e;
}

}  // namespace

TEST_CASE("attractor labels") {
  AttractorClass c;
  c.label = AttractorLabel::Periodic;
  c.period = 3;
  CHECK(attractor_label(c) == "periodic(3)");
  c.label = AttractorLabel::Quasiperiodic;
  CHECK(attractor_label(c) == "quasiperiodic");
  c.label = AttractorLabel::Chaotic;
  CHECK(attractor_label(c) == "chaotic");
  c.label = AttractorLabel::Undetermined;
  CHECK(attractor_label(c) == "undetermined");
}

TEST_CASE("classifier finds small periodic orbits") {
  const StroboSeries three = synthetic_series(
      {{0.0, 0.0}, {1.0, 0.5}, {-1.0, -0.5}}, 300);
  const AttractorClass c3 = classify_attractor(three, fake_lyap(0.5, true));
  CHECK(c3.label == AttractorLabel::Periodic);
  CHECK(c3.period == 3);
  CHECK(c3.cluster_count == 3);
  CHECK(std::isnan(c3.lyapunov_estimate));

  // A fixed point of the map: zero variance exercises the norm floor.
  const StroboSeries one = synthetic_series({{0.3, 0.2}}, 250, 1e-13);
  const AttractorClass c1 = classify_attractor(one, fake_lyap(0.5, true));
  CHECK(c1.label == AttractorLabel::Periodic);
  CHECK(c1.period == 1);
}

TEST_CASE("classifier defers to the exponent on curve-filling sets") {
  StroboSeries ring;
  ring.period = 2.0 * kPi;
  const double g = 0.6180339887498949;
  for (int i = 0; i < 400; ++i) {
    const double th = 2.0 * kPi * g * i;
    ring.samples.push_back({i, std::cos(th), 0.5 * std::sin(th)});
  }
  AttractorClass c = classify_attractor(ring, fake_lyap(-0.001, true));
  CHECK(c.label == AttractorLabel::Quasiperiodic);
  CHECK(c.cluster_count == 0);  // cluster count exceeded the cap

  c = classify_attractor(ring, fake_lyap(0.1, true));
  CHECK(c.label == AttractorLabel::Chaotic);
  CHECK(c.lyapunov_estimate == doctest::Approx(0.1));

  // Threshold is exclusive.
  c = classify_attractor(ring, fake_lyap(0.005, true));
  CHECK(c.label == AttractorLabel::Quasiperiodic);
  c = classify_attractor(ring, fake_lyap(0.0051, true));
  CHECK(c.label == AttractorLabel::Chaotic);

  c = classify_attractor(ring, fake_lyap(0.1, false));
  CHECK(c.label == AttractorLabel::Undetermined);
}

TEST_CASE("classifier demands enough samples") {
  const StroboSeries few = synthetic_series({{0.0, 0.0}}, 150);
  CHECK_THROWS_AS(classify_attractor(few, fake_lyap(0.0, true)),
                  InsufficientData);
  ClassifierConfig cc;
  cc.min_samples = 10;
  CHECK_NOTHROW(classify_attractor(few, fake_lyap(0.0, true), cc));
}

TEST_CASE("lazy exponent provider is only consulted when needed") {
  int calls = 0;
  const auto provider = [&calls] {
    ++calls;
    return fake_lyap(0.1, true);
  };
  const StroboSeries three = synthetic_series(
      {{0.0, 0.0}, {1.0, 0.5}, {-1.0, -0.5}}, 300);
  classify_attractor(three, provider);
  CHECK(calls == 0);

  StroboSeries ring;
  ring.period = 2.0 * kPi;
  for (int i = 0; i < 400; ++i) {
    const double th = 2.0 * kPi * 0.6180339887498949 * i;
    ring.samples.push_back({i, std::cos(th), std::sin(th)});
  }
  const AttractorClass c = classify_attractor(ring, provider);
  CHECK(calls == 1);
  CHECK(c.label == AttractorLabel::Chaotic);
}

TEST_CASE("advance") {
  const Params p = conservative_deformed();
  SolverConfig cfg;
  cfg.rel_tol = 1e-11;
  cfg.abs_tol = 1e-13;

  // The center of the lambda > 0 branch: one revolution of a small orbit
  // around it must approximately return (conservative flow, closed orbit
  // up to nonlinear frequency shift; tiny radius keeps the shift small).
  const auto eqs = equilibria(OscillatorKind::QuesneI, p);
  const double xc = eqs[1].x_star;
  const double omega0 = std::sqrt(-eqs[1].a21);
  const State ic{xc + 1e-4, 0.0};
  const State ret = advance(OscillatorKind::QuesneI, p, ic,
                            2.0 * kPi / omega0, cfg);
  CHECK(std::abs(ret.x - ic.x) < 1e-9);
  CHECK(std::abs(ret.y) < 1e-9);

  CHECK_THROWS_AS(advance(OscillatorKind::QuesneI, p, ic, 0.0, cfg),
                  ConstraintViolation);

  Params hard;
  hard.lambda = -0.5;
  hard.alpha = 1.0;
  hard.f = 50.0;
  hard.omega = 1.0;
  CHECK_THROWS_AS(advance(OscillatorKind::ML, hard, {0.0, 0.0}, 100.0, cfg),
                  DomainViolation);

  SolverConfig tiny = cfg;
  tiny.max_steps = 5;
  CHECK_THROWS_AS(
      advance(OscillatorKind::QuesneI, p, ic, 100.0, tiny), Error);
}

TEST_CASE("poincare map is the strobe") {
  const Params p = forced_params(0.02, 5.0);
  SolverConfig cfg;
  const StroboSeries a =
      poincare_map(OscillatorKind::QuesneI, p, {0.1, 0.1}, cfg, 10, 20);
  const StroboSeries b =
      strobe_sample(OscillatorKind::QuesneI, p, {0.1, 0.1}, cfg, 10, 20);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].k == b.samples[i].k);
    CHECK(a.samples[i].x == b.samples[i].x);
    CHECK(a.samples[i].y == b.samples[i].y);
  }
}

TEST_CASE("lyapunov input validation") {
  const Params p = conservative_deformed();
  SolverConfig cfg;
  CHECK_THROWS_AS(lyapunov_max(OscillatorKind::QuesneI, p, {0.5, 0.0}, 0.0,
                               2.0 * kPi, 100, cfg),
                  ConstraintViolation);
  CHECK_THROWS_AS(lyapunov_max(OscillatorKind::QuesneI, p, {0.5, 0.0}, 1e-3,
                               2.0 * kPi, 100, cfg),
                  ConstraintViolation);
  CHECK_THROWS_AS(lyapunov_max(OscillatorKind::QuesneI, p, {0.5, 0.0}, 1e-8,
                               0.0, 100, cfg),
                  ConstraintViolation);
  CHECK_THROWS_AS(lyapunov_max(OscillatorKind::QuesneI, p, {0.5, 0.0}, 1e-8,
                               2.0 * kPi, 5, cfg),
                  ConstraintViolation);
}

TEST_CASE("conservative orbits have vanishing top exponent") {
  Params p;
  p.lambda = 0.5;
  p.alpha = 1.0;
  const double omega0 = p.alpha / std::sqrt(1.0 + p.lambda);
  SolverConfig cfg;
  cfg.rel_tol = 1e-10;
  cfg.abs_tol = 1e-13;
  const LyapunovEstimate est =
      lyapunov_max(OscillatorKind::ML, p, {1.0, 0.0}, 1e-8,
                   2.0 * kPi / omega0, 300, cfg);
  CHECK(est.converged);
  // Sheared-center separations grow like t, so the finite-window estimate
  // decays only as log(t)/t; it sits below the chaos threshold, not at zero.
  CHECK(std::abs(est.lambda_max) < 0.005);
  CHECK(est.convergence_series.size() == 300);
  CHECK(est.lambda_max <= 0.005);
}

TEST_CASE("strong forcing yields a positive, parameter-robust exponent") {
  const Params p = forced_params(0.0, 5.0);
  SolverConfig cfg;
  cfg.rel_tol = 1e-9;
  cfg.abs_tol = 1e-12;
  const double T = 2.0 * kPi;

  const State start = advance(OscillatorKind::QuesneI, p, {0.1, 0.1},
                              500.0 * T, cfg);
  SolverConfig win = cfg;
  win.t_start = cfg.t_start + 500.0 * T;

  const LyapunovEstimate base = lyapunov_max(OscillatorKind::QuesneI, p,
                                             start, 1e-8, T, 1500, win);
  CHECK(base.converged);
  CHECK(base.lambda_max > 0.01);

  for (double d0 : {5e-9, 2e-8}) {
    const LyapunovEstimate v = lyapunov_max(OscillatorKind::QuesneI, p,
                                            start, d0, T, 1500, win);
    CHECK(std::abs(v.lambda_max - base.lambda_max) <
          0.3 * std::abs(base.lambda_max));
  }
  const LyapunovEstimate v2 = lyapunov_max(OscillatorKind::QuesneI, p, start,
                                           1e-8, 2.0 * T, 750, win);
  CHECK(std::abs(v2.lambda_max - base.lambda_max) <
        0.3 * std::abs(base.lambda_max));
}

TEST_CASE("regime diagnosis across damping levels") {
  SolverConfig cfg;
  const State ic{0.1, 0.1};

  // Heavy damping settles onto a short limit cycle; the exponent is never
  // computed.
  RegimeReport periodic = classify_regime(
      OscillatorKind::QuesneI, forced_params(0.1, 5.0), ic, cfg, 300, 300,
      1e-8, 400);
  CHECK(periodic.cls.label == AttractorLabel::Periodic);
  CHECK(periodic.cls.period >= 1);
  CHECK_FALSE(periodic.lyap.has_value());

  // Moderate damping: the drive keeps the orbit winding around a ring
  // without ever locking to the forcing period.
  RegimeReport drift = classify_regime(
      OscillatorKind::QuesneI, forced_params(0.02, 5.0), ic, cfg, 50, 400,
      1e-8, 300);
  CHECK(drift.cls.label == AttractorLabel::Quasiperiodic);
  REQUIRE(drift.lyap.has_value());
  // Transverse contraction onto the ring dominates this window, so the
  // converged estimate lands below zero rather than at it.
  CHECK(drift.lyap->converged);
  CHECK(drift.lyap->lambda_max < 0.005);

  // Near-zero damping shows a long stretch-and-fold transient. Early short
  // windows leave the running exponent still falling, which fails the
  // convergence test and yields the honest undetermined verdict.
  RegimeReport window = classify_regime(
      OscillatorKind::QuesneI, forced_params(0.002, 5.0), ic, cfg, 50, 400,
      1e-8, 300);
  CHECK(window.cls.label == AttractorLabel::Undetermined);
  REQUIRE(window.lyap.has_value());
  CHECK(window.lyap->lambda_max > 0.005);
  CHECK_FALSE(window.lyap->converged);

  // A plotting-scale window a few hundred periods wide sits where the
  // running average has flattened but not yet decayed: the exponent passes
  // the convergence test above the chaos threshold, matching the scattered
  // section such a window plots.
  RegimeReport tangle = classify_regime(
      OscillatorKind::QuesneI, forced_params(0.002, 5.0), ic, cfg, 20, 600,
      1e-8, 600);
  CHECK(tangle.cls.label == AttractorLabel::Chaotic);
  REQUIRE(tangle.lyap.has_value());
  CHECK(tangle.lyap->lambda_max > 0.005);
  CHECK(tangle.lyap->converged);

  // The same point followed far past the transient settles onto a torus: the
  // long-run exponent is tiny and the verdict flips to quasiperiodic.
  RegimeReport settled = classify_regime(
      OscillatorKind::QuesneI, forced_params(0.002, 5.0), ic, cfg, 500, 300,
      1e-8, 1000);
  CHECK(settled.cls.label == AttractorLabel::Quasiperiodic);
  REQUIRE(settled.lyap.has_value());
  CHECK(std::abs(settled.lyap->lambda_max) < 0.005);

  // Undriven, undamped: strobing an invariant circle at an incommensurate
  // frequency fills a curve and the exponent hugs zero.
  RegimeReport quasi = classify_regime(
      OscillatorKind::QuesneI, conservative_deformed(), {0.52, 0.0}, cfg, 50,
      300, 1e-8, 500);
  CHECK(quasi.cls.label == AttractorLabel::Quasiperiodic);
  REQUIRE(quasi.lyap.has_value());
  CHECK(std::abs(quasi.lyap->lambda_max) < 0.005);
}

TEST_CASE("bifurcation sweep") {
  const Params p = forced_params(0.0, 5.0);
  const State ic{0.1, 0.1};
  SolverConfig cfg;
  std::vector<double> grid;
  for (int i = 0; i < 5; ++i) grid.push_back(0.02 + 0.02 * i);

  const BifurcationData a = bifurcation_sweep(OscillatorKind::QuesneI, p,
                                              grid, ic, cfg, 150, 30);
  CHECK(a.grid == grid);
  CHECK(a.status.size() == grid.size());
  for (Termination t : a.status) CHECK(t == Termination::Completed);
  CHECK(a.points.size() == grid.size() * 30);
  // Points arrive in (grid, strobe) order.
  for (std::size_t i = 1; i < a.points.size(); ++i)
    CHECK(a.points[i].first >= a.points[i - 1].first);

  SUBCASE("deterministic across repetition and thread count") {
    const BifurcationData b = bifurcation_sweep(OscillatorKind::QuesneI, p,
                                                grid, ic, cfg, 150, 30);
    REQUIRE(b.points.size() == a.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      CHECK(a.points[i].first == b.points[i].first);
      CHECK(a.points[i].second == b.points[i].second);
    }
    for (int threads : {2, 4, 8}) {
      const BifurcationData c = bifurcation_sweep(
          OscillatorKind::QuesneI, p, grid, ic, cfg, 150, 30, threads);
      REQUIRE(c.points.size() == a.points.size());
      for (std::size_t i = 0; i < a.points.size(); ++i) {
        CHECK(a.points[i].first == c.points[i].first);
        CHECK(a.points[i].second == c.points[i].second);
      }
      CHECK(c.status == a.status);
    }
  }

  SUBCASE("a single-entry grid reproduces the plain map") {
    const BifurcationData one = bifurcation_sweep(
        OscillatorKind::QuesneI, p, {0.05}, ic, cfg, 150, 30);
    Params pg = p;
    pg.gamma = 0.05;
    const StroboSeries direct =
        poincare_map(OscillatorKind::QuesneI, pg, ic, cfg, 150, 30);
    REQUIRE(one.points.size() == direct.samples.size());
    for (std::size_t i = 0; i < one.points.size(); ++i)
      CHECK(one.points[i].second == direct.samples[i].y);
  }

  SUBCASE("without forcing every damped run collapses onto the rest point") {
    Params rest = p;
    rest.f = 0.0;
    const BifurcationData d = bifurcation_sweep(
        OscillatorKind::QuesneI, rest, {0.02, 0.05, 0.1}, ic, cfg, 200, 10);
    for (const auto& [gamma, y] : d.points) CHECK(std::abs(y) < 1e-6);
  }

  SUBCASE("input validation") {
    CHECK_THROWS_AS(bifurcation_sweep(OscillatorKind::QuesneI, p, {}, ic,
                                      cfg, 150, 30),
                    ConstraintViolation);
    CHECK_THROWS_AS(bifurcation_sweep(OscillatorKind::QuesneI, p,
                                      {0.1, 0.05}, ic, cfg, 150, 30),
                    ConstraintViolation);
    CHECK_THROWS_AS(bifurcation_sweep(OscillatorKind::QuesneI, p,
                                      {-0.1, 0.05}, ic, cfg, 150, 30),
                    ConstraintViolation);
    CHECK_THROWS_AS(bifurcation_sweep(OscillatorKind::QuesneI, p, {0.05},
                                      ic, cfg, 150, 0),
                    ConstraintViolation);
  }

  SUBCASE("per-entry failures are recorded, not thrown") {
    Params hard;
    hard.lambda = -0.5;
    hard.alpha = 1.0;
    hard.f = 50.0;
    hard.omega = 1.0;
    const BifurcationData d = bifurcation_sweep(
        OscillatorKind::ML, hard, {0.0, 0.1}, {0.0, 0.0}, cfg, 5, 20);
    REQUIRE(d.status.size() == 2);
    CHECK(d.status[0] == Termination::DomainViolation);
    CHECK(d.status[1] == Termination::DomainViolation);
    CHECK(d.points.size() < 2 * 20);
  }
}

TEST_CASE("nonlinear verification separates centers from saddles") {
  const Params p = conservative_deformed();
  SolverConfig cfg;
  const auto eqs = equilibria(OscillatorKind::QuesneI, p);

  const VerifyResult center = verify_equilibrium(
      OscillatorKind::QuesneI, p, eqs[1], 0.0, 100.0, cfg);
  CHECK(center.confined);
  CHECK(center.energy_local_min);
  CHECK(std::isnan(center.t_escape));

  const VerifyResult saddle = verify_equilibrium(
      OscillatorKind::QuesneI, p, eqs[0], 0.0, 100.0, cfg);
  CHECK_FALSE(saddle.confined);
  CHECK_FALSE(saddle.energy_local_min);
  CHECK(saddle.t_escape > 0.0);
  CHECK(saddle.t_escape < 100.0);
}

TEST_CASE("nonlinear verification exposes the mirror candidate") {
  // Of the two reported square-root-deformation candidates only the one
  // with sign(x) = sign(beta) survives the flow test.
  Params p = conservative_deformed();
  p.lambda = -0.5;
  SolverConfig cfg;
  const auto eqs = equilibria(OscillatorKind::QuesneII, p);
  REQUIRE(eqs.size() == 2);

  const VerifyResult genuine = verify_equilibrium(
      OscillatorKind::QuesneII, p, eqs[1], 0.0, 100.0, cfg);
  CHECK(genuine.confined);
  CHECK(genuine.energy_local_min);

  const VerifyResult mirror = verify_equilibrium(
      OscillatorKind::QuesneII, p, eqs[0], 0.0, 100.0, cfg);
  CHECK_FALSE(mirror.confined);
  CHECK_FALSE(mirror.energy_local_min);
  CHECK(mirror.t_escape < 10.0);
}

TEST_CASE("verification requires a conservative system") {
  const Params p = conservative_deformed();
  SolverConfig cfg;
  const auto eqs = equilibria(OscillatorKind::QuesneI, p);
  Params damped = p;
  damped.gamma = 0.1;
  CHECK_THROWS_AS(verify_equilibrium(OscillatorKind::QuesneI, damped, eqs[1],
                                     0.0, 100.0, cfg),
                  ConstraintViolation);
  CHECK_THROWS_AS(verify_equilibrium(OscillatorKind::QuesneI, p, eqs[1], 0.0,
                                     0.0, cfg),
                  ConstraintViolation);
}

TEST_CASE("verification verdicts are seed-stable for true centers") {
  std::mt19937_64 rng(424242);
  SolverConfig cfg;
  cfg.rel_tol = 1e-8;
  cfg.abs_tol = 1e-11;
  int verified = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Params p =
        support::draw_params(rng, OscillatorKind::QuesneI);
    for (const Equilibrium& eq : equilibria(OscillatorKind::QuesneI, p)) {
      if (eq.branch != Branch::Plus) continue;
      const VerifyResult r = verify_equilibrium(
          OscillatorKind::QuesneI, p, eq, 0.0, 50.0, cfg,
          static_cast<unsigned>(trial));
      CHECK(r.confined);
      CHECK(r.energy_local_min);
      ++verified;
    }
  }
  CHECK(verified == 50);
}
