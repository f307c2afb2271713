#include <algorithm>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>

#include "quadosc/cli.hpp"
#include "quadosc/csv.hpp"

namespace quadosc {

namespace {

struct Orbit {
  double x, y, t_end;
};

// One emitted CSV. The canonical parameter sets live here; solver choice
// and tolerances come from the invoking RunConfig so they stay overridable.
struct Panel {
  enum Type { Portrait, ForcedPortrait, TimeSeries, Strobe, Bifurcation };

  std::string id;
  std::string kind;
  double lambda = 0.0, alpha = 1.0, beta = 0.0, gamma = 0.0, f = 0.0,
         omega = 1.0;
  Type type = Portrait;
  std::vector<Orbit> orbits;          // Portrait
  double x0 = 0.1, y0 = 0.1;          // forced/strobe initial condition
  bool ic_at_center = false;          // override ic with the center point
  std::int64_t n_skip = 500, n_keep = 2000;  // Strobe
  int transient = 500, plot = 50;     // ForcedPortrait / TimeSeries, periods
  double gmin = 0.001, gmax = 0.15;   // Bifurcation
  std::int64_t gsteps = 150, b_skip = 300, b_keep = 500;
};

std::vector<Panel> registry() {
  std::vector<Panel> r;
  const auto portrait = [&](const std::string& id, const std::string& kind,
                            double lambda, double alpha, double beta,
                            std::vector<Orbit> orbits) {
    Panel p;
    p.id = id;
    p.kind = kind;
    p.lambda = lambda;
    p.alpha = alpha;
    p.beta = beta;
    p.type = Panel::Portrait;
    p.orbits = std::move(orbits);
    r.push_back(std::move(p));
  };
  // Conservative portraits of the two deformed families; orbit sets chosen
  // to show rings around the centers plus the flow near the other branch.
  portrait("fg1a", "quesne1", 0.5, 1.0, 0.34,
           {{0.52, 0.0, 20.0},
            {0.82, 0.0, 20.0},
            {1.32, 0.0, 20.0},
            {2.5, 0.0, 30.0},
            {-6.2, 0.05, 12.0},
            {-6.2, -0.05, 12.0},
            {-7.0, 0.0, 12.0}});
  portrait("fg1b", "quesne1", -0.5, 1.0, 0.34,
           {{0.56, 0.0, 20.0},
            {0.86, 0.0, 20.0},
            {1.16, 0.0, 25.0},
            {1.36, 0.0, 30.0},
            {-1.3, 0.0, 30.0}});
  portrait("fg3a", "quesne2", 0.5, 1.0, 0.34,
           {{0.45, 0.0, 20.0},
            {0.65, 0.0, 20.0},
            {0.95, 0.0, 25.0},
            {-0.3503, 0.0, 25.0},
            {-0.5, 0.0, 25.0}});
  portrait("fg3b", "quesne2", -0.5, 1.0, 0.34,
           {{0.43, 0.0, 20.0},
            {0.63, 0.0, 20.0},
            {1.0, 0.0, 25.0},
            {-0.3306, 0.0, 25.0},
            {-0.8, 0.0, 25.0}});

  const auto forced = [&](const std::string& id, double beta, double gamma,
                          double f, Panel::Type type) {
    Panel p;
    p.id = id;
    p.kind = "quesne1";
    p.lambda = -0.5;
    p.alpha = 2.0;
    p.beta = beta;
    p.gamma = gamma;
    p.f = f;
    p.omega = 1.0;
    p.type = type;
    r.push_back(std::move(p));
  };
  // The nearly undeformed conservative phase space is mixed: a start near
  // the origin lands in a chaotic sea, so the weak-deformation panels start
  // inside the 3:1 resonance island chain, whose strobe section is three
  // nested closed loops.
  forced("fg4a", 0.001, 0.0, 5.0, Panel::ForcedPortrait);
  r.back().x0 = 1.28;
  r.back().y0 = 0.0;
  forced("fg4b", 0.001, 0.0, 5.0, Panel::Strobe);
  r.back().x0 = 1.28;
  r.back().y0 = 0.0;
  forced("fg4c", 0.1, 0.0, 5.0, Panel::ForcedPortrait);
  forced("fg4d", 0.1, 0.0, 5.0, Panel::Strobe);

  {
    Panel p;  // f = 0: one conservative orbit from the default ic
    p.id = "fg5a";
    p.kind = "quesne1";
    p.lambda = -0.5;
    p.alpha = 2.0;
    p.beta = 0.1;
    p.type = Panel::Portrait;
    p.orbits = {{0.1, 0.1, 20.0}};
    r.push_back(std::move(p));
  }
  {
    Panel p;  // f = 0 strobe: the fixed point of the unforced strobe map
    p.id = "fg5b";
    p.kind = "quesne1";
    p.lambda = -0.5;
    p.alpha = 2.0;
    p.beta = 0.1;
    p.type = Panel::Strobe;
    p.ic_at_center = true;
    r.push_back(std::move(p));
  }
  forced("fg5c", 0.1, 0.0, 3.0, Panel::ForcedPortrait);
  forced("fg5d", 0.1, 0.0, 3.0, Panel::Strobe);
  forced("fg5e", 0.1, 0.0, 5.0, Panel::ForcedPortrait);
  forced("fg5f", 0.1, 0.0, 5.0, Panel::Strobe);

  // At gamma = 0.002 relaxation onto the final torus takes thousands of
  // drive periods; the scattered stretch-and-fold stage lives early, so the
  // weakly damped panels plot the early window rather than the settled
  // state. The gamma = 0.02 ring forms within a few periods, so the same
  // window shows it cleanly.
  forced("fg6a", 0.1, 0.002, 5.0, Panel::ForcedPortrait);
  r.back().transient = 20;
  r.back().plot = 80;
  forced("fg6b", 0.1, 0.002, 5.0, Panel::Strobe);
  r.back().n_skip = 20;
  r.back().n_keep = 600;
  forced("fg6c", 0.1, 0.02, 5.0, Panel::ForcedPortrait);
  forced("fg6d", 0.1, 0.02, 5.0, Panel::Strobe);
  r.back().n_skip = 20;
  r.back().n_keep = 600;
  forced("fg6e", 0.1, 0.1, 5.0, Panel::ForcedPortrait);
  forced("fg6f", 0.1, 0.1, 5.0, Panel::TimeSeries);
  r.back().plot = 100;

  {
    Panel p;
    p.id = "fg7";
    p.kind = "quesne1";
    p.lambda = -0.5;
    p.alpha = 2.0;
    p.beta = 0.1;
    p.omega = 1.0;
    p.f = 5.0;
    p.type = Panel::Bifurcation;
    r.push_back(std::move(p));
  }
  return r;
}

Params panel_params(const Panel& pn) {
  Params p;
  p.lambda = pn.lambda;
  p.alpha = pn.alpha;
  p.beta = pn.beta;
  p.gamma = pn.gamma;
  p.f = pn.f;
  p.omega = pn.omega;
  return p;
}

// The in-domain center equilibrium, for panels strobing the unforced
// fixed point.
State center_state(OscillatorKind kind, const Params& p) {
  for (const auto& eq : equilibria(kind, p))
    if (eq.cls == LinearClass::Center && in_domain(p, eq.x_star))
      return {eq.x_star, 0.0};
  throw NoEquilibria("no in-domain center equilibrium for this panel");
}

void write_trajectory_block(std::ostream& os, OscillatorKind kind,
                            const Params& p, const Trajectory& tr) {
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const State& s = tr.states[i];
    const double e = in_domain(p, s.x)
                         ? energy(kind, p, s)
                         : std::numeric_limits<double>::quiet_NaN();
    csv::write_row(os, {csv::format(tr.times[i]), csv::format(s.x),
                        csv::format(s.y), csv::format(e)});
  }
  os << "# termination: " << termination_name(tr.termination) << '\n';
}

void manifest_common(std::ostream& m, const Panel& pn, const RunConfig& rc) {
  m << "[" << pn.id << "]\n";
  m << "kind=" << pn.kind << '\n';
  m << "lambda=" << csv::format(pn.lambda) << '\n';
  m << "alpha=" << csv::format(pn.alpha) << '\n';
  m << "beta=" << csv::format(pn.beta) << '\n';
  m << "gamma=" << csv::format(pn.gamma) << '\n';
  m << "f=" << csv::format(pn.f) << '\n';
  m << "omega=" << csv::format(pn.omega) << '\n';
  m << "method=" << rc.method << '\n';
  if (method_from_name(rc.method) == Method::FixedRK4)
    m << "dt=" << csv::format(rc.dt) << '\n';
  else
    m << "rel_tol=" << csv::format(rc.rel_tol) << '\n'
      << "abs_tol=" << csv::format(rc.abs_tol) << '\n';
  m << "max_steps=" << rc.max_steps << '\n';
  m << "t_start=0\n";
}

int run_panel(const Panel& pn, const RunConfig& rc,
              const std::filesystem::path& outdir, std::ostream& manifest,
              std::ostream& out, std::ostream& err) {
  const OscillatorKind kind = kind_from_name(pn.kind);
  const Params p = panel_params(pn);
  validate(p);
  const double period = 2.0 * std::numbers::pi / p.omega;
  const std::filesystem::path csv_path = outdir / (pn.id + ".csv");

  SolverConfig base = rc.solver();
  base.t_start = 0.0;

  int code = 0;
  manifest_common(manifest, pn, rc);

  switch (pn.type) {
    case Panel::Portrait: {
      std::ofstream os(csv_path, std::ios::binary);
      if (!os)
        throw ConstraintViolation("cannot open '" + csv_path.string() + "'");
      os << "t,x,y,E\n";
      manifest << "experiment=portrait\n";
      for (std::size_t i = 0; i < pn.orbits.size(); ++i) {
        const Orbit& ob = pn.orbits[i];
        SolverConfig cfg = base;
        cfg.t_end = ob.t_end;
        os << "# orbit " << i << " ic=(" << csv::format(ob.x) << ","
           << csv::format(ob.y) << ")\n";
        const Trajectory tr = integrate(kind, p, {ob.x, ob.y}, cfg);
        write_trajectory_block(os, kind, p, tr);
        code = std::max(code, [&] {
          switch (tr.termination) {
            case Termination::Completed: return 0;
            case Termination::DomainViolation: return 2;
            case Termination::StepLimit: return 3;
          }
          return 3;
        }());
        manifest << "orbit" << i << "=" << csv::format(ob.x) << ","
                 << csv::format(ob.y) << "," << csv::format(ob.t_end) << '\n';
      }
      break;
    }
    case Panel::ForcedPortrait:
    case Panel::TimeSeries: {
      std::ofstream os(csv_path, std::ios::binary);
      if (!os)
        throw ConstraintViolation("cannot open '" + csv_path.string() + "'");
      manifest << "experiment="
               << (pn.type == Panel::TimeSeries ? "timeseries" : "portrait")
               << '\n';
      manifest << "x0=" << csv::format(pn.x0) << '\n';
      manifest << "y0=" << csv::format(pn.y0) << '\n';
      manifest << "transient_periods=" << pn.transient << '\n';
      manifest << "plot_periods=" << pn.plot << '\n';
      const State start =
          pn.transient > 0
              ? advance(kind, p, {pn.x0, pn.y0}, pn.transient * period, base)
              : State{pn.x0, pn.y0};
      SolverConfig cfg = base;
      cfg.t_start = pn.transient * period;
      cfg.t_end = cfg.t_start + pn.plot * period;
      os << "# transient_periods=" << pn.transient << '\n';
      os << "# plot_periods=" << pn.plot << '\n';
      os << "t,x,y,E\n";
      const Trajectory tr = integrate(kind, p, start, cfg);
      write_trajectory_block(os, kind, p, tr);
      code = tr.termination == Termination::Completed
                 ? 0
                 : (tr.termination == Termination::DomainViolation ? 2 : 3);
      break;
    }
    case Panel::Strobe: {
      RunConfig sub = rc;
      sub.kind = pn.kind;
      sub.params = p;
      State ic{pn.x0, pn.y0};
      if (pn.ic_at_center) ic = center_state(kind, p);
      sub.x0 = ic.x;
      sub.y0 = ic.y;
      sub.t_start = 0.0;
      sub.n_skip = pn.n_skip;
      sub.n_keep = pn.n_keep;
      sub.output = csv_path.string();
      code = cmd_poincare(sub, out, err);
      manifest << "experiment=strobe\n";
      manifest << "x0=" << csv::format(ic.x) << '\n';
      manifest << "y0=" << csv::format(ic.y) << '\n';
      manifest << "n_skip=" << pn.n_skip << '\n';
      manifest << "n_keep=" << pn.n_keep << '\n';
      manifest << "d0=" << csv::format(rc.d0) << '\n';
      manifest << "n_renorm=" << rc.n_renorm << '\n';
      break;
    }
    case Panel::Bifurcation: {
      RunConfig sub = rc;
      sub.kind = pn.kind;
      sub.params = p;
      sub.x0 = pn.x0;
      sub.y0 = pn.y0;
      sub.t_start = 0.0;
      sub.gamma_min = pn.gmin;
      sub.gamma_max = pn.gmax;
      sub.gamma_steps = pn.gsteps;
      sub.n_skip = pn.b_skip;
      sub.n_keep = pn.b_keep;
      sub.output = csv_path.string();
      code = cmd_bifurcation(sub, out, err);
      manifest << "experiment=bifurcation\n";
      manifest << "x0=" << csv::format(pn.x0) << '\n';
      manifest << "y0=" << csv::format(pn.y0) << '\n';
      manifest << "gamma_min=" << csv::format(pn.gmin) << '\n';
      manifest << "gamma_max=" << csv::format(pn.gmax) << '\n';
      manifest << "gamma_steps=" << pn.gsteps << '\n';
      manifest << "n_skip=" << pn.b_skip << '\n';
      manifest << "n_keep=" << pn.b_keep << '\n';
      break;
    }
  }
  manifest << '\n';
  out << "wrote " << csv_path.string() << '\n';
  return code;
}

}  // namespace

int cmd_reproduce(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  if (rc.figure.empty())
    throw ConstraintViolation(
        "reproduce needs a figure id (fg1a .. fg7, fg1 .. fg7, or all)");
  const auto all = registry();
  std::vector<Panel> chosen;
  for (const auto& pn : all) {
    if (rc.figure == "all" || pn.id == rc.figure ||
        (rc.figure.size() == 3 && pn.id.rfind(rc.figure, 0) == 0))
      chosen.push_back(pn);
  }
  if (chosen.empty())
    throw ConstraintViolation("unknown figure id '" + rc.figure + "'");

  const std::filesystem::path outdir(rc.outdir);
  std::filesystem::create_directories(outdir);
  std::ofstream manifest(outdir / "manifest.txt",
                         std::ios::binary | std::ios::trunc);
  if (!manifest)
    throw ConstraintViolation("cannot open '" +
                              (outdir / "manifest.txt").string() + "'");

  int worst = 0;
  for (const auto& pn : chosen)
    worst = std::max(worst, run_panel(pn, rc, outdir, manifest, out, err));
  return worst;
}

}  // namespace quadosc
