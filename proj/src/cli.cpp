#include "quadosc/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "quadosc/csv.hpp"

namespace quadosc {

namespace {

// Report/CSV sink: --output file when given, the command stream otherwise.
struct Sink {
  std::ofstream file;
  std::ostream* os = nullptr;

  Sink(const RunConfig& rc, std::ostream& fallback) {
    if (rc.output.empty()) {
      os = &fallback;
      return;
    }
    file.open(rc.output, std::ios::binary);
    if (!file)
      throw ConstraintViolation("cannot open output file '" + rc.output +
                                "'");
    os = &file;
  }
  std::ostream& get() { return *os; }
};

std::string param_comment(const RunConfig& rc) {
  const Params& p = rc.params;
  std::ostringstream s;
  s << "# kind=" << rc.kind << " lambda=" << csv::format(p.lambda)
    << " alpha=" << csv::format(p.alpha) << " beta=" << csv::format(p.beta)
    << " gamma=" << csv::format(p.gamma) << " f=" << csv::format(p.f)
    << " omega=" << csv::format(p.omega);
  return s.str();
}

std::string format_eig_pair(const EigPair& e) {
  const std::complex<double>& z = e[0];
  if (z.imag() != 0.0) return "+-" + csv::format(std::abs(z.imag())) + "i";
  if (z.real() != 0.0) return "+-" + csv::format(std::abs(z.real()));
  return "0";
}

int termination_exit(Termination t) {
  switch (t) {
    case Termination::Completed: return 0;
    case Termination::DomainViolation: return 2;
    case Termination::StepLimit: return 3;
  }
  return 3;
}

void write_trajectory_rows(std::ostream& os, OscillatorKind kind,
                           const Params& p, const Trajectory& tr) {
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    const State& s = tr.states[i];
    const double e = in_domain(p, s.x)
                         ? energy(kind, p, s)
                         : std::numeric_limits<double>::quiet_NaN();
    csv::write_row(os, {csv::format(tr.times[i]), csv::format(s.x),
                        csv::format(s.y), csv::format(e)});
  }
}

}  // namespace

SolverConfig RunConfig::solver() const {
  SolverConfig s;
  s.method = method_from_name(method);
  s.dt = dt;
  s.rel_tol = rel_tol;
  s.abs_tol = abs_tol;
  s.t_start = t_start;
  s.t_end = t_end;
  s.max_steps = max_steps;
  return s;
}

int cmd_fixed_points(const RunConfig& rc, std::ostream& out, std::ostream&) {
  const OscillatorKind kind = rc.kind_enum();
  const auto eqs = equilibria(kind, rc.params);
  Sink sink(rc, out);
  std::ostream& os = sink.get();
  os << param_comment(rc) << '\n';
  os << std::left << std::setw(8) << "branch" << std::setw(24) << "x_star"
     << std::setw(24) << "a21" << std::setw(12) << "class" << std::setw(26)
     << "eig_a21" << std::setw(26) << "eig_closed"
     << "agree" << '\n';
  for (const auto& eq : eqs) {
    std::string closed_str = "n/a";
    std::string agree = "n/a";
    try {
      const EigPair closed = closed_form_eigs(kind, rc.params, eq.branch);
      closed_str = format_eig_pair(closed);
      const double diff = std::abs(eq.eig[0] - closed[0]);
      const double scale = std::max(1.0, std::abs(closed[0]));
      agree = diff <= 1e-9 * scale ? "yes" : "no";
    } catch (const NotApplicable&) {
    }
    os << std::left << std::setw(8) << branch_name(eq.branch) << std::setw(24)
       << csv::format(eq.x_star) << std::setw(24) << csv::format(eq.a21)
       << std::setw(12) << linear_class_name(eq.cls) << std::setw(26)
       << format_eig_pair(eq.eig) << std::setw(26) << closed_str << agree
       << '\n';
  }
  return 0;
}

int cmd_simulate(const RunConfig& rc, std::ostream& out, std::ostream&) {
  const OscillatorKind kind = rc.kind_enum();
  validate(rc.params);
  const SolverConfig cfg = rc.solver();
  validate(cfg);
  const Trajectory tr = integrate(kind, rc.params, rc.ic(), cfg);
  Sink sink(rc, out);
  std::ostream& os = sink.get();
  os << "t,x,y,E\n";
  write_trajectory_rows(os, kind, rc.params, tr);
  os << "# termination: " << termination_name(tr.termination) << '\n';
  return termination_exit(tr.termination);
}

int cmd_poincare(const RunConfig& rc, std::ostream& out, std::ostream&) {
  const OscillatorKind kind = rc.kind_enum();
  validate(rc.params);
  SolverConfig cfg = rc.solver();
  cfg.t_end = cfg.t_start + 1.0;  // strobe sets its own end
  validate(cfg);
  const ClassifierConfig cc;
  if (rc.n_keep < static_cast<std::int64_t>(cc.min_samples))
    throw ConstraintViolation(
        "n_keep must be >= " + std::to_string(cc.min_samples) +
        " so the classifier precondition holds");

  RegimeReport rep;
  std::string verdict;
  try {
    rep = classify_regime(kind, rc.params, rc.ic(), cfg, rc.n_skip, rc.n_keep,
                          rc.d0, rc.n_renorm);
    verdict = attractor_label(rep.cls);
  } catch (const ConstraintViolation&) {
    throw;  // bad knobs are the caller's problem, not a verdict
  } catch (const Error& e) {
    // Keep whatever samples exist; the verdict records why it is missing.
    rep.series = strobe_sample(kind, rc.params, rc.ic(), cfg, rc.n_skip,
                               rc.n_keep);
    verdict = std::string("undetermined (") + e.what() + ")";
  }

  Sink sink(rc, out);
  std::ostream& os = sink.get();
  os << "# n_skip=" << rc.n_skip << '\n';
  os << "# n_keep=" << rc.n_keep << '\n';
  os << "# classification=" << verdict << '\n';
  if (rep.lyap)
    os << "# lyapunov_max=" << csv::format(rep.lyap->lambda_max)
       << " spread=" << csv::format(rep.lyap->spread)
       << " converged=" << (rep.lyap->converged ? "yes" : "no") << '\n';
  os << "k,x,y\n";
  for (const auto& s : rep.series.samples)
    csv::write_row(os, {csv::format(s.k), csv::format(s.x), csv::format(s.y)});
  if (rep.series.termination != Termination::Completed)
    os << "# termination: " << termination_name(rep.series.termination)
       << '\n';
  return termination_exit(rep.series.termination);
}

int cmd_bifurcation(const RunConfig& rc, std::ostream& out, std::ostream&) {
  const OscillatorKind kind = rc.kind_enum();
  validate(rc.params);
  SolverConfig cfg = rc.solver();
  cfg.t_end = cfg.t_start + 1.0;
  validate(cfg);
  if (rc.gamma_steps < 1)
    throw ConstraintViolation("gamma_steps must be >= 1");
  if (!(rc.gamma_min >= 0.0) || !std::isfinite(rc.gamma_min) ||
      !std::isfinite(rc.gamma_max))
    throw ConstraintViolation("gamma_min must be >= 0 and finite");
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(rc.gamma_steps));
  if (rc.gamma_steps == 1) {
    grid.push_back(rc.gamma_min);
  } else {
    const double step =
        (rc.gamma_max - rc.gamma_min) / static_cast<double>(rc.gamma_steps - 1);
    for (std::int64_t i = 0; i < rc.gamma_steps; ++i)
      grid.push_back(rc.gamma_min + static_cast<double>(i) * step);
  }

  const BifurcationData data = bifurcation_sweep(
      kind, rc.params, grid, rc.ic(), cfg, rc.n_skip, rc.n_keep, rc.threads);

  Sink sink(rc, out);
  std::ostream& os = sink.get();
  os << "# n_skip=" << rc.n_skip << '\n';
  os << "# n_keep=" << rc.n_keep << '\n';
  os << "# gamma_grid=" << grid.size() << " points in ["
     << csv::format(grid.front()) << "," << csv::format(grid.back()) << "]\n";
  os << "gamma,y\n";
  for (const auto& pt : data.points)
    csv::write_row(os, {csv::format(pt.first), csv::format(pt.second)});
  bool any_domain = false, any_limit = false;
  for (std::size_t i = 0; i < data.status.size(); ++i) {
    if (data.status[i] == Termination::Completed) continue;
    os << "# gamma=" << csv::format(data.grid[i])
       << " termination: " << termination_name(data.status[i]) << '\n';
    any_domain |= data.status[i] == Termination::DomainViolation;
    any_limit |= data.status[i] == Termination::StepLimit;
  }
  if (any_limit) return 3;
  if (any_domain) return 2;
  return 0;
}

int cmd_lyapunov(const RunConfig& rc, std::ostream& out, std::ostream&) {
  const OscillatorKind kind = rc.kind_enum();
  validate(rc.params);
  SolverConfig cfg = rc.solver();
  cfg.t_end = cfg.t_start + 1.0;
  validate(cfg);
  if (rc.n_transient < 0)
    throw ConstraintViolation("n_transient must be >= 0");
  if (rc.tau < 0.0) throw ConstraintViolation("tau must be >= 0");
  const double period = 2.0 * std::numbers::pi / rc.params.omega;
  const double tau = rc.tau > 0.0 ? rc.tau : period;

  State start = rc.ic();
  if (rc.n_transient > 0) {
    start = advance(kind, rc.params, start,
                    static_cast<double>(rc.n_transient) * period, cfg);
    cfg.t_start += static_cast<double>(rc.n_transient) * period;
  }
  const LyapunovEstimate est =
      lyapunov_max(kind, rc.params, start, rc.d0, tau, rc.n_renorm, cfg);

  Sink sink(rc, out);
  std::ostream& os = sink.get();
  os << "# lambda_max=" << csv::format(est.lambda_max) << '\n';
  os << "# spread=" << csv::format(est.spread) << '\n';
  os << "# converged=" << (est.converged ? "yes" : "no") << '\n';
  os << "# d0=" << csv::format(est.d0) << " tau=" << csv::format(est.tau)
     << " n_renorm=" << est.n_renorm << " n_transient=" << rc.n_transient
     << '\n';
  os << "i,running_average\n";
  for (std::size_t i = 0; i < est.convergence_series.size(); ++i)
    csv::write_row(os, {csv::format(static_cast<std::int64_t>(i + 1)),
                        csv::format(est.convergence_series[i])});
  return est.converged ? 0 : 3;
}

int cmd_verify_equilibrium(const RunConfig& rc, std::ostream& out,
                           std::ostream&) {
  const OscillatorKind kind = rc.kind_enum();
  if (rc.radius < 0.0) throw ConstraintViolation("radius must be >= 0");
  const auto eqs = equilibria(kind, rc.params);
  SolverConfig cfg = rc.solver();
  cfg.t_end = cfg.t_start + 1.0;
  validate(cfg);
  Sink sink(rc, out);
  std::ostream& os = sink.get();
  os << param_comment(rc) << '\n';
  os << "# radius=" << csv::format(rc.radius)
     << " horizon=" << csv::format(rc.horizon) << " seed=" << rc.seed << '\n';
  for (const auto& eq : eqs) {
    const VerifyResult res =
        verify_equilibrium(kind, rc.params, eq, rc.radius, rc.horizon, cfg,
                           static_cast<unsigned>(rc.seed));
    os << "branch=" << branch_name(eq.branch)
       << " x_star=" << csv::format(eq.x_star)
       << " class=" << linear_class_name(eq.cls) << " verdict=";
    if (res.confined)
      os << "confined";
    else
      os << "escaped(t=" << csv::format(res.t_escape) << ")";
    os << " energy_local_min=" << (res.energy_local_min ? "yes" : "no")
       << '\n';
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  std::vector<std::string> full;
  full.reserve(args.size() + 1);
  full.emplace_back("quadosc");
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const auto& s : full) argv.push_back(s.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  RunConfig rc;
  CLI::App app{
      "quadosc: dynamics toolkit for quadratic Lienard oscillators "
      "(position-dependent-mass ML oscillator and its two deformations)"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value config file; flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);

  app.add_option("--kind", rc.kind, "ml, quesne1, or quesne2");
  app.add_option("--lambda", rc.params.lambda, "deformation strength");
  app.add_option("--alpha", rc.params.alpha, "stiffness scale");
  app.add_option("--beta", rc.params.beta, "asymmetric deformation");
  app.add_option("--gamma", rc.params.gamma, "damping coefficient");
  app.add_option("--f", rc.params.f, "drive amplitude");
  app.add_option("--omega", rc.params.omega, "drive angular frequency");
  app.add_option("--x0", rc.x0, "initial position");
  app.add_option("--y0", rc.y0, "initial velocity");
  app.add_option("--method", rc.method, "fixed-rk4 or adaptive-embedded");
  app.add_option("--dt", rc.dt, "fixed-rk4 step size");
  app.add_option("--rel_tol", rc.rel_tol, "adaptive relative tolerance");
  app.add_option("--abs_tol", rc.abs_tol, "adaptive absolute tolerance");
  app.add_option("--t_start", rc.t_start, "integration start time");
  app.add_option("--t_end", rc.t_end, "integration end time (simulate)");
  app.add_option("--max_steps", rc.max_steps, "step attempt budget");
  app.add_option("--n_skip", rc.n_skip, "strobe periods discarded");
  app.add_option("--n_keep", rc.n_keep, "strobe periods kept");
  app.add_option("--d0", rc.d0, "Lyapunov probe separation");
  app.add_option("--tau", rc.tau, "Lyapunov window (0 = one period)");
  app.add_option("--n_renorm", rc.n_renorm, "Lyapunov renormalizations");
  app.add_option("--n_transient", rc.n_transient,
                 "periods discarded before the Lyapunov estimate");
  app.add_option("--gamma_min", rc.gamma_min, "sweep start");
  app.add_option("--gamma_max", rc.gamma_max, "sweep end");
  app.add_option("--gamma_steps", rc.gamma_steps, "sweep grid size");
  app.add_option("--threads", rc.threads, "sweep worker threads");
  app.add_option("--radius", rc.radius, "probe ring radius (0 = default)");
  app.add_option("--horizon", rc.horizon, "verification horizon");
  app.add_option("--seed", rc.seed, "probe ring phase seed");
  app.add_option("--output", rc.output, "write CSV/report here, not stdout");
  app.add_option("--figure", rc.figure, "reproduce target id");
  app.add_option("--outdir", rc.outdir, "reproduce output directory");

  CLI::App* sub_fixed =
      app.add_subcommand("fixed-points", "equilibria and linearization");
  CLI::App* sub_sim = app.add_subcommand("simulate", "integrate one run");
  CLI::App* sub_poin =
      app.add_subcommand("poincare", "stroboscopic map + classification");
  CLI::App* sub_bif = app.add_subcommand("bifurcation", "gamma sweep");
  CLI::App* sub_lyap =
      app.add_subcommand("lyapunov", "largest Lyapunov exponent");
  CLI::App* sub_ver = app.add_subcommand("verify-equilibrium",
                                         "nonlinear confinement check");
  CLI::App* sub_rep =
      app.add_subcommand("reproduce", "canonical figure data sets");
  sub_rep->add_option("figure", rc.figure, "fg1a .. fg7, fg1 .. fg7, or all");
  for (CLI::App* s :
       {sub_fixed, sub_sim, sub_poin, sub_bif, sub_lyap, sub_ver, sub_rep})
    s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (sub_fixed->parsed()) return cmd_fixed_points(rc, out, err);
    if (sub_sim->parsed()) return cmd_simulate(rc, out, err);
    if (sub_poin->parsed()) return cmd_poincare(rc, out, err);
    if (sub_bif->parsed()) return cmd_bifurcation(rc, out, err);
    if (sub_lyap->parsed()) return cmd_lyapunov(rc, out, err);
    if (sub_ver->parsed()) return cmd_verify_equilibrium(rc, out, err);
    if (sub_rep->parsed()) return cmd_reproduce(rc, out, err);
    err << "error: no command selected\n";
    return 1;
  } catch (const DomainViolation& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NoEquilibria& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const NotApplicable& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const InsufficientData& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConstraintViolation& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
}

}  // namespace quadosc
