#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "quadosc/analysis.hpp"
#include "quadosc/integrate.hpp"
#include "quadosc/model.hpp"

namespace quadosc {

/// Everything one invocation can configure, mirrored 1:1 by the long
/// option names and by the keys of the flat key=value config file.
struct RunConfig {
  std::string kind = "quesne1";
  Params params;

  double x0 = 0.1;  ///< initial condition (defaults used by the figures)
  double y0 = 0.1;

  std::string method = "adaptive-embedded";
  double dt = 1e-3;
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double t_start = 0.0;
  double t_end = 100.0;
  std::int64_t max_steps = 50000000;

  std::int64_t n_skip = 500;  ///< transient periods before strobe samples
  std::int64_t n_keep = 2000;

  double d0 = 1e-8;
  double tau = 0.0;  ///< Lyapunov window; 0 selects one forcing period
  std::int64_t n_renorm = 2000;
  std::int64_t n_transient = 500;  ///< periods discarded before the estimate

  double gamma_min = 0.001;
  double gamma_max = 0.15;
  std::int64_t gamma_steps = 100;
  int threads = 1;

  double radius = 0.0;  ///< probe ring radius; 0 selects the default
  double horizon = 100.0;
  std::uint64_t seed = 0;

  std::string output;  ///< CSV/report target; empty = stdout
  std::string figure;  ///< reproduce target (fg1a .. fg7, fg1 .. fg7, all)
  std::string outdir = "reproduce_out";

  OscillatorKind kind_enum() const { return kind_from_name(kind); }
  State ic() const { return {x0, y0}; }
  SolverConfig solver() const;
};

/// Parses argv (flags plus optional --config file; flags win) and runs the
/// selected command. Exit codes: 0 success, 1 usage error, 2 constraint or
/// domain violation, 3 numerical failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

int cmd_fixed_points(const RunConfig& rc, std::ostream& out,
                     std::ostream& err);
int cmd_simulate(const RunConfig& rc, std::ostream& out, std::ostream& err);
int cmd_poincare(const RunConfig& rc, std::ostream& out, std::ostream& err);
int cmd_bifurcation(const RunConfig& rc, std::ostream& out,
                    std::ostream& err);
int cmd_lyapunov(const RunConfig& rc, std::ostream& out, std::ostream& err);
int cmd_verify_equilibrium(const RunConfig& rc, std::ostream& out,
                           std::ostream& err);
int cmd_reproduce(const RunConfig& rc, std::ostream& out, std::ostream& err);

}  // namespace quadosc
