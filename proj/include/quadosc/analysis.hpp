#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "quadosc/integrate.hpp"
#include "quadosc/model.hpp"

namespace quadosc {

// ---------------------------------------------------------------------------
// Lyapunov exponents (Benettin two-trajectory renormalization)
// ---------------------------------------------------------------------------

struct LyapunovEstimate {
  double lambda_max = 0.0;  ///< mean of the last half of the running average
  std::int64_t n_renorm = 0;
  double d0 = 0.0;
  double tau = 0.0;
  /// Running average (1/(i*tau)) * sum_{j<=i} ln(d_j/d0), length n_renorm.
  std::vector<double> convergence_series;
  double spread = 0.0;  ///< max - min of the last half of the running average
  bool converged = false;
};

/// Relative wander allowed across the last half of the running average.
inline constexpr double kLyapSpreadTol = 0.2;

/// Absolute scale (1/time) below which exponents count as "near zero" for
/// the convergence test; purely relative spread is meaningless at 0.
inline constexpr double kLyapSpreadFloor = 0.05;

/// Largest Lyapunov exponent from the separation growth of a companion
/// trajectory offset by d0 along +x and rescaled to d0 every tau. The
/// caller hands an ic with transients already discarded; tau equal to a
/// multiple of the forcing period keeps the drive phase aligned across
/// windows. Throws DomainViolation/Error if either trajectory dies;
/// non-convergence is reported via the flag, not thrown.
LyapunovEstimate lyapunov_max(OscillatorKind kind, const Params& p,
                              const State& ic, double d0, double tau,
                              std::int64_t n_renorm, const SolverConfig& cfg);

// ---------------------------------------------------------------------------
// Attractor classification
// ---------------------------------------------------------------------------

enum class AttractorLabel { Periodic, Quasiperiodic, Chaotic, Undetermined };

struct AttractorClass {
  AttractorLabel label = AttractorLabel::Undetermined;
  int period = 0;          ///< cluster count p for Periodic
  int cluster_count = 0;   ///< clusters found at cutoff (0 if > max_period)
  /// Exponent consulted for the verdict; NaN when the periodic
  /// short-circuit decided without one.
  double lyapunov_estimate = std::numeric_limits<double>::quiet_NaN();
};

/// "periodic(3)", "quasiperiodic", "chaotic", "undetermined".
std::string attractor_label(const AttractorClass& c);

struct ClassifierConfig {
  double cluster_radius = 1e-3;  ///< in std-normalized (x,y) coordinates
  int max_period = 32;
  std::size_t min_samples = 200;
  double lyap_threshold = 0.005;  ///< 1/time units
  double norm_floor = 1e-6;       ///< std-dev floor, keeps point sets finite
};

/// Decision ladder: periodic(p) if the samples form p <= max_period
/// clusters, every cluster tighter than cluster_radius after normalizing
/// each coordinate by its sample standard deviation; else chaotic if the
/// exponent exceeds lyap_threshold, quasiperiodic if below, undetermined
/// if the estimate did not converge. Throws InsufficientData below
/// min_samples.
AttractorClass classify_attractor(const StroboSeries& series,
                                  const LyapunovEstimate& lyap,
                                  const ClassifierConfig& cc = {});

/// Same ladder, but the exponent is only computed when the periodic
/// short-circuit fails.
AttractorClass classify_attractor(
    const StroboSeries& series,
    const std::function<LyapunovEstimate()>& lyap_provider,
    const ClassifierConfig& cc = {});

// ---------------------------------------------------------------------------
// Experiment drivers
// ---------------------------------------------------------------------------

/// Thin orchestration over strobe_sample.
StroboSeries poincare_map(OscillatorKind kind, const Params& p,
                          const State& ic, const SolverConfig& cfg,
                          std::int64_t n_skip, std::int64_t n_keep);

/// Final state after integrating the forced flow over
/// [cfg.t_start, cfg.t_start + t_span]. Throws DomainViolation or Error
/// (step limit) if the run does not complete.
State advance(OscillatorKind kind, const Params& p, const State& ic,
              double t_span, const SolverConfig& cfg);

/// One-call regime diagnosis: strobe, cluster test, and (only if needed)
/// a Lyapunov estimate started from the post-transient state.
struct RegimeReport {
  StroboSeries series;
  std::optional<LyapunovEstimate> lyap;
  AttractorClass cls;
};

RegimeReport classify_regime(OscillatorKind kind, const Params& p,
                             const State& ic, const SolverConfig& cfg,
                             std::int64_t n_skip, std::int64_t n_keep,
                             double d0, std::int64_t n_renorm,
                             const ClassifierConfig& cc = {});

// ---------------------------------------------------------------------------
// Bifurcation sweep
// ---------------------------------------------------------------------------

struct BifurcationData {
  /// (gamma, y) pairs in (grid index, strobe index) order; the order is a
  /// function of the inputs alone, independent of thread scheduling.
  std::vector<std::pair<double, double>> points;
  std::vector<double> grid;
  std::int64_t n_skip = 0;
  std::int64_t n_keep = 0;
  std::vector<Termination> status;  ///< per grid entry
};

/// Independent strobe runs with p.gamma replaced by each grid value.
/// Per-gamma failures are recorded in status (their partial samples kept)
/// and the sweep continues. grid must be nonempty, ascending, >= 0.
BifurcationData bifurcation_sweep(OscillatorKind kind, const Params& p,
                                  const std::vector<double>& gamma_grid,
                                  const State& ic, const SolverConfig& cfg,
                                  std::int64_t n_skip, std::int64_t n_keep,
                                  int threads = 1);

// ---------------------------------------------------------------------------
// Nonlinear equilibrium verification
// ---------------------------------------------------------------------------

struct VerifyResult {
  bool confined = false;
  /// First escape time among the ring of probes; NaN when confined.
  double t_escape = std::numeric_limits<double>::quiet_NaN();
  /// Whether (x_star, 0) is the strict minimum of E over the 5x5 probe
  /// grid of spacing radius/2 (false if the grid leaves the domain).
  bool energy_local_min = false;
};

/// Launches 8 initial conditions on a circle of the given radius around
/// (x_star, 0) and integrates the conservative flow for the horizon;
/// confined means every probe stayed within 10*radius. Requires
/// gamma = f = 0. radius <= 0 selects the default 1e-2*max(1,|x_star|).
/// The seed rotates the ring phase (0 keeps a probe on the +x axis).
VerifyResult verify_equilibrium(OscillatorKind kind, const Params& p,
                                const Equilibrium& eq, double radius,
                                double horizon, const SolverConfig& cfg,
                                unsigned seed = 0);

}  // namespace quadosc
