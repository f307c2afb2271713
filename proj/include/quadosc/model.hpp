#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace quadosc {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Base class for every recoverable error raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A parameter or configuration invariant does not hold.
struct ConstraintViolation : Error {
  using Error::Error;
};

/// The factor 1 + lambda*x^2 fell below the domain guard. For lambda < 0
/// this bounds the reachable region to |x| < 1/sqrt(-lambda).
struct DomainViolation : Error {
  using Error::Error;
  DomainViolation(double x, double u);
};

/// The parameter set admits no real equilibrium.
struct NoEquilibria : Error {
  using Error::Error;
};

/// A closed-form expression was requested outside its precondition.
struct NotApplicable : Error {
  using Error::Error;
};

/// Too few samples to reach a decision.
struct InsufficientData : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Model types
// ---------------------------------------------------------------------------

/// Which member of the quadratic Lienard family governs the dynamics.
///
/// All three share the kinetic factor u(x) = 1 + lambda*x^2 (a
/// position-dependent effective mass 1/u) and differ in the potential:
///
///   ML       V(x) = alpha^2 x^2 / (2u)
///   QuesneI  V(x) = (alpha^2 x^2 - 2 beta x) / (2u)
///   QuesneII V(x) = (alpha^2 x^2 - 2 beta x sqrt(u)) / (2u)
///
/// QuesneI and QuesneII reduce to ML at beta = 0.
enum class OscillatorKind { ML, QuesneI, QuesneII };

const char* kind_name(OscillatorKind kind);

/// Accepts "ml", "quesne1", "quesne2" (case-insensitive); throws
/// ConstraintViolation otherwise.
OscillatorKind kind_from_name(const std::string& name);

/// Model constants. lambda and alpha must be nonzero, gamma and f
/// non-negative, omega positive, all finite; see validate().
struct Params {
  double lambda = 0.5;  ///< deformation strength, may be negative
  double alpha = 1.0;   ///< stiffness scale
  double beta = 0.0;    ///< asymmetric deformation; 0 recovers ML
  double gamma = 0.0;   ///< linear damping coefficient
  double f = 0.0;       ///< drive amplitude
  double omega = 1.0;   ///< drive angular frequency
};

/// Throws ConstraintViolation naming the first violated invariant.
void validate(const Params& p);

/// Phase-space point (position, velocity). Also used for derivatives,
/// where x holds dx/dt and y holds dy/dt.
struct State {
  double x = 0.0;
  double y = 0.0;
};

/// Linear type of an equilibrium, decided from the off-diagonal Jacobian
/// entry a21 (the Jacobian of (x,y) -> (y, ydot) is [[0,1],[a21,0]]):
/// a21 < -eps center, a21 > +eps saddle, otherwise degenerate.
enum class LinearClass { Center, Saddle, Degenerate };

const char* linear_class_name(LinearClass c);

/// Which sign choice of the equilibrium formula produced the point.
enum class Branch { Plus, Minus };

const char* branch_name(Branch b);

/// Conjugate (a21 < 0) or symmetric real (a21 > 0) pair, + root first.
using EigPair = std::array<std::complex<double>, 2>;

struct Equilibrium {
  double x_star = 0.0;
  Branch branch = Branch::Plus;
  double a21 = 0.0;  ///< d(ydot)/dx at (x_star, 0)
  EigPair eig{};     ///< +-sqrt(a21)
  LinearClass cls = LinearClass::Degenerate;
};

// ---------------------------------------------------------------------------
// Guards and thresholds
// ---------------------------------------------------------------------------

/// Dynamics require 1 + lambda*x^2 > kDomainGuard.
inline constexpr double kDomainGuard = 1e-10;

/// Dead band around a21 = 0 for linear classification.
inline constexpr double kClassifyTol = 1e-9;

/// 1 + lambda*x^2, throwing DomainViolation at or below the guard.
double inv_mass_factor(const Params& p, double x);

/// True iff x satisfies the domain guard.
bool in_domain(const Params& p, double x);

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Potential energy V(x). Throws DomainViolation outside the domain.
double potential(OscillatorKind kind, const Params& p, double x);

/// dV/dx. Throws DomainViolation outside the domain.
double potential_gradient(OscillatorKind kind, const Params& p, double x);

/// Autonomous vector field: returns (xdot, ydot) with
///   xdot = y
///   ydot = (lambda*x*y^2 - alpha^2*x + B(x)) / u(x)
/// where B = 0 (ML), beta*(1 - lambda*x^2) (QuesneI), beta*sqrt(u) (QuesneII).
State rhs_unforced(OscillatorKind kind, const Params& p, const State& s);

/// Driven, damped field: adds (-gamma*y + f*cos(omega*t)) / u(x) to ydot.
/// Bit-identical to rhs_unforced when gamma = f = 0.
State rhs_forced(OscillatorKind kind, const Params& p, const State& s,
                 double t);

/// All equilibrium candidates in ascending x_star order, each with its
/// linearization filled in.
///
/// ML (or beta = 0): the single point x = 0.
/// QuesneI: roots of lambda*beta*x^2 + alpha^2*x - beta = 0, which exist
///   iff D = alpha^4 + 4*lambda*beta^2 >= 0 (else NoEquilibria). Evaluated
///   in the cancellation-free forms x_plus = 2*beta/(alpha^2 + sqrt(D)),
///   x_minus = -(alpha^2 + sqrt(D))/(2*lambda*beta).
/// QuesneII: x = +-beta/sqrt(alpha^4 - lambda*beta^2), requiring
///   alpha^4 - lambda*beta^2 > 0 (else NoEquilibria). Both sign choices
///   satisfy the defining relation alpha^4 x^2 = beta^2 (1 + lambda x^2);
///   only the branch with sign(x) = sign(beta) is a stationary point of
///   the potential, the mirror is kept as a formal candidate and exposed
///   as non-confining by verify_equilibrium().
///
/// Candidates are linearized algebraically even when they fall outside
/// the guarded domain (possible for QuesneI with lambda < 0).
std::vector<Equilibrium> equilibria(OscillatorKind kind, const Params& p);

/// a21 at (x, 0). Throws DomainViolation outside the domain.
double jacobian_a21(OscillatorKind kind, const Params& p, double x);

/// Eigenvalues +-sqrt(a21) of [[0,1],[a21,0]], ordered (+ root, - root):
/// purely imaginary for a21 < 0, real for a21 > 0.
EigPair eigenvalues(double a21);

/// Eigenvalues of the named equilibrium branch from closed-form
/// expressions in the parameters alone (no x_star round trip). Intended
/// as an independent cross-check of eigenvalues(jacobian_a21(x_star));
/// a disagreement is meaningful and is surfaced by the callers, never
/// patched over here.
///
/// QuesneI, D = alpha^4 + 4*lambda*beta^2, s = sqrt(D):
///   Plus branch   +-i sqrt((s + alpha^2)/2)            (either lambda sign)
///   Minus branch  +-sqrt(2*lambda*beta^2/(s + alpha^2))    lambda > 0
///                 +-i sqrt(-2*lambda*beta^2/(s + alpha^2)) lambda < 0
/// (algebraically identical to the textbook forms with sqrt(D) - alpha^2
/// rationalized away; those lose ~8 digits for small lambda*beta^2).
/// QuesneII, D2 = alpha^4 - lambda*beta^2:
///   both branches +-i D2 / |alpha|^3
/// (the published form; it matches the a21 route only on the branch with
/// sign(x_star) = sign(beta), which is the genuine stationary point).
///
/// Throws NotApplicable when D < 0, D2 <= 0, beta = 0 with Branch::Minus,
/// or kind = ML with Branch::Minus.
EigPair closed_form_eigs(OscillatorKind kind, const Params& p, Branch branch);

/// First integral of the unforced flow:
///   E = y^2 / (2u) + V(x).
/// Under damping alone (f = 0), dE/dt = -gamma*y^2/u <= 0.
double energy(OscillatorKind kind, const Params& p, const State& s);

/// Classification of a21 with the kClassifyTol dead band.
LinearClass classify_linear(double a21);

}  // namespace quadosc
