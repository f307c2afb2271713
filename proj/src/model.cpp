#include "quadosc/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

namespace quadosc {

namespace {

std::string domain_message(double x, double u) {
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "domain violation: 1 + lambda*x^2 = %.6g at x = %.9g", u, x);
  return buf;
}

double u_raw(const Params& p, double x) { return 1.0 + p.lambda * x * x; }

// Deformation force term B(x); the ydot numerator is lambda*x*y^2
// - alpha^2*x + B(x).
double force_extra(OscillatorKind kind, const Params& p, double x, double u) {
  switch (kind) {
    case OscillatorKind::ML:
      return 0.0;
    case OscillatorKind::QuesneI:
      return p.beta * (1.0 - p.lambda * x * x);
    case OscillatorKind::QuesneII:
      return p.beta * std::sqrt(u);
  }
  return 0.0;
}

// a21 without the domain guard; equilibria may sit at u <= 0 for
// QuesneI with lambda < 0 and still need their formal linearization.
double a21_raw(OscillatorKind kind, const Params& p, double x) {
  const double u = u_raw(p, x);
  const double a2 = p.alpha * p.alpha;
  double num = a2 * (p.lambda * x * x - 1.0);
  switch (kind) {
    case OscillatorKind::ML:
      break;
    case OscillatorKind::QuesneI:
      num -= 4.0 * p.lambda * p.beta * x;
      break;
    case OscillatorKind::QuesneII:
      num -= p.lambda * p.beta * x * std::sqrt(u);
      break;
  }
  return num / (u * u);
}

Equilibrium make_equilibrium(OscillatorKind kind, const Params& p, double x,
                             Branch branch) {
  Equilibrium eq;
  eq.x_star = x;
  eq.branch = branch;
  eq.a21 = a21_raw(kind, p, x);
  eq.eig = eigenvalues(eq.a21);
  eq.cls = classify_linear(eq.a21);
  return eq;
}

}  // namespace

DomainViolation::DomainViolation(double x, double u)
    : Error(domain_message(x, u)) {}

const char* kind_name(OscillatorKind kind) {
  switch (kind) {
    case OscillatorKind::ML: return "ml";
    case OscillatorKind::QuesneI: return "quesne1";
    case OscillatorKind::QuesneII: return "quesne2";
  }
  return "?";
}

OscillatorKind kind_from_name(const std::string& name) {
  std::string s;
  s.reserve(name.size());
  for (char c : name) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "ml") return OscillatorKind::ML;
  if (s == "quesne1") return OscillatorKind::QuesneI;
  if (s == "quesne2") return OscillatorKind::QuesneII;
  throw ConstraintViolation("unknown oscillator kind '" + name +
                            "' (expected ml, quesne1, or quesne2)");
}

const char* linear_class_name(LinearClass c) {
  switch (c) {
    case LinearClass::Center: return "center";
    case LinearClass::Saddle: return "saddle";
    case LinearClass::Degenerate: return "degenerate";
  }
  return "?";
}

const char* branch_name(Branch b) {
  return b == Branch::Plus ? "plus" : "minus";
}

void validate(const Params& p) {
  const struct { double v; const char* name; } fields[] = {
      {p.lambda, "lambda"}, {p.alpha, "alpha"}, {p.beta, "beta"},
      {p.gamma, "gamma"},   {p.f, "f"},         {p.omega, "omega"},
  };
  for (const auto& f : fields)
    if (!std::isfinite(f.v))
      throw ConstraintViolation(std::string(f.name) + " must be finite");
  if (p.lambda == 0.0) throw ConstraintViolation("lambda must be nonzero");
  if (p.alpha == 0.0) throw ConstraintViolation("alpha must be nonzero");
  if (p.gamma < 0.0) throw ConstraintViolation("gamma must be >= 0");
  if (p.f < 0.0) throw ConstraintViolation("f must be >= 0");
  if (p.omega <= 0.0) throw ConstraintViolation("omega must be > 0");
}

double inv_mass_factor(const Params& p, double x) {
  const double u = u_raw(p, x);
  if (!(u > kDomainGuard)) throw DomainViolation(x, u);
  return u;
}

bool in_domain(const Params& p, double x) {
  return u_raw(p, x) > kDomainGuard;
}

double potential(OscillatorKind kind, const Params& p, double x) {
  const double u = inv_mass_factor(p, x);
  const double a2 = p.alpha * p.alpha;
  switch (kind) {
    case OscillatorKind::ML:
      return 0.5 * a2 * x * x / u;
    case OscillatorKind::QuesneI:
      return 0.5 * (a2 * x * x - 2.0 * p.beta * x) / u;
    case OscillatorKind::QuesneII:
      return 0.5 * (a2 * x * x - 2.0 * p.beta * x * std::sqrt(u)) / u;
  }
  return 0.0;
}

double potential_gradient(OscillatorKind kind, const Params& p, double x) {
  const double u = inv_mass_factor(p, x);
  const double a2 = p.alpha * p.alpha;
  // dV/dx = (alpha^2 x - B(x)) / u^2 for all three families.
  return (a2 * x - force_extra(kind, p, x, u)) / (u * u);
}

State rhs_unforced(OscillatorKind kind, const Params& p, const State& s) {
  const double u = inv_mass_factor(p, s.x);
  const double num = p.lambda * s.x * s.y * s.y - p.alpha * p.alpha * s.x +
                     force_extra(kind, p, s.x, u);
  return {s.y, num / u};
}

State rhs_forced(OscillatorKind kind, const Params& p, const State& s,
                 double t) {
  State d = rhs_unforced(kind, p, s);
  if (p.gamma != 0.0 || p.f != 0.0) {
    const double u = u_raw(p, s.x);  // already guarded above
    d.y += (-p.gamma * s.y + p.f * std::cos(p.omega * t)) / u;
  }
  return d;
}

std::vector<Equilibrium> equilibria(OscillatorKind kind, const Params& p) {
  validate(p);
  std::vector<Equilibrium> out;
  if (kind == OscillatorKind::ML || p.beta == 0.0) {
    out.push_back(make_equilibrium(kind, p, 0.0, Branch::Plus));
    return out;
  }
  const double a2 = p.alpha * p.alpha;
  const double a4 = a2 * a2;
  if (kind == OscillatorKind::QuesneI) {
    const double disc = a4 + 4.0 * p.lambda * p.beta * p.beta;
    if (disc < 0.0)
      throw NoEquilibria(
          "no real equilibria: alpha^4 + 4*lambda*beta^2 < 0");
    const double s = std::sqrt(disc);
    // Roots of lambda*beta*x^2 + alpha^2*x - beta = 0 in the forms that
    // avoid subtracting nearly equal quantities for small lambda*beta^2.
    out.push_back(make_equilibrium(kind, p, 2.0 * p.beta / (a2 + s),
                                   Branch::Plus));
    out.push_back(make_equilibrium(
        kind, p, -(a2 + s) / (2.0 * p.lambda * p.beta), Branch::Minus));
  } else {
    const double disc = a4 - p.lambda * p.beta * p.beta;
    if (disc <= 0.0)
      throw NoEquilibria("no real equilibria: alpha^4 - lambda*beta^2 <= 0");
    const double r = p.beta / std::sqrt(disc);
    out.push_back(make_equilibrium(kind, p, r, Branch::Plus));
    out.push_back(make_equilibrium(kind, p, -r, Branch::Minus));
  }
  std::sort(out.begin(), out.end(),
            [](const Equilibrium& a, const Equilibrium& b) {
              return a.x_star < b.x_star;
            });
  return out;
}

double jacobian_a21(OscillatorKind kind, const Params& p, double x) {
  inv_mass_factor(p, x);  // domain guard only
  return a21_raw(kind, p, x);
}

EigPair eigenvalues(double a21) {
  if (a21 < 0.0) {
    const double w = std::sqrt(-a21);
    return {std::complex<double>(0.0, w), std::complex<double>(0.0, -w)};
  }
  const double r = std::sqrt(a21);
  return {std::complex<double>(r, 0.0), std::complex<double>(-r, 0.0)};
}

EigPair closed_form_eigs(OscillatorKind kind, const Params& p, Branch branch) {
  validate(p);
  const double a2 = p.alpha * p.alpha;
  const double a4 = a2 * a2;
  if (kind == OscillatorKind::ML || p.beta == 0.0) {
    if (branch == Branch::Minus)
      throw NotApplicable("single equilibrium at beta = 0: no minus branch");
    const double w = std::abs(p.alpha);
    return {std::complex<double>(0.0, w), std::complex<double>(0.0, -w)};
  }
  if (kind == OscillatorKind::QuesneI) {
    const double disc = a4 + 4.0 * p.lambda * p.beta * p.beta;
    if (disc < 0.0)
      throw NotApplicable(
          "alpha^4 + 4*lambda*beta^2 < 0: no real equilibria");
    const double s = std::sqrt(disc);
    if (branch == Branch::Plus) {
      const double w = std::sqrt(0.5 * (s + a2));
      return {std::complex<double>(0.0, w), std::complex<double>(0.0, -w)};
    }
    const double q = 2.0 * p.lambda * p.beta * p.beta / (s + a2);
    if (p.lambda > 0.0) {
      const double r = std::sqrt(q);
      return {std::complex<double>(r, 0.0), std::complex<double>(-r, 0.0)};
    }
    const double w = std::sqrt(-q);
    return {std::complex<double>(0.0, w), std::complex<double>(0.0, -w)};
  }
  const double disc = a4 - p.lambda * p.beta * p.beta;
  if (disc <= 0.0)
    throw NotApplicable("alpha^4 - lambda*beta^2 <= 0: no real equilibria");
  const double w = disc / std::abs(a2 * p.alpha);
  return {std::complex<double>(0.0, w), std::complex<double>(0.0, -w)};
}

double energy(OscillatorKind kind, const Params& p, const State& s) {
  const double u = inv_mass_factor(p, s.x);
  return 0.5 * s.y * s.y / u + potential(kind, p, s.x);
}

LinearClass classify_linear(double a21) {
  if (a21 < -kClassifyTol) return LinearClass::Center;
  if (a21 > kClassifyTol) return LinearClass::Saddle;
  return LinearClass::Degenerate;
}

}  // namespace quadosc
