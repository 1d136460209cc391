#pragma once

// Scalar conservation laws u_t + q1 (f(u))_x = q2 u_xx on a periodic grid:
// local Lax-Friedrichs fluxes, central diffusion, Heun time stepping.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pdesym/canon.hpp"
#include "pdesym/error.hpp"
#include "pdesym/expr.hpp"

namespace pdesym {

enum class FluxKind { Quadratic, Cubic, Sine };

inline std::string_view to_string(FluxKind k) {
  switch (k) {
    case FluxKind::Quadratic: return "quadratic";
    case FluxKind::Cubic: return "cubic";
    case FluxKind::Sine: return "sine";
  }
  return "?";
}

struct ConservationLaw {
  FluxKind flux = FluxKind::Quadratic;
  double q1 = 0.0;
  double q2 = 0.0;

  double f(double u) const {
    switch (flux) {
      case FluxKind::Quadratic: return u * u;
      case FluxKind::Cubic: return u * u * u;
      case FluxKind::Sine: return std::sin(u);
    }
    return 0.0;
  }
  double df(double u) const {
    switch (flux) {
      case FluxKind::Quadratic: return 2.0 * u;
      case FluxKind::Cubic: return 3.0 * u * u;
      case FluxKind::Sine: return std::cos(u);
    }
    return 0.0;
  }
};

struct Grid1D {
  std::size_t nx = 128;
  double x0 = 0.0;
  double dx = 1.0 / 128;

  static Grid1D periodic(std::size_t nx, double length, double x0 = 0.0) {
    return {nx, x0, length / static_cast<double>(nx)};
  }
  double x(std::size_t i) const { return x0 + static_cast<double>(i) * dx; }
  double length() const { return static_cast<double>(nx) * dx; }
  void validate() const {
    if (nx < 8) throw Error(ErrorKind::Syntax, "grid needs at least 8 cells");
    if (!(dx > 0.0) || !std::isfinite(dx)) throw Error(ErrorKind::Syntax, "grid spacing must be positive");
  }
};

using State = std::vector<double>;

struct SpaceTimeField {
  Grid1D grid;
  std::vector<double> times;
  std::vector<double> values;  // times.size() x grid.nx, time-major

  std::size_t nt() const { return times.size(); }
  const double* frame(std::size_t k) const { return values.data() + k * grid.nx; }
  State frame_state(std::size_t k) const { return State(frame(k), frame(k) + grid.nx); }
};

struct SolverOptions {
  double cfl = 0.4;
  double dt_max = 1e-2;  // used when neither advection nor diffusion limits the step
};

/// Largest stable step: cfl * min(dx / max|q1 f'(u)|, dx^2 / (2 q2)).
inline double cfl_dt(const ConservationLaw& law, const State& u, const Grid1D& g, const SolverOptions& opt = {}) {
  double speed = 0.0;
  for (double v : u) speed = std::max(speed, std::abs(law.q1 * law.df(v)));
  double limit = HUGE_VAL;
  if (speed > 0.0) limit = g.dx / speed;
  if (law.q2 > 0.0) limit = std::min(limit, g.dx * g.dx / (2.0 * law.q2));
  if (!std::isfinite(speed)) return 0.0;
  return limit == HUGE_VAL ? opt.dt_max : opt.cfl * limit;
}

namespace detail {

// du/dt = -(F_{i+1/2} - F_{i-1/2})/dx + q2 (u_{i+1} - 2u_i + u_{i-1})/dx^2
inline void rhs(const ConservationLaw& law, const State& u, const Grid1D& g, State& out,
                std::vector<double>& flux) {
  std::size_t n = u.size();
  flux.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double a = u[i], b = u[i + 1 == n ? 0 : i + 1];
    double speed = std::max(std::abs(law.q1 * law.df(a)), std::abs(law.q1 * law.df(b)));
    flux[i] = 0.5 * (law.q1 * law.f(a) + law.q1 * law.f(b)) - 0.5 * speed * (b - a);  // at i+1/2
  }
  out.resize(n);
  double inv_dx = 1.0 / g.dx, nu = law.q2 / (g.dx * g.dx);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t l = i == 0 ? n - 1 : i - 1, r = i + 1 == n ? 0 : i + 1;
    out[i] = -(flux[i] - flux[l]) * inv_dx;
    if (law.q2 != 0.0) out[i] += nu * (u[r] - 2.0 * u[i] + u[l]);
  }
}

struct Workspace {
  State k, mid, flux;
};

inline void euler(const ConservationLaw& law, const State& u, double dt, const Grid1D& g, State& out, Workspace& w) {
  rhs(law, u, g, w.k, w.flux);
  out.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] + dt * w.k[i];
}

inline void check_finite(const State& u) {
  for (double v : u)
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "solution became non-finite");
}

// Heun: average of u and two chained Euler steps.
inline void heun(const ConservationLaw& law, State& u, double dt, const Grid1D& g, Workspace& w) {
  euler(law, u, dt, g, w.mid, w);
  State second;
  euler(law, w.mid, dt, g, second, w);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 0.5 * (u[i] + second[i]);
}

}  // namespace detail

/// One forward-Euler step.
inline State step(const ConservationLaw& law, const State& u, double dt, const Grid1D& g,
                  const SolverOptions& opt = {}) {
  double limit = cfl_dt(law, u, g, opt);
  if (dt > limit * (1.0 + 1e-12))
    throw Error(ErrorKind::CflViolation,
                "time step " + format_exact(dt) + " exceeds stable limit " + format_exact(limit));
  detail::Workspace w;
  State out;
  detail::euler(law, u, dt, g, out, w);
  detail::check_finite(out);
  return out;
}

/// Integrates from times.front() and records the state at every requested time.
inline SpaceTimeField solve_at(const ConservationLaw& law, const State& u0, const Grid1D& g,
                               const std::vector<double>& times, const SolverOptions& opt = {}) {
  g.validate();
  if (u0.size() != g.nx) throw Error(ErrorKind::Syntax, "initial state does not match grid");
  if (times.empty()) throw Error(ErrorKind::Syntax, "no output times");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw Error(ErrorKind::Syntax, "output times must increase");
  detail::check_finite(u0);
  SpaceTimeField out{g, times, {}};
  out.values.reserve(times.size() * g.nx);
  out.values.insert(out.values.end(), u0.begin(), u0.end());
  State u = u0;
  detail::Workspace w;
  double t = times.front();
  for (std::size_t k = 1; k < times.size(); ++k) {
    while (t < times[k]) {
      double dt = cfl_dt(law, u, g, opt);
      if (!(dt > 0.0)) throw Error(ErrorKind::NonFinite, "stable time step collapsed to zero");
      bool last = t + dt >= times[k];
      if (last) dt = times[k] - t;
      detail::heun(law, u, dt, g, w);
      detail::check_finite(u);
      t = last ? times[k] : t + dt;
    }
    out.values.insert(out.values.end(), u.begin(), u.end());
  }
  return out;
}

inline std::vector<double> uniform_times(double t_final, std::size_t nt) {
  std::vector<double> ts(nt);
  for (std::size_t k = 0; k < nt; ++k)
    ts[k] = nt == 1 ? 0.0 : t_final * static_cast<double>(k) / static_cast<double>(nt - 1);
  return ts;
}

/// nt_out uniformly spaced samples on [0, t_final], the first being u0.
inline SpaceTimeField solve(const ConservationLaw& law, const State& u0, const Grid1D& g, double t_final,
                            std::size_t nt_out, const SolverOptions& opt = {}) {
  if (!(t_final > 0.0)) throw Error(ErrorKind::Syntax, "t_final must be positive");
  if (nt_out < 2) throw Error(ErrorKind::Syntax, "need at least two output times");
  return solve_at(law, u0, g, uniform_times(t_final, nt_out), opt);
}

/// Advances u by `span` and returns the final state only.
inline State advance(const ConservationLaw& law, const State& u, const Grid1D& g, double span,
                     const SolverOptions& opt = {}) {
  auto f = solve_at(law, u, g, {0.0, span}, opt);
  return f.frame_state(1);
}

// ---------------------------------------------------------------------------
// Equations <-> laws

/// Residual u_t + q1 (f(u))_x - q2 u_xx, with the viscous term omitted when q2 = 0.
inline Equation law_to_equation(const ConservationLaw& law) {
  Expr fu = law.flux == FluxKind::Sine ? sin(field()) : pow(field(), law.flux == FluxKind::Cubic ? 3 : 2);
  Expr r = add(u_t(), mul(num(law.q1), d(fu, DiffVar::X)));
  if (law.q2 != 0.0) r = sub(r, mul(num(law.q2), u_x(2)));
  return {r};
}

/// Recognizes the canonical form of a solvable family. Throws NotSolvable otherwise.
inline ConservationLaw law_from_equation(const Equation& eq) {
  auto terms = canonical_terms(canonicalize(eq.residual));
  std::optional<double> ut, adv, diff;
  std::optional<FluxKind> kind;
  const Expr uux = mul(field(), u_x());
  const Expr u2ux = mul(pow(field(), 2), u_x());
  const Expr cosux = mul(cos(field()), u_x());
  auto fail = [&](const std::string& why) -> ConservationLaw {
    throw Error(ErrorKind::NotSolvable, "not a solvable conservation law: " + why);
  };
  for (const Expr& term : terms) {
    TermParts p = split_term(term);
    if (!p.product) return fail("constant term");
    if (p.coefficient && p.coefficient->is(NodeKind::Placeholder)) return fail("unresolved [?] coefficient");
    double c = p.coefficient ? p.coefficient->value() : 1.0;
    const Expr& x = *p.product;
    auto set = [&](std::optional<double>& slot) {
      if (slot) fail("repeated term");
      slot = c;
    };
    if (x == u_t()) {
      set(ut);
    } else if (x == u_x(2)) {
      set(diff);
    } else if (x == uux || x == u2ux || x == cosux) {
      set(adv);
      kind = x == uux ? FluxKind::Quadratic : x == u2ux ? FluxKind::Cubic : FluxKind::Sine;
    } else {
      return fail("unsupported term " + to_infix(term));
    }
  }
  if (!ut || *ut == 0.0) return fail("missing u_t");
  ConservationLaw law;
  law.flux = kind.value_or(FluxKind::Quadratic);
  double a = adv.value_or(0.0) / *ut;
  switch (law.flux) {
    case FluxKind::Quadratic: law.q1 = a / 2.0; break;
    case FluxKind::Cubic: law.q1 = a / 3.0; break;
    case FluxKind::Sine: law.q1 = a; break;
  }
  law.q2 = -diff.value_or(0.0) / *ut;
  if (law.q2 < 0.0) return fail("negative viscosity");
  return law;
}

}  // namespace pdesym
