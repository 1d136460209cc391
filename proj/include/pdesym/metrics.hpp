#pragma once

// Evaluation metrics for predicted trajectories and learned equations.

#include <cmath>
#include <cstdint>
#include <vector>

#include "pdesym/error.hpp"
#include "pdesym/evaluate.hpp"
#include "pdesym/random.hpp"
#include "pdesym/solver.hpp"
#include "pdesym/tokens.hpp"

namespace pdesym {

/// ||u - v||_2 / ||u||_2 over all entries.
inline double rel_l2(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size()) throw Error(ErrorKind::Syntax, "rel_l2: shape mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    num += (u[i] - v[i]) * (u[i] - v[i]);
    den += u[i] * u[i];
  }
  if (den == 0.0) throw Error(ErrorKind::DegenerateReference, "rel_l2: reference has zero norm");
  return std::sqrt(num / den);
}

/// 1 - sum_i ||u_i - v_i||^2 / sum_i ||u_i - mean(u_i)||^2, mean(u_i) the scalar mean of sample i.
inline double r2_score(const std::vector<std::vector<double>>& targets, const std::vector<std::vector<double>>& preds) {
  if (targets.empty() || targets.size() != preds.size()) throw Error(ErrorKind::Syntax, "r2_score: unmatched inputs");
  double num = 0.0, den = 0.0;
  for (std::size_t s = 0; s < targets.size(); ++s) {
    const auto& u = targets[s];
    const auto& v = preds[s];
    if (u.size() != v.size() || u.empty()) throw Error(ErrorKind::Syntax, "r2_score: shape mismatch");
    double mean = 0.0;
    for (double x : u) mean += x;
    mean /= static_cast<double>(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
      num += (u[i] - v[i]) * (u[i] - v[i]);
      den += (u[i] - mean) * (u[i] - mean);
    }
  }
  if (den == 0.0) throw Error(ErrorKind::DegenerateReference, "r2_score: targets have zero variance");
  return 1.0 - num / den;
}

struct SymbolicErrorOptions {
  std::size_t n_polys = 10;
  std::size_t grid = 32;  // points per axis on [0,1]^2
  std::uint64_t seed = 0;
  std::size_t max_draws = 100;
};

namespace detail {

inline std::vector<double> residual_on_grid(const Expr& r, const PolySurrogate& s, std::size_t n) {
  auto u = s.as_field();
  std::vector<double> out;
  out.reserve(n * n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      double t = n == 1 ? 0.0 : static_cast<double>(a) / static_cast<double>(n - 1);
      double x = n == 1 ? 0.0 : static_cast<double>(b) / static_cast<double>(n - 1);
      out.push_back(evaluate(r, {x, t, {}}, u));
    }
  return out;
}

}  // namespace detail

/// Mean over random polynomial surrogates of the relative L2 discrepancy
/// between the two residuals evaluated on a grid over [0,1]^2.
inline double symbolic_error(const Equation& learned, const Equation& truth, const SymbolicErrorOptions& opt = {}) {
  double total = 0.0;
  for (std::size_t p = 0; p < opt.n_polys; ++p) {
    std::vector<double> rt;
    PolySurrogate s;
    bool found = false;
    for (std::size_t attempt = 0; attempt < opt.max_draws && !found; ++attempt) {
      Rng rng = make_rng(opt.seed, {tag("surrogate"), p, attempt});
      for (auto& c : s.c) c = uniform(rng, -1.0, 1.0);
      rt = detail::residual_on_grid(truth.residual, s, opt.grid);
      double ss = 0.0;
      for (double v : rt) ss += v * v;
      found = std::sqrt(ss / static_cast<double>(rt.size())) >= 1e-6;
    }
    if (!found) throw Error(ErrorKind::DegenerateReference, "true residual vanishes on every surrogate");
    std::vector<double> rl = detail::residual_on_grid(learned.residual, s, opt.grid);
    for (double v : rl)
      if (!std::isfinite(v)) throw Error(ErrorKind::NonFinite, "learned residual is not finite on the grid");
    total += rel_l2(rt, rl);
  }
  return total / static_cast<double>(opt.n_polys);
}

/// Share of sequences that decode and have symbolic error below 100%.
inline double valid_fraction(const std::vector<TokenSeq>& generated, const std::vector<Equation>& truths,
                             const SymbolicErrorOptions& opt = {}) {
  if (generated.size() != truths.size()) throw Error(ErrorKind::Syntax, "valid_fraction: unmatched inputs");
  if (generated.empty()) return 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    try {
      ok += symbolic_error(from_tokens(generated[i]), truths[i], opt) < 1.0;
    } catch (const Error&) {
    }
  }
  return static_cast<double>(ok) / static_cast<double>(generated.size());
}

/// Re-simulates `law` from u0 on the reference timestamps and compares the whole space-time block.
inline double time_series_error(const ConservationLaw& law, const State& u0, const SpaceTimeField& truth) {
  SpaceTimeField pred = solve_at(law, u0, truth.grid, truth.times);
  return rel_l2(truth.values, pred.values);
}

inline double time_series_error(const Equation& refined, const State& u0, const SpaceTimeField& truth) {
  return time_series_error(law_from_equation(refined), u0, truth);
}

struct Normalized {
  SpaceTimeField field;
  double mean = 0.0;
  double std = 1.0;
};

/// Scalar mean/std standardization over all entries.
inline Normalized normalize(const SpaceTimeField& f) {
  if (f.values.empty()) throw Error(ErrorKind::DegenerateReference, "empty field");
  double mean = 0.0;
  for (double v : f.values) mean += v;
  mean /= static_cast<double>(f.values.size());
  double var = 0.0;
  for (double v : f.values) var += (v - mean) * (v - mean);
  double sd = std::sqrt(var / static_cast<double>(f.values.size()));
  if (!(sd > 0.0)) throw Error(ErrorKind::DegenerateReference, "field has zero standard deviation");
  Normalized n{f, mean, sd};
  for (auto& v : n.field.values) v = (v - mean) / sd;
  return n;
}

inline SpaceTimeField denormalize(const Normalized& n) {
  SpaceTimeField f = n.field;
  for (auto& v : f.values) v = v * n.std + n.mean;
  return f;
}

}  // namespace pdesym
