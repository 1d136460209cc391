#pragma once

// Sequential Monte Carlo refinement of PDE coefficients against an observed
// trajectory: propagate (random walk) -> reweight (Gaussian observation
// likelihood of a one-interval forward solve) -> resample (inverse CDF).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "pdesym/error.hpp"
#include "pdesym/parallel.hpp"
#include "pdesym/random.hpp"
#include "pdesym/solver.hpp"

namespace pdesym {

enum class Likelihood {
  FieldNorm,  // one Gaussian on the discrete L2 norm of the residual field
  PerPoint,   // independent Gaussian at every grid point
};

struct FilterConfig {
  std::size_t particles = 500;
  std::size_t steps = 10;
  double process_var = 1e-5;
  double obs_scale = 0.05;
  double init_rel_halfwidth = 0.1;
  std::uint64_t seed = 0;
  Likelihood likelihood = Likelihood::PerPoint;
  unsigned threads = 0;  // 0: default_threads()

  void validate() const {
    if (particles < 2) throw Error(ErrorKind::Syntax, "need at least 2 particles");
    if (steps < 1) throw Error(ErrorKind::Syntax, "need at least 1 refinement step");
    if (!(process_var > 0.0)) throw Error(ErrorKind::Syntax, "process variance must be positive");
    if (!(obs_scale > 0.0)) throw Error(ErrorKind::Syntax, "observation scale must be positive");
    if (!(init_rel_halfwidth >= 0.0)) throw Error(ErrorKind::Syntax, "initial half-width must be non-negative");
  }
};

/// Maps a particle's coefficient vector onto a solvable law: [q1] for
/// inviscid families, [q1, q2] otherwise.
struct LawTemplate {
  FluxKind flux = FluxKind::Quadratic;
  bool viscous = false;

  std::size_t dim() const { return viscous ? 2 : 1; }
  ConservationLaw law(std::span<const double> a) const { return {flux, a[0], viscous ? a[1] : 0.0}; }
  std::vector<double> coefficients(const ConservationLaw& l) const {
    return viscous ? std::vector<double>{l.q1, l.q2} : std::vector<double>{l.q1};
  }
  static LawTemplate of(const ConservationLaw& l) { return {l.flux, l.q2 != 0.0}; }
};

struct ParticleEnsemble {
  std::size_t dim = 1;
  std::vector<double> coords;   // size() x dim, particle-major
  std::vector<double> weights;  // normalized

  std::size_t size() const { return weights.size(); }
  std::span<const double> particle(std::size_t i) const { return {coords.data() + i * dim, dim}; }
  std::span<double> particle(std::size_t i) { return {coords.data() + i * dim, dim}; }

  std::vector<double> mean() const {
    std::vector<double> m(dim, 0.0);
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < dim; ++j) m[j] += coords[i * dim + j];
    for (auto& v : m) v /= static_cast<double>(size());
    return m;
  }
  std::vector<double> stddev() const {
    auto m = mean();
    std::vector<double> s(dim, 0.0);
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < dim; ++j) s[j] += std::pow(coords[i * dim + j] - m[j], 2);
    for (auto& v : s) v = std::sqrt(v / static_cast<double>(size()));
    return s;
  }
  double ess() const {
    double s = 0.0;
    for (double w : weights) s += w * w;
    return 1.0 / s;
  }
};

/// Observed frames consumed by the filter.
struct ObservationSeq {
  Grid1D grid;
  std::vector<double> times;
  std::vector<State> frames;

  static ObservationSeq from_field(const SpaceTimeField& f, std::size_t count) {
    if (count > f.nt()) throw Error(ErrorKind::Syntax, "trajectory has fewer frames than requested");
    ObservationSeq o{f.grid, {}, {}};
    for (std::size_t k = 0; k < count; ++k) {
      o.times.push_back(f.times[k]);
      o.frames.push_back(f.frame_state(k));
    }
    return o;
  }
};

/// Discrete L2 norm sqrt(sum u^2 dx).
inline double l2_norm(const State& u, double dx) {
  double s = 0.0;
  for (double v : u) s += v * v;
  return std::sqrt(s * dx);
}

/// Every coordinate j drawn from Unif((1-h) a0_j, (1+h) a0_j); uniform weights.
inline ParticleEnsemble init_ensemble(const std::vector<double>& alpha0, const FilterConfig& cfg) {
  cfg.validate();
  ParticleEnsemble e;
  e.dim = alpha0.size();
  e.coords.resize(cfg.particles * e.dim);
  e.weights.assign(cfg.particles, 1.0 / static_cast<double>(cfg.particles));
  double h = cfg.init_rel_halfwidth;
  for (std::size_t i = 0; i < cfg.particles; ++i) {
    Rng rng = make_rng(cfg.seed, {tag("init"), i});
    for (std::size_t j = 0; j < e.dim; ++j) {
      double a = (1.0 - h) * alpha0[j], b = (1.0 + h) * alpha0[j];
      e.coords[i * e.dim + j] = uniform(rng, std::min(a, b), std::max(a, b));
    }
  }
  return e;
}

/// Random-walk proposal: adds N(0, process_var) to every coordinate.
inline void propagate(ParticleEnsemble& e, const FilterConfig& cfg, std::size_t step) {
  double sd = std::sqrt(cfg.process_var);
  for (std::size_t i = 0; i < e.size(); ++i) {
    Rng rng = make_rng(cfg.seed, {tag("propagate"), step, i});
    std::normal_distribution<double> nu(0.0, sd);
    for (auto& a : e.particle(i)) a += nu(rng);
  }
}

/// Normalizes log-weights in place into probabilities (max subtracted first).
/// Entries equal to -inf get probability 0.
inline std::vector<double> softmax(const std::vector<double>& logw) {
  double mx = -HUGE_VAL;
  for (double l : logw) mx = std::max(mx, l);
  if (!std::isfinite(mx)) throw Error(ErrorKind::AllWeightsDegenerate, "every particle has zero likelihood");
  std::vector<double> p(logw.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logw[i] - mx);
    s += p[i];
  }
  for (auto& v : p) v /= s;
  return p;
}

/// Gaussian log-likelihood (up to a constant) of observing `obs` when the
/// model predicts `pred`, with noise scale eps.
inline double log_likelihood(const State& pred, const State& obs, double eps, double dx, Likelihood kind) {
  double s = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) s += (obs[i] - pred[i]) * (obs[i] - pred[i]);
  if (kind == Likelihood::FieldNorm) s *= dx;
  return -s / (2.0 * eps * eps);
}

/// Weights each particle by the likelihood of u_obs given a forward solve of
/// its law from u_prev over dt_obs. Particles whose solve fails get weight 0.
inline void reweight(ParticleEnsemble& e, const State& u_prev, const State& u_obs, const Grid1D& g,
                     const LawTemplate& tmpl, const FilterConfig& cfg, double dt_obs, double eps) {
  std::vector<double> logw(e.size(), -HUGE_VAL);
  parallel_for(
      e.size(),
      [&](std::size_t i) {
        ConservationLaw law = tmpl.law(e.particle(i));
        if (law.q2 < 0.0) return;
        try {
          State pred = advance(law, u_prev, g, dt_obs);
          logw[i] = log_likelihood(pred, u_obs, eps, g.dx, cfg.likelihood);
        } catch (const Error& err) {
          if (!is_numeric(err.kind())) throw;
        }
      },
      cfg.threads);
  e.weights = softmax(logw);
}

/// Multinomial resampling through the weighted empirical CDF; uniform weights after.
inline void resample(ParticleEnsemble& e, Rng& rng) {
  std::size_t m = e.size();
  std::vector<double> cdf(m);
  std::partial_sum(e.weights.begin(), e.weights.end(), cdf.begin());
  std::vector<double> out(e.coords.size());
  std::uniform_real_distribution<double> unif(0.0, cdf.back());
  for (std::size_t k = 0; k < m; ++k) {
    double r = unif(rng);
    auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
    std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), m - 1);
    while (e.weights[i] == 0.0 && i + 1 < m) ++i;  // never land on a zero-weight particle
    std::copy_n(e.coords.begin() + static_cast<std::ptrdiff_t>(i * e.dim), e.dim,
                out.begin() + static_cast<std::ptrdiff_t>(k * e.dim));
  }
  e.coords = std::move(out);
  e.weights.assign(m, 1.0 / static_cast<double>(m));
}

struct StepDiagnostics {
  double ess = 0.0;              // effective sample size after reweighting
  std::vector<double> mean;      // ensemble mean after resampling
  std::vector<double> spread;    // ensemble standard deviation after resampling
};

struct RefineResult {
  std::vector<double> coefficients;
  std::vector<StepDiagnostics> steps;
  ParticleEnsemble ensemble;
};

/// Runs cfg.steps rounds over consecutive frames 0..steps and returns the
/// unweighted mean of the final ensemble.
inline RefineResult refine(const std::vector<double>& alpha0, const ObservationSeq& obs, const LawTemplate& tmpl,
                           const FilterConfig& cfg) {
  cfg.validate();
  if (alpha0.size() != tmpl.dim()) throw Error(ErrorKind::Syntax, "coefficient count does not match the law");
  if (obs.frames.size() < cfg.steps + 1)
    throw Error(ErrorKind::Syntax, "need at least steps+1 observed frames");
  double eps = cfg.obs_scale * l2_norm(obs.frames[0], obs.grid.dx);
  if (!(eps > 0.0)) throw Error(ErrorKind::DegenerateReference, "initial state has zero norm");
  RefineResult res;
  res.ensemble = init_ensemble(alpha0, cfg);
  for (std::size_t k = 1; k <= cfg.steps; ++k) {
    propagate(res.ensemble, cfg, k);
    reweight(res.ensemble, obs.frames[k - 1], obs.frames[k], obs.grid, tmpl, cfg, obs.times[k] - obs.times[k - 1],
             eps);
    StepDiagnostics d;
    d.ess = res.ensemble.ess();
    Rng rng = make_rng(cfg.seed, {tag("resample"), k});
    resample(res.ensemble, rng);
    d.mean = res.ensemble.mean();
    d.spread = res.ensemble.stddev();
    res.steps.push_back(std::move(d));
  }
  res.coefficients = res.ensemble.mean();
  return res;
}

}  // namespace pdesym
