#pragma once

// Filtering study: for each family, perturb the true coefficients by a
// relative error, refine them against the trajectory, and compare symbolic
// and time-series errors with and without refinement.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pdesym/datagen.hpp"
#include "pdesym/filter.hpp"
#include "pdesym/metrics.hpp"

namespace pdesym {

inline std::vector<std::string> table_families() {
  return {"burgers", "inviscid_burgers", "cl_cubic", "icl_cubic", "icl_sine"};
}

struct StudyConfig {
  std::vector<std::string> families = table_families();
  std::size_t trials = 20;
  double coeff_error = 0.03;
  std::uint64_t seed = 0;
  FilterConfig filter;
  SymbolicErrorOptions symbolic;
};

struct TrialResult {
  std::string family;
  std::size_t trial = 0;
  std::vector<double> truth, initial, refined;
  double symbolic_without = 0, symbolic_with = 0;
  double series_without = 0, series_with = 0;
};

struct FamilySummary {
  std::string family;
  std::size_t trials = 0;
  double symbolic_without = 0, symbolic_with = 0;
  double series_without = 0, series_with = 0;
};

struct StudyReport {
  std::vector<FamilySummary> families;
  std::vector<TrialResult> trials;
};

/// Decoder-style estimate: every coefficient off by +-rel (random sign),
/// written with 3 significant digits.
inline std::vector<double> perturb_coefficients(const std::vector<double>& truth, double rel, Rng& rng) {
  std::vector<double> out;
  std::bernoulli_distribution sign(0.5);
  for (double q : truth) out.push_back(round_sig(q * (1.0 + (sign(rng) ? rel : -rel)), 3));
  return out;
}

inline TrialResult run_trial(const FamilySpec& spec, std::size_t trial, const StudyConfig& cfg) {
  Rng rng = make_rng(cfg.seed, {tag("study"), tag(spec.name), trial});
  ConservationLaw truth = sample_params(spec, rng);
  State u0 = sample_ic(spec, rng);
  Grid1D g = spec.grid();
  SpaceTimeField traj = solve(truth, u0, g, spec.t_final, spec.nt);

  LawTemplate tmpl = LawTemplate::of(spec.law());
  TrialResult r;
  r.family = spec.name;
  r.trial = trial;
  r.truth = tmpl.coefficients(truth);
  r.initial = perturb_coefficients(r.truth, cfg.coeff_error, rng);

  FilterConfig fc = cfg.filter;
  fc.seed = derive_seed(cfg.seed, {tag("filter"), tag(spec.name), trial});
  auto obs = ObservationSeq::from_field(traj, fc.steps + 1);
  r.refined = refine(r.initial, obs, tmpl, fc).coefficients;

  ConservationLaw before = tmpl.law(r.initial), after = tmpl.law(r.refined);
  Equation eq_truth = law_to_equation(truth);
  r.symbolic_without = symbolic_error(law_to_equation(before), eq_truth, cfg.symbolic);
  r.symbolic_with = symbolic_error(law_to_equation(after), eq_truth, cfg.symbolic);
  r.series_without = time_series_error(before, u0, traj);
  r.series_with = time_series_error(after, u0, traj);
  return r;
}

template <class Progress>
StudyReport run_study(const StudyConfig& cfg, Progress&& progress) {
  if (cfg.trials < 1) throw Error(ErrorKind::Syntax, "need at least one trial");
  StudyReport rep;
  for (const auto& name : cfg.families) {
    const FamilySpec& spec = family(name);
    FamilySummary s{name, cfg.trials};
    for (std::size_t t = 0; t < cfg.trials; ++t) {
      TrialResult r = run_trial(spec, t, cfg);
      s.symbolic_without += r.symbolic_without / static_cast<double>(cfg.trials);
      s.symbolic_with += r.symbolic_with / static_cast<double>(cfg.trials);
      s.series_without += r.series_without / static_cast<double>(cfg.trials);
      s.series_with += r.series_with / static_cast<double>(cfg.trials);
      progress(r);
      rep.trials.push_back(std::move(r));
    }
    rep.families.push_back(s);
  }
  return rep;
}

inline StudyReport run_study(const StudyConfig& cfg) {
  return run_study(cfg, [](const TrialResult&) {});
}

}  // namespace pdesym
