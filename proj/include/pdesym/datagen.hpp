#pragma once

// Synthetic trajectories of the six conservation-law families.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pdesym/error.hpp"
#include "pdesym/grid_io.hpp"
#include "pdesym/parallel.hpp"
#include "pdesym/random.hpp"
#include "pdesym/solver.hpp"
#include "pdesym/tokens.hpp"

namespace pdesym {

struct FamilySpec {
  std::string name;
  FluxKind flux = FluxKind::Quadratic;
  double q1 = 0.5;
  double q2 = 0.0;
  double t_final = 1.0;
  double x_length = 1.0;
  std::size_t nx = 128;
  std::size_t nt = 32;

  bool viscous() const { return q2 != 0.0; }
  ConservationLaw law() const { return {flux, q1, q2}; }
  Grid1D grid() const { return Grid1D::periodic(nx, x_length); }
};

inline const std::vector<FamilySpec>& families() {
  static const std::vector<FamilySpec> all = {
      {"burgers", FluxKind::Quadratic, 0.5, 0.05},
      {"inviscid_burgers", FluxKind::Quadratic, 0.5, 0.0},
      {"cl_cubic", FluxKind::Cubic, 0.33, 0.05},
      {"icl_cubic", FluxKind::Cubic, 0.33, 0.0},
      {"cl_sine", FluxKind::Sine, 1.0, 0.05},
      {"icl_sine", FluxKind::Sine, 1.0, 0.0},
  };
  return all;
}

inline const FamilySpec& family(std::string_view name) {
  for (const auto& f : families())
    if (f.name == name) return f;
  throw Error(ErrorKind::UnknownSymbol, "unknown family '" + std::string(name) + "'");
}

/// Each nonzero base coefficient scaled by Unif(0.9, 1.1).
inline ConservationLaw sample_params(const FamilySpec& spec, Rng& rng) {
  ConservationLaw law = spec.law();
  if (law.q1 != 0.0) law.q1 *= uniform(rng, 0.9, 1.1);
  if (law.q2 != 0.0) law.q2 *= uniform(rng, 0.9, 1.1);
  return law;
}

/// sum_j a_j sin(2 pi j x / L + phi_j) for j = 1..amps.size(), rescaled to max|u| = 1.
inline State sine_series(const Grid1D& g, const std::vector<double>& amps, const std::vector<double>& phases) {
  State u(g.nx, 0.0);
  double L = g.length();
  for (std::size_t i = 0; i < g.nx; ++i)
    for (std::size_t j = 0; j < amps.size(); ++j)
      u[i] += amps[j] * std::sin(2.0 * std::numbers::pi * static_cast<double>(j + 1) * (g.x(i) - g.x0) / L + phases[j]);
  double mx = 0.0;
  for (double v : u) mx = std::max(mx, std::abs(v));
  if (mx == 0.0) throw Error(ErrorKind::DegenerateReference, "initial condition is identically zero");
  for (auto& v : u) v /= mx;
  return u;
}

inline State sample_ic(const FamilySpec& spec, Rng& rng) {
  std::vector<double> a(5), phi(5);
  for (std::size_t j = 0; j < 5; ++j) {
    a[j] = uniform(rng, -0.5, 0.5);
    phi[j] = uniform(rng, 0.0, 2.0 * std::numbers::pi);
  }
  return sine_series(spec.grid(), a, phi);
}

enum class Split { Train, Test };

struct DatasetManifest {
  std::vector<FamilySpec> families = pdesym::families();
  std::size_t params_per_family = 4;
  std::size_t ics_per_param = 2;
  std::uint64_t seed = 0;
  Split split = Split::Test;
};

/// One generated sample before it is written out.
struct Sample {
  std::string id;
  std::string family;
  ConservationLaw law;
  SpaceTimeField trajectory;
};

inline nlohmann::json equation_json(const std::string& family_name, const ConservationLaw& law) {
  Equation eq = law_to_equation(law);
  nlohmann::json j;
  j["family"] = family_name;
  j["flux"] = std::string(to_string(law.flux));
  j["coefficients"] = {{"q1", law.q1}, {"q2", law.q2}};
  j["infix"] = to_infix(eq);
  j["canonical_tokens"] = to_canonical_tokens(eq).tokens;
  return j;
}

inline ConservationLaw law_from_json(const nlohmann::json& j) {
  try {
    std::string flux = j.at("flux").get<std::string>();
    ConservationLaw law;
    if (flux == "quadratic") law.flux = FluxKind::Quadratic;
    else if (flux == "cubic") law.flux = FluxKind::Cubic;
    else if (flux == "sine") law.flux = FluxKind::Sine;
    else throw Error(ErrorKind::UnknownSymbol, "unknown flux '" + flux + "'");
    law.q1 = j.at("coefficients").at("q1").get<double>();
    law.q2 = j.at("coefficients").at("q2").get<double>();
    return law;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Io, std::string("malformed equation JSON: ") + e.what());
  }
}

struct GenerateReport {
  std::size_t written = 0;
  std::vector<std::string> skipped;  // ids whose solve failed
};

/// Writes manifest.json, eq_{id}.json and traj_{id}.grid under `dir`.
inline GenerateReport generate(const DatasetManifest& m, const std::filesystem::path& dir, unsigned threads = 0) {
  if (m.params_per_family < 1 || m.ics_per_param < 1) throw Error(ErrorKind::Syntax, "counts must be at least 1");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());

  // train and test draw from disjoint seed streams
  std::uint64_t root = derive_seed(m.seed, {tag(m.split == Split::Train ? "train" : "test")});
  struct Task {
    std::size_t fam, param, ic;
  };
  std::vector<Task> tasks;
  for (std::size_t f = 0; f < m.families.size(); ++f)
    for (std::size_t p = 0; p < m.params_per_family; ++p)
      for (std::size_t i = 0; i < m.ics_per_param; ++i) tasks.push_back({f, p, i});

  std::vector<std::optional<Sample>> out(tasks.size());
  parallel_for(
      tasks.size(),
      [&](std::size_t k) {
        const Task& t = tasks[k];
        const FamilySpec& spec = m.families[t.fam];
        Rng prng = make_rng(root, {tag(spec.name), t.param});
        ConservationLaw law = sample_params(spec, prng);
        Rng irng = make_rng(root, {tag(spec.name), t.param, t.ic});
        State u0 = sample_ic(spec, irng);
        char id[64];
        std::snprintf(id, sizeof id, "%s_p%03zu_i%03zu", spec.name.c_str(), t.param, t.ic);
        try {
          out[k] = Sample{id, spec.name, law, solve(law, u0, spec.grid(), spec.t_final, spec.nt)};
        } catch (const Error& e) {
          if (!is_numeric(e.kind())) throw;
        }
      },
      threads);

  GenerateReport report;
  nlohmann::json index;
  index["seed"] = m.seed;
  index["split"] = m.split == Split::Train ? "train" : "test";
  index["params_per_family"] = m.params_per_family;
  index["ics_per_param"] = m.ics_per_param;
  index["families"] = nlohmann::json::array();
  for (const auto& f : m.families)
    index["families"].push_back({{"name", f.name},
                                 {"flux", std::string(to_string(f.flux))},
                                 {"base_coefficients", {{"q1", f.q1}, {"q2", f.q2}}},
                                 {"t_final", f.t_final},
                                 {"x_length", f.x_length},
                                 {"nx", f.nx},
                                 {"nt", f.nt}});
  index["samples"] = nlohmann::json::array();
  index["skipped"] = nlohmann::json::array();
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    if (!out[k]) {
      const FamilySpec& spec = m.families[tasks[k].fam];
      char id[64];
      std::snprintf(id, sizeof id, "%s_p%03zu_i%03zu", spec.name.c_str(), tasks[k].param, tasks[k].ic);
      report.skipped.emplace_back(id);
      index["skipped"].push_back(id);
      continue;
    }
    const Sample& s = *out[k];
    write_file((dir / ("eq_" + s.id + ".json")).string(), equation_json(s.family, s.law).dump(2) + "\n");
    write_grid((dir / ("traj_" + s.id + ".grid")).string(), s.trajectory);
    index["samples"].push_back({{"id", s.id}, {"family", s.family}, {"equation", "eq_" + s.id + ".json"},
                                {"trajectory", "traj_" + s.id + ".grid"}});
    ++report.written;
  }
  write_file((dir / "manifest.json").string(), index.dump(2) + "\n");
  return report;
}

}  // namespace pdesym
