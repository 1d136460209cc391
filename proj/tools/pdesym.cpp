// pdesym: command-line front end for parsing, canonicalizing, perturbing,
// solving, generating, refining and evaluating PDE equations.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "pdesym/pdesym.hpp"

using namespace pdesym;
using nlohmann::json;

namespace {

struct Globals {
  std::uint64_t seed = 0;
  std::string output;
  std::string format = "json";
  unsigned threads = 0;
};

struct EquationInput {
  std::string eq, eq_json, tokens;
  std::string dialect = "canonical";
  bool implicit_mul = false;
};

void add_equation_options(CLI::App* cmd, EquationInput& in, const std::string& what) {
  auto* g = cmd->add_option_group("equation", what);
  g->add_option("--eq", in.eq, "Equation in infix form, e.g. \"u_t + 0.5*(u^2)_x = 0\"");
  g->add_option("--eq-json", in.eq_json, "Equation JSON file as written by `gen`");
  g->add_option("--tokens", in.tokens, "Whitespace-separated token sequence");
  g->require_option(1);
  cmd->add_option("--dialect", in.dialect, "Token dialect for --tokens")
      ->check(CLI::IsMember({"manual", "canonical"}));
  cmd->add_flag("--implicit-mul", in.implicit_mul, "Treat juxtaposition as multiplication in --eq");
}

Dialect dialect_of(const std::string& s) { return s == "manual" ? Dialect::ManualOrder : Dialect::Canonical; }

Equation read_equation(const EquationInput& in) {
  if (!in.eq.empty()) return parse_equation(in.implicit_mul ? insert_implicit_mul(in.eq) : in.eq);
  if (!in.tokens.empty()) return from_tokens(tokenize(in.tokens, dialect_of(in.dialect)));
  json j;
  try {
    j = json::parse(read_file(in.eq_json));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Io, in.eq_json + ": " + e.what());
  }
  return law_to_equation(law_from_json(j));
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string num_text(double v) { return format_exact(v); }

// Writes to --output or stdout.
void emit(const Globals& g, const std::string& text) {
  if (g.output.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    write_file(g.output, text);
  }
}

std::string rows_to_csv(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << csv_escape(header[i]);
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << csv_escape(r[i]);
    os << "\n";
  }
  return os.str();
}

json tokens_or_null(const Equation& eq, Dialect d) {
  try {
    return to_tokens(eq, d).tokens;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::UnsupportedNode) throw;
    return nullptr;
  }
}

void emit_object(const Globals& g, const json& j) {
  if (g.format == "csv") {
    std::vector<std::string> header, row;
    for (const auto& [k, v] : j.items()) {
      header.push_back(k);
      if (v.is_string()) row.push_back(v.get<std::string>());
      else if (v.is_array() && !v.empty() && v[0].is_string()) {
        std::string s;
        for (const auto& t : v) s += (s.empty() ? "" : " ") + t.get<std::string>();
        row.push_back(s);
      } else row.push_back(v.dump());
    }
    emit(g, rows_to_csv(header, {row}));
  } else {
    emit(g, j.dump(2) + "\n");
  }
}

// ---------------------------------------------------------------------------

int cmd_parse(const Globals& g, const EquationInput& in) {
  Equation eq = read_equation(in);
  json j;
  j["infix"] = to_infix(eq);
  j["canonical"] = to_infix(canonicalize(eq));
  j["manual_tokens"] = tokens_or_null(eq, Dialect::ManualOrder);
  j["canonical_tokens"] = to_canonical_tokens(eq).tokens;
  emit_object(g, j);
  return 0;
}

int cmd_canon(const Globals& g, const std::string& expr, const EquationInput& in) {
  Equation eq = expr.empty() ? read_equation(in) : Equation{parse_expr(in.implicit_mul ? insert_implicit_mul(expr) : expr)};
  Equation c = canonicalize(eq);
  json j;
  j["canonical"] = expr.empty() ? to_infix(c) : to_infix(c.residual);
  j["tokens"] = to_canonical_tokens(c).tokens;
  emit_object(g, j);
  return 0;
}

int cmd_tokens(const Globals& g, const EquationInput& in, const std::string& decode) {
  Dialect d = dialect_of(in.dialect);
  json j;
  j["dialect"] = in.dialect;
  if (!decode.empty()) {
    Equation eq = from_tokens(tokenize(decode, d));
    j["infix"] = to_infix(eq);
    j["tokens"] = to_tokens(eq, d).tokens;
  } else {
    Equation eq = read_equation(in);
    j["infix"] = to_infix(eq);
    j["tokens"] = to_tokens(eq, d).tokens;
  }
  emit_object(g, j);
  return 0;
}

struct PerturbOptions {
  double swap_prob = 0.5;
  double noise_prob = 0.5;
  std::string mask = "none";
  std::string out_dialect = "manual";
};

int cmd_perturb(const Globals& g, const EquationInput& in, const PerturbOptions& po) {
  Equation eq = read_equation(in);
  PerturbConfig cfg;
  cfg.swap_prob = po.swap_prob;
  cfg.noise_prob = po.noise_prob;
  cfg.seed = g.seed;
  Dialect d = dialect_of(po.out_dialect);
  // noise is injected first, so the erroneous term takes part in swapping
  NoisyEquation noisy = inject_noise_term(eq, cfg);
  Equation out = swap_branches(noisy.equation, cfg);
  if (po.mask == "explicit") out = mask_coefficients(out, MaskMode::ExplicitConstants);
  if (po.mask == "all-terms") out = mask_coefficients(out, MaskMode::AllTerms);
  json j;
  j["input_tokens"] = to_tokens(eq, d).tokens;
  j["output_tokens"] = to_tokens(out, d).tokens;
  j["output_infix"] = to_infix(out);
  j["injected_term"] = noisy.injected ? json(to_infix(*noisy.injected)) : json(nullptr);
  emit_object(g, j);
  return 0;
}

struct LawOptions {
  std::string family;
  std::optional<double> q1, q2;
  std::size_t nx = 128, nt = 32;
  double t_final = 1.0;
  std::string ic_grid;
};

int cmd_solve(const Globals& g, const LawOptions& lo, const EquationInput& in, bool have_eq) {
  if (g.output.empty()) throw CLI::ValidationError("solve", "--output FILE is required");
  ConservationLaw law;
  FamilySpec spec = lo.family.empty() ? family("burgers") : family(lo.family);
  if (have_eq) law = law_from_equation(read_equation(in));
  else if (!lo.family.empty()) law = spec.law();
  else throw CLI::ValidationError("solve", "give --family or an equation");
  if (lo.q1) law.q1 = *lo.q1;
  if (lo.q2) law.q2 = *lo.q2;
  spec.nx = lo.nx;
  Grid1D grid = spec.grid();
  State u0;
  if (!lo.ic_grid.empty()) {
    SpaceTimeField f = read_grid(lo.ic_grid);
    grid = f.grid;
    u0 = f.frame_state(0);
  } else {
    Rng rng = make_rng(g.seed, {tag("solve-ic")});
    u0 = sample_ic(spec, rng);
  }
  SpaceTimeField traj = solve(law, u0, grid, lo.t_final, lo.nt);
  write_grid(g.output, traj);
  double m0 = 0, m1 = 0;
  for (std::size_t i = 0; i < grid.nx; ++i) {
    m0 += traj.frame(0)[i] * grid.dx;
    m1 += traj.frame(traj.nt() - 1)[i] * grid.dx;
  }
  json j;
  j["equation"] = to_infix(law_to_equation(law));
  j["nt"] = traj.nt();
  j["nx"] = grid.nx;
  j["mass_initial"] = m0;
  j["mass_final"] = m1;
  j["file"] = g.output;
  std::string text = g.format == "csv" ? rows_to_csv({"equation", "nt", "nx", "mass_initial", "mass_final", "file"},
                                                     {{to_infix(law_to_equation(law)), std::to_string(traj.nt()),
                                                       std::to_string(grid.nx), num_text(m0), num_text(m1), g.output}})
                                       : j.dump(2) + "\n";
  std::cout << text;
  return 0;
}

struct GenOptions {
  std::vector<std::string> families;
  std::size_t params = 4, ics = 2;
  std::string split = "test";
};

int cmd_gen(const Globals& g, const GenOptions& go) {
  if (g.output.empty()) throw CLI::ValidationError("gen", "--output DIR is required");
  DatasetManifest m;
  if (!go.families.empty()) {
    m.families.clear();
    for (const auto& f : go.families) m.families.push_back(family(f));
  }
  m.params_per_family = go.params;
  m.ics_per_param = go.ics;
  m.seed = g.seed;
  m.split = go.split == "train" ? Split::Train : Split::Test;
  GenerateReport rep = generate(m, g.output, g.threads);
  for (const auto& s : rep.skipped)
    std::cerr << json{{"warning", "skipped"}, {"sample", s}, {"reason", "solver failure"}}.dump() << "\n";
  json j{{"directory", g.output}, {"written", rep.written}, {"skipped", rep.skipped}};
  std::cout << (g.format == "csv" ? rows_to_csv({"directory", "written", "skipped"},
                                                {{g.output, std::to_string(rep.written), std::to_string(rep.skipped.size())}})
                                  : j.dump(2) + "\n");
  return 0;
}

struct FilterOptions {
  std::size_t particles = 500, steps = 10;
  double process_var = 1e-5, obs_scale = 0.05, halfwidth = 0.1;
  std::string likelihood = "per-point";
};

FilterConfig filter_config(const Globals& g, const FilterOptions& fo) {
  FilterConfig c;
  c.particles = fo.particles;
  c.steps = fo.steps;
  c.process_var = fo.process_var;
  c.obs_scale = fo.obs_scale;
  c.init_rel_halfwidth = fo.halfwidth;
  c.likelihood = fo.likelihood == "field-norm" ? Likelihood::FieldNorm : Likelihood::PerPoint;
  c.seed = g.seed;
  c.threads = g.threads;
  return c;
}

void add_filter_options(CLI::App* cmd, FilterOptions& fo) {
  cmd->add_option("--particles", fo.particles, "Number of particles M")->capture_default_str();
  cmd->add_option("--steps", fo.steps, "Refinement steps (frames 0..steps are used)")->capture_default_str();
  cmd->add_option("--process-var", fo.process_var, "Random-walk variance per step")->capture_default_str();
  cmd->add_option("--obs-scale", fo.obs_scale, "Observation noise scale relative to ||u0||_2")->capture_default_str();
  cmd->add_option("--init-halfwidth", fo.halfwidth, "Relative half-width of the initial uniform cloud")
      ->capture_default_str();
  cmd->add_option("--likelihood", fo.likelihood, "Observation likelihood")
      ->check(CLI::IsMember({"per-point", "field-norm"}))
      ->capture_default_str();
}

json coeff_json(const LawTemplate& t, const std::vector<double>& a) {
  json j{{"q1", a[0]}};
  if (t.viscous) j["q2"] = a[1];
  return j;
}

int cmd_refine(const Globals& g, const EquationInput& in, const std::string& traj_path, const FilterOptions& fo,
               bool timing) {
  ConservationLaw law0 = law_from_equation(read_equation(in));
  LawTemplate tmpl = LawTemplate::of(law0);
  SpaceTimeField traj = read_grid(traj_path);
  FilterConfig cfg = filter_config(g, fo);
  auto start = std::chrono::steady_clock::now();
  RefineResult r = refine(tmpl.coefficients(law0), ObservationSeq::from_field(traj, cfg.steps + 1), tmpl, cfg);
  double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (g.format == "csv") {
    std::vector<std::string> header = {"step", "ess", "mean_q1", "spread_q1"};
    if (tmpl.viscous) header.insert(header.end(), {"mean_q2", "spread_q2"});
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < r.steps.size(); ++k) {
      const auto& d = r.steps[k];
      std::vector<std::string> row = {std::to_string(k + 1), num_text(d.ess), num_text(d.mean[0]), num_text(d.spread[0])};
      if (tmpl.viscous) row.insert(row.end(), {num_text(d.mean[1]), num_text(d.spread[1])});
      rows.push_back(row);
    }
    emit(g, rows_to_csv(header, rows));
  } else {
    json j;
    j["initial"] = coeff_json(tmpl, tmpl.coefficients(law0));
    j["refined"] = coeff_json(tmpl, r.coefficients);
    j["refined_equation"] = to_infix(law_to_equation(tmpl.law(r.coefficients)));
    j["ess"] = json::array();
    j["spread"] = json::array();
    for (const auto& d : r.steps) {
      j["ess"].push_back(d.ess);
      j["spread"].push_back(d.spread);
    }
    if (timing) j["elapsed_seconds"] = elapsed;
    emit(g, j.dump(2) + "\n");
  }
  return 0;
}

// Batch entries: {"learned": infix | "learned_tokens": str [+ "dialect"], "truth": infix | "truth_json": path,
// "trajectory": path (optional)}
int cmd_eval(const Globals& g, const std::string& batch_path, const EquationInput& learned_in,
             const std::string& truth_json, const std::string& traj_path) {
  json batch = json::array();
  if (!batch_path.empty()) {
    try {
      batch = json::parse(read_file(batch_path));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Io, batch_path + ": " + e.what());
    }
    if (!batch.is_array()) throw Error(ErrorKind::Io, batch_path + ": expected a JSON array");
  } else {
    json e;
    if (!learned_in.eq.empty()) e["learned"] = learned_in.eq;
    if (!learned_in.tokens.empty()) e["learned_tokens"] = learned_in.tokens;
    if (!learned_in.eq_json.empty()) e["learned_json"] = learned_in.eq_json;
    e["dialect"] = learned_in.dialect;
    e["truth_json"] = truth_json;
    if (!traj_path.empty()) e["trajectory"] = traj_path;
    batch.push_back(e);
  }
  std::filesystem::path base = batch_path.empty() ? std::filesystem::path() : std::filesystem::path(batch_path).parent_path();
  auto resolve = [&](const std::string& p) { return (base / p).string(); };

  std::vector<TokenSeq> generated;
  std::vector<Equation> truths;
  std::vector<std::vector<double>> targets, preds;
  double sym_sum = 0, ts_sum = 0, l2_sum = 0;
  std::size_t sym_n = 0, ts_n = 0;
  json rows = json::array();
  for (const auto& e : batch) {
    Equation truth = e.contains("truth") ? parse_equation(e["truth"].get<std::string>())
                                         : law_to_equation(law_from_json(json::parse(read_file(resolve(e.at("truth_json"))))));
    Dialect d = dialect_of(e.value("dialect", std::string("canonical")));
    TokenSeq ts{d, {}};
    if (e.contains("learned_tokens")) ts = tokenize(e["learned_tokens"].get<std::string>(), d);
    else if (e.contains("learned")) ts = to_tokens(parse_equation(e["learned"].get<std::string>()), d);
    else ts = to_tokens(law_to_equation(law_from_json(json::parse(read_file(resolve(e.at("learned_json")))))), d);
    generated.push_back(ts);
    truths.push_back(truth);
    json row;
    row["symbolic_error"] = nullptr;
    row["time_series_error"] = nullptr;
    try {
      Equation learned = from_tokens(ts);
      SymbolicErrorOptions so;
      so.seed = g.seed;
      double se = symbolic_error(learned, truth, so);
      row["symbolic_error"] = se;
      sym_sum += se;
      ++sym_n;
      if (e.contains("trajectory")) {
        SpaceTimeField traj = read_grid(resolve(e["trajectory"]));
        SpaceTimeField pred = solve_at(law_from_equation(learned), traj.frame_state(0), traj.grid, traj.times);
        double tse = rel_l2(traj.values, pred.values);
        row["time_series_error"] = tse;
        ts_sum += tse;
        l2_sum += tse;
        ++ts_n;
        targets.push_back(traj.values);
        preds.push_back(pred.values);
      }
    } catch (const Error& err) {
      row["error"] = std::string(to_string(err.kind()));
    }
    rows.push_back(row);
  }
  SymbolicErrorOptions so;
  so.seed = g.seed;
  json j;
  j["count"] = batch.size();
  j["valid_fraction"] = valid_fraction(generated, truths, so);
  j["symbolic_error"] = sym_n ? json(sym_sum / sym_n) : json(nullptr);
  j["time_series_error"] = ts_n ? json(ts_sum / ts_n) : json(nullptr);
  j["rel_l2"] = ts_n ? json(l2_sum / ts_n) : json(nullptr);
  j["r2"] = targets.empty() ? json(nullptr) : json(r2_score(targets, preds));
  j["entries"] = rows;
  if (g.format == "csv") {
    auto cell = [](const json& v) { return v.is_null() ? std::string() : num_text(v.get<double>()); };
    emit(g, rows_to_csv({"count", "valid_fraction", "symbolic_error", "time_series_error", "rel_l2", "r2"},
                        {{std::to_string(batch.size()), cell(j["valid_fraction"]), cell(j["symbolic_error"]),
                          cell(j["time_series_error"]), cell(j["rel_l2"]), cell(j["r2"])}}));
  } else {
    emit(g, j.dump(2) + "\n");
  }
  return 0;
}

std::string family_expression(const std::string& name) {
  const FamilySpec& f = family(name);
  std::string fu = f.flux == FluxKind::Sine ? "(sin(u))_x" : f.flux == FluxKind::Cubic ? "(u^3)_x" : "(u^2)_x";
  return f.viscous() ? "u_t + q1*" + fu + " = q2*u_xx" : "u_t + q*" + fu + " = 0";
}

int cmd_study(const Globals& g, const std::vector<std::string>& fams, std::size_t trials, double coeff_error,
              const FilterOptions& fo, bool quiet) {
  StudyConfig cfg;
  if (!fams.empty()) cfg.families = fams;
  for (const auto& f : cfg.families) family(f);  // validate names early
  cfg.trials = trials;
  cfg.coeff_error = coeff_error;
  cfg.seed = g.seed;
  cfg.filter = filter_config(g, fo);
  cfg.symbolic.seed = g.seed;
  StudyReport rep = run_study(cfg, [&](const TrialResult& r) {
    if (!quiet) std::cerr << "study: " << r.family << " trial " << r.trial + 1 << "/" << trials << "\n";
  });
  if (g.format == "csv") {
    std::vector<std::vector<std::string>> rows;
    for (const auto& f : rep.families)
      rows.push_back({f.family, family_expression(f.family), num_text(f.symbolic_without), num_text(f.symbolic_with),
                      num_text(f.series_without), num_text(f.series_with)});
    emit(g, rows_to_csv({"family", "expression", "symbolic_error_without_filtering", "symbolic_error_with_filtering",
                         "time_series_error_without_filtering", "time_series_error_with_filtering"},
                        rows));
    return 0;
  }
  json j;
  j["config"] = {{"trials", trials},       {"coeff_error", coeff_error},        {"seed", g.seed},
                 {"particles", fo.particles}, {"steps", fo.steps},             {"process_var", fo.process_var},
                 {"obs_scale", fo.obs_scale}, {"init_halfwidth", fo.halfwidth}, {"likelihood", fo.likelihood}};
  j["families"] = json::array();
  for (const auto& f : rep.families)
    j["families"].push_back({{"family", f.family},
                             {"expression", family_expression(f.family)},
                             {"symbolic_error", {{"without_filtering", f.symbolic_without}, {"with_filtering", f.symbolic_with}}},
                             {"time_series_error", {{"without_filtering", f.series_without}, {"with_filtering", f.series_with}}}});
  j["trials"] = json::array();
  for (const auto& t : rep.trials)
    j["trials"].push_back({{"family", t.family},
                           {"trial", t.trial},
                           {"truth", t.truth},
                           {"initial", t.initial},
                           {"refined", t.refined},
                           {"symbolic_error", {{"without_filtering", t.symbolic_without}, {"with_filtering", t.symbolic_with}}},
                           {"time_series_error", {{"without_filtering", t.series_without}, {"with_filtering", t.series_with}}}});
  emit(g, j.dump(2) + "\n");
  return 0;
}

int exit_code(ErrorKind k) { return is_numeric(k) ? 3 : 2; }

void report_error(const std::string& kind, const std::string& message, std::optional<std::size_t> offset = {}) {
  json j{{"error", kind}, {"message", message}};
  if (offset) j["offset"] = *offset;
  std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Canonical symbolic encodings, solvers and particle-filter refinement for 1-D conservation laws"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Root random seed")->capture_default_str();
  app.add_option("--output,-o", g.output, "Output file (directory for gen); stdout when omitted");
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (default: PDESYM_THREADS or hardware concurrency)");

  EquationInput parse_in, canon_in, tok_in, pert_in, solve_in, refine_in, eval_in;

  auto* parse = app.add_subcommand("parse", "Parse an equation and show its forms and token sequences");
  add_equation_options(parse, parse_in, "Equation to parse");

  auto* canon = app.add_subcommand("canon", "Canonicalize an expression or equation");
  std::string canon_expr;
  canon->add_option("--expr", canon_expr, "Expression in infix form");
  canon->add_option("--eq", canon_in.eq, "Equation in infix form");
  canon->add_option("--tokens", canon_in.tokens, "Token sequence");
  canon->add_option("--dialect", canon_in.dialect, "Dialect of --tokens")->check(CLI::IsMember({"manual", "canonical"}));
  canon->add_flag("--implicit-mul", canon_in.implicit_mul, "Treat juxtaposition as multiplication");

  auto* tokens = app.add_subcommand("tokens", "Encode an equation as tokens, or decode a token sequence");
  std::string decode;
  tokens->add_option("--eq", tok_in.eq, "Equation in infix form");
  tokens->add_option("--eq-json", tok_in.eq_json, "Equation JSON file");
  tokens->add_option("--decode", decode, "Token sequence to decode");
  tokens->add_option("--dialect", tok_in.dialect, "manual or canonical")
      ->check(CLI::IsMember({"manual", "canonical"}))
      ->capture_default_str();
  tokens->add_flag("--implicit-mul", tok_in.implicit_mul, "Treat juxtaposition as multiplication");

  auto* perturb = app.add_subcommand("perturb", "Swap branches, inject an erroneous term, mask coefficients");
  PerturbOptions po;
  add_equation_options(perturb, pert_in, "Equation to perturb");
  perturb->add_option("--swap-prob", po.swap_prob, "Per-node swap probability")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  perturb->add_option("--noise-prob", po.noise_prob, "Probability of adding an erroneous term")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  perturb->add_option("--mask", po.mask, "Coefficient masking")
      ->check(CLI::IsMember({"none", "explicit", "all-terms"}))
      ->capture_default_str();
  perturb->add_option("--out-dialect", po.out_dialect, "Dialect of the emitted tokens")
      ->check(CLI::IsMember({"manual", "canonical"}))
      ->capture_default_str();

  auto* solvecmd = app.add_subcommand("solve", "Solve a conservation law and write a PDEGRID1 file");
  LawOptions lo;
  solvecmd->add_option("--family", lo.family, "Family name (burgers, inviscid_burgers, cl_cubic, icl_cubic, cl_sine, icl_sine)");
  solvecmd->add_option("--eq", solve_in.eq, "Equation in infix form (overrides --family flux)");
  solvecmd->add_option("--q1", lo.q1, "Flux coefficient");
  solvecmd->add_option("--q2", lo.q2, "Viscosity");
  solvecmd->add_option("--nx", lo.nx, "Grid cells")->capture_default_str();
  solvecmd->add_option("--nt", lo.nt, "Output frames")->capture_default_str();
  solvecmd->add_option("--t-final", lo.t_final, "Final time")->capture_default_str();
  solvecmd->add_option("--ic-grid", lo.ic_grid, "Take grid and initial state from frame 0 of this PDEGRID1 file");

  auto* gen = app.add_subcommand("gen", "Generate a dataset directory");
  GenOptions go;
  gen->add_option("--families", go.families, "Families to include (default: all six)");
  gen->add_option("--params", go.params, "Parameter draws per family")->capture_default_str();
  gen->add_option("--ics", go.ics, "Initial conditions per parameter draw")->capture_default_str();
  gen->add_option("--split", go.split, "train or test")->check(CLI::IsMember({"train", "test"}))->capture_default_str();

  auto* refinecmd = app.add_subcommand("refine", "Refine equation coefficients against a trajectory");
  FilterOptions fo;
  std::string traj;
  bool timing = false;
  add_equation_options(refinecmd, refine_in, "Estimated equation (initial coefficients)");
  refinecmd->add_option("--traj", traj, "Observed trajectory (PDEGRID1)")->required();
  add_filter_options(refinecmd, fo);
  refinecmd->add_flag("--timing", timing, "Include wall-clock time in the report");

  auto* evalcmd = app.add_subcommand("eval", "Evaluate learned equations against ground truth");
  std::string batch, truth_json, eval_traj;
  evalcmd->add_option("--batch", batch, "JSON array of {learned|learned_tokens|learned_json, truth|truth_json, trajectory}");
  evalcmd->add_option("--learned", eval_in.eq, "Learned equation in infix form");
  evalcmd->add_option("--learned-tokens", eval_in.tokens, "Learned token sequence");
  evalcmd->add_option("--dialect", eval_in.dialect, "Dialect of --learned-tokens")
      ->check(CLI::IsMember({"manual", "canonical"}));
  evalcmd->add_option("--truth-json", truth_json, "Ground-truth equation JSON");
  evalcmd->add_option("--traj", eval_traj, "Ground-truth trajectory (PDEGRID1)");

  auto* study = app.add_subcommand("study", "Symbolic and time-series errors with and without filtering");
  std::vector<std::string> study_fams;
  std::size_t trials = 20;
  double coeff_error = 0.03;
  bool quiet = false;
  FilterOptions sfo;
  study->add_option("--families", study_fams, "Families (default: burgers inviscid_burgers cl_cubic icl_cubic icl_sine)");
  study->add_option("--trials", trials, "Trials per family")->capture_default_str();
  study->add_option("--coeff-error", coeff_error, "Relative error applied to the true coefficients")->capture_default_str();
  study->add_flag("--quiet", quiet, "No progress on stderr");
  add_filter_options(study, sfo);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("UsageError", e.what());
    return 1;
  }

  try {
    if (*parse) return cmd_parse(g, parse_in);
    if (*canon) {
      int given = !canon_expr.empty() + !canon_in.eq.empty() + !canon_in.tokens.empty();
      if (given != 1) throw CLI::ValidationError("canon", "give exactly one of --expr, --eq, --tokens");
      return cmd_canon(g, canon_expr, canon_in);
    }
    if (*tokens) {
      int given = !decode.empty() + !tok_in.eq.empty() + !tok_in.eq_json.empty();
      if (given != 1) throw CLI::ValidationError("tokens", "give exactly one of --eq, --eq-json, --decode");
      return cmd_tokens(g, tok_in, decode);
    }
    if (*perturb) return cmd_perturb(g, pert_in, po);
    if (*solvecmd) return cmd_solve(g, lo, solve_in, !solve_in.eq.empty());
    if (*gen) return cmd_gen(g, go);
    if (*refinecmd) return cmd_refine(g, refine_in, traj, fo, timing);
    if (*evalcmd) {
      bool single = !eval_in.eq.empty() || !eval_in.tokens.empty();
      if (batch.empty() == !single || (single && truth_json.empty()))
        throw CLI::ValidationError("eval", "give --batch, or --learned/--learned-tokens with --truth-json");
      return cmd_eval(g, batch, eval_in, truth_json, eval_traj);
    }
    if (*study) return cmd_study(g, study_fams, trials, coeff_error, sfo, quiet);
  } catch (const CLI::Error& e) {
    report_error("UsageError", e.what());
    return 1;
  } catch (const Error& e) {
    report_error(std::string(to_string(e.kind())), e.what(), e.offset());
    return exit_code(e.kind());
  } catch (const json::exception& e) {
    report_error("IOError", e.what());
    return 2;
  } catch (const std::exception& e) {
    report_error("InternalError", e.what());
    return 2;
  }
  return 1;
}
