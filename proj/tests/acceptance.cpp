// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "pdesym/pdesym.hpp"

using namespace pdesym;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1 ------------------------------------------------------------------------

Outcome order_invariance() {
  auto t0 = Clock::now();
  std::size_t same = 0, total = 0;
  for (const auto& spec : families()) {
    for (std::uint64_t i = 0; i < 1000; ++i) {
      Rng rng = make_rng(1, {tag("order"), tag(spec.name), i});
      ConservationLaw law = sample_params(spec, rng);
      law.q1 = round_sig(law.q1, 3);
      law.q2 = round_sig(law.q2, 3);
      Equation eq = law_to_equation(law);
      PerturbConfig cfg;
      cfg.swap_prob = 0.5;
      cfg.seed = derive_seed(2, {tag(spec.name), i});
      Equation swapped = swap_branches(eq, cfg);
      same += to_canonical_tokens(swapped) == to_canonical_tokens(eq);
      ++total;
    }
  }
  double dt = seconds_since(t0);
  return {same == total && dt < 10.0, fmt("%zu/%zu identical canonical sequences, %.2f s (limit 10 s)", same, total, dt)};
}

// 2 ------------------------------------------------------------------------

Outcome cancellation_example() {
  auto a = to_canonical_tokens(parse_equation("x - 1 + 1 + y = 0"));
  auto b = to_canonical_tokens(parse_equation("y + x = 0"));
  return {a == b, "\"" + a.str() + "\" vs \"" + b.str() + "\""};
}

// 3 ------------------------------------------------------------------------

Outcome token_goldens() {
  Expr e = add(cos(mul(num(1.5), var("x_1"))), sub(pow(var("x_2"), 2), num(2.6)));
  std::string got = to_manual_tokens(e).str();
  bool golden = got == "+ cos × 1.5 x_1 − pow x_2 2 2.6";
  std::string kdv = to_canonical_tokens(parse_equation("u*u_x + u_t + 0.0484*u_xxx = 0")).str();
  bool sub = kdv.find("∂ ( u(x,t) , ( x , 3 ) )") != std::string::npos;
  return {golden && sub, "manual \"" + got + "\"; KdV \"" + kdv + "\""};
}

// 4 ------------------------------------------------------------------------

Outcome solver_checks() {
  auto t0 = Clock::now();
  double worst = 0.0;
  for (const auto& spec : families()) {
    if (spec.viscous()) continue;
    for (std::uint64_t s = 0; s < 5; ++s) {
      Rng rng = make_rng(4, {tag(spec.name), s});
      ConservationLaw law = sample_params(spec, rng);
      State u0 = sample_ic(spec, rng);
      Grid1D g = spec.grid();
      auto traj = solve(law, u0, g, spec.t_final, spec.nt);
      double m0 = 0;
      for (double v : u0) m0 += v * g.dx;
      for (std::size_t k = 0; k < traj.nt(); ++k) {
        double m = 0;
        for (std::size_t i = 0; i < g.nx; ++i) m += traj.frame(k)[i] * g.dx;
        worst = std::max(worst, std::abs(m - m0) / (1 + std::abs(m0)));
      }
    }
  }
  ConservationLaw burgers{FluxKind::Quadratic, 0.5, 0.05};
  auto run = [&](std::size_t nx) {
    Grid1D g = Grid1D::periodic(nx, 1.0);
    State u0(nx);
    for (std::size_t i = 0; i < nx; ++i) u0[i] = std::sin(2 * std::numbers::pi * g.x(i));
    return solve(burgers, u0, g, 0.1, 2).frame_state(1);
  };
  State ref = run(1024);
  std::vector<double> err;
  for (std::size_t nx : {128u, 256u, 512u}) {
    State u = run(nx);
    double s = 0;
    for (std::size_t i = 0; i < nx; ++i) s += std::pow(u[i] - ref[i * (1024 / nx)], 2) / nx;
    err.push_back(std::sqrt(s));
  }
  double p1 = std::log2(err[0] / err[1]), p2 = std::log2(err[1] / err[2]);
  double dt = seconds_since(t0);
  bool ok = worst <= 1e-12 && p1 >= 0.9 && p2 >= 0.9 && dt < 60;
  return {ok, fmt("max relative mass drift %.2e (limit 1e-12); orders %.3f, %.3f (need >= 0.9); %.1f s", worst, p1, p2, dt)};
}

// 5 ------------------------------------------------------------------------

// Minimizes sum_k ||u_obs(t_k) - H^k(q, u0)||^2 over 2001 points of [0.9 a0, 1.1 a0].
double grid_search(const ObservationSeq& obs, double a0, std::size_t steps) {
  std::vector<double> times(obs.times.begin(), obs.times.begin() + static_cast<std::ptrdiff_t>(steps) + 1);
  std::vector<double> cost(2001);
  parallel_for(2001, [&](std::size_t j) {
    double q = 0.9 * a0 + 0.2 * a0 * static_cast<double>(j) / 2000.0;
    auto f = solve_at({FluxKind::Quadratic, q, 0.0}, obs.frames[0], obs.grid, times);
    double s = 0;
    for (std::size_t k = 1; k <= steps; ++k)
      for (std::size_t i = 0; i < obs.grid.nx; ++i) s += std::pow(f.frame(k)[i] - obs.frames[k][i], 2);
    cost[j] = s;
  });
  std::size_t best = static_cast<std::size_t>(std::min_element(cost.begin(), cost.end()) - cost.begin());
  return 0.9 * a0 + 0.2 * a0 * static_cast<double>(best) / 2000.0;
}

Outcome filter_recovery() {
  auto t0 = Clock::now();
  const FamilySpec& spec = family("inviscid_burgers");
  const double q = 0.5;
  int within = 0, agree = 0;
  double worst_err = 0, worst_gap = 0;
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    Rng rng = make_rng(5, {tag("recovery"), trial});
    State u0 = sample_ic(spec, rng);
    auto traj = solve({FluxKind::Quadratic, q, 0.0}, u0, spec.grid(), spec.t_final, spec.nt);
    FilterConfig cfg;  // M = 500, 10 steps, variance 1e-5, eps = 0.05 ||u0||, Unif(0.9 a0, 1.1 a0)
    cfg.seed = derive_seed(5, {tag("filter"), trial});
    auto obs = ObservationSeq::from_field(traj, cfg.steps + 1);
    double est = refine({1.05 * q}, obs, {FluxKind::Quadratic, false}, cfg).coefficients[0];
    double oracle = grid_search(obs, 1.05 * q, cfg.steps);
    double err = std::abs(est - q) / q, gap = std::abs(est - oracle) / q;
    within += err < 0.02;
    agree += gap <= 0.01;
    worst_err = std::max(worst_err, err);
    worst_gap = std::max(worst_gap, gap);
  }
  double dt = seconds_since(t0);
  bool ok = within >= 45 && agree == 50 && dt < 300;
  return {ok, fmt("%d/50 trials under 2%% error (need 45), worst %.3f%%; %d/50 within 1%% of grid-search oracle, "
                  "worst gap %.3f%%; %.1f s",
                  within, 100 * worst_err, agree, 100 * worst_gap, dt)};
}

// 6 ------------------------------------------------------------------------

Outcome table_direction() {
  auto t0 = Clock::now();
  StudyConfig cfg;
  cfg.trials = 20;
  cfg.coeff_error = 0.03;
  cfg.seed = 6;
  StudyReport rep = run_study(cfg);
  bool ok = true;
  std::ostringstream os;
  for (const auto& f : rep.families) {
    bool row = f.symbolic_with < f.symbolic_without && f.series_with < f.series_without;
    ok = ok && row;
    os << fmt("\n      %-17s symbolic %.2f%% -> %.2f%%, time-series %.2f%% -> %.2f%% %s", f.family.c_str(),
              100 * f.symbolic_without, 100 * f.symbolic_with, 100 * f.series_without, 100 * f.series_with,
              row ? "" : "(wrong direction)");
  }
  double dt = seconds_since(t0);
  ok = ok && dt < 1800;
  return {ok, fmt("%zu families, %zu trials each, %.1f s", rep.families.size(), cfg.trials, dt) + os.str()};
}

// 7 ------------------------------------------------------------------------

Outcome metric_identities() {
  std::vector<std::vector<double>> u = {{0.3, -1.2, 2.5, 0.7}, {1.0, 4.0, -2.0}};
  std::vector<std::vector<double>> means;
  for (const auto& s : u) {
    double m = 0;
    for (double v : s) m += v;
    means.emplace_back(s.size(), m / static_cast<double>(s.size()));
  }
  double r2_perfect = r2_score(u, u), r2_mean = r2_score(u, means);

  Equation truth = parse_equation("u_t + 0.5*(u^2)_x = 0.05*u_xx");
  double self = symbolic_error(truth, truth);

  const char* srcs[] = {"u_t + 0.5*(u^2)_x = 0.05*u_xx", "u_t + 0.33*(u^3)_x = 0", "u_t + 0.955*cos(u)*u_x = 0",
                        "u_t + u*u_x + 0.0484*u_xxx = 0", "u_t + 1*(sin(u))_x = 0.05*u_xx", "u_t + 0.45*(u^2)_x = 0",
                        "u_t + 0.3*(u^3)_x = 0.05*u_xx", "u_t + 1.1*(sin(u))_x = 0", "u_t + 0.55*(u^2)_x = 0",
                        "u_t + 0.36*(u^3)_x = 0"};
  std::vector<Equation> truths;
  std::vector<TokenSeq> gen;
  for (const char* s : srcs) {
    truths.push_back(parse_equation(s));
    gen.push_back(to_canonical_tokens(truths.back()));
  }
  gen[2].tokens.resize(4);                                                    // undecodable
  gen[5].tokens.push_back("u(x,t)");                                          // undecodable
  gen[8] = to_canonical_tokens(Equation{mul(num(2.3), truths[8].residual)});  // 130% error
  gen[9] = to_canonical_tokens(parse_equation("u_t + 0.37*(u^3)_x = 0"));    // small error
  double vf = valid_fraction(gen, truths);
  bool ok = r2_perfect == 1.0 && r2_mean == 0.0 && self == 0.0 && vf == 0.7;
  return {ok, fmt("r2(perfect) = %.17g, r2(sample mean) = %.17g, symbolic_error(e,e) = %g, valid_fraction = %.17g",
                  r2_perfect, r2_mean, self, vf)};
}

// 8 ------------------------------------------------------------------------

Outcome resampling_stats() {
  const std::size_t m = 10000;
  ParticleEnsemble e;
  e.dim = 1;
  e.coords = {0.0, 1.0};
  e.weights = {0.75, 0.25};
  // two distinct particles expanded to M slots, weights carried on the first two
  e.coords.resize(m, 1.0);
  e.weights.resize(m, 0.0);
  Rng rng = make_rng(8, {tag("multiplicity")});
  resample(e, rng);
  auto first = std::count(e.coords.begin(), e.coords.end(), 0.0);

  // normalization after every reweight of a real refinement
  const FamilySpec& spec = family("burgers");
  Rng r2 = make_rng(8, {tag("norm")});
  ConservationLaw law = sample_params(spec, r2);
  State u0 = sample_ic(spec, r2);
  auto traj = solve(law, u0, spec.grid(), spec.t_final, spec.nt);
  FilterConfig cfg;
  cfg.particles = 200;
  cfg.seed = 8;
  LawTemplate tmpl{FluxKind::Quadratic, true};
  auto ens = init_ensemble({law.q1 * 1.05, law.q2 * 0.95}, cfg);
  double eps = cfg.obs_scale * l2_norm(u0, traj.grid.dx);
  double worst = 0;
  for (std::size_t k = 1; k <= cfg.steps; ++k) {
    propagate(ens, cfg, k);
    reweight(ens, traj.frame_state(k - 1), traj.frame_state(k), traj.grid, tmpl, cfg, traj.times[k] - traj.times[k - 1],
             eps);
    double s = 0;
    for (double w : ens.weights) s += w;
    worst = std::max(worst, std::abs(s - 1.0));
    Rng rr = make_rng(cfg.seed, {tag("resample"), k});
    resample(ens, rr);
  }
  bool ok = first >= 7350 && first <= 7650 && worst <= 1e-12;
  return {ok, fmt("first-particle multiplicity %ld (need [7350, 7650]); max |sum p - 1| = %.2e", static_cast<long>(first),
                  worst)};
}

// 9 ------------------------------------------------------------------------

std::string slurp_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::string all;
  for (const auto& f : files) all += f.filename().string() + "\n" + read_file(f.string());
  return all;
}

int run(const std::string& cmd) { return std::system(cmd.c_str()); }

Outcome determinism() {
  auto t0 = Clock::now();
  fs::path work = fs::temp_directory_path() / "pdesym_acceptance_det";
  fs::remove_all(work);
  fs::create_directories(work);
  std::string cli = PDESYM_CLI_PATH;
  std::vector<std::string> issues;
  std::array<std::string, 3> gen_out, refine_out, study_out;
  const char* threads[] = {"1", "4", "1"};
  for (int r = 0; r < 3; ++r) {
    std::string env = std::string("PDESYM_THREADS=") + threads[r] + " ";
    fs::path d = work / ("gen" + std::to_string(r));
    fs::path rf = work / ("refine" + std::to_string(r) + ".json");
    fs::path sf = work / ("study" + std::to_string(r) + ".json");
    int rc = run(env + cli + " gen --seed 9 --params 2 --ics 2 -o " + d.string() + " > /dev/null");
    rc |= run(env + cli + " refine --seed 9 --eq \"u_t + 0.52*(u^2)_x = 0.048*u_xx\" --traj " +
              (work / "gen0" / "traj_burgers_p000_i000.grid").string() + " --particles 100 -o " + rf.string());
    rc |= run(env + cli + " study --seed 9 --families inviscid_burgers burgers --trials 2 --particles 100 --quiet -o " +
              sf.string());
    if (rc != 0) issues.push_back("a command failed");
    gen_out[r] = slurp_dir(d);
    refine_out[r] = read_file(rf.string());
    study_out[r] = read_file(sf.string());
  }
  bool gen_same = gen_out[0] == gen_out[1] && gen_out[1] == gen_out[2];
  bool refine_same = refine_out[0] == refine_out[1] && refine_out[1] == refine_out[2];
  bool study_same = study_out[0] == study_out[1] && study_out[1] == study_out[2];
  fs::remove_all(work);
  bool ok = issues.empty() && gen_same && refine_same && study_same;
  return {ok, fmt("gen %s, refine %s, study %s across runs with 1/4/1 threads; %.1f s", gen_same ? "identical" : "DIFFERENT",
                  refine_same ? "identical" : "DIFFERENT", study_same ? "identical" : "DIFFERENT", seconds_since(t0))};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> all = {
      {1, "canonical order invariance under branch swapping", order_invariance},
      {2, "x - 1 + 1 + y and y + x share one canonical sequence", cancellation_example},
      {3, "token golden sequences", token_goldens},
      {4, "solver conservation and self-convergence", solver_checks},
      {5, "filter recovery on inviscid Burgers", filter_recovery},
      {6, "filtering lowers symbolic and time-series error for every family", table_direction},
      {7, "metric identities", metric_identities},
      {8, "resampling statistics and weight normalization", resampling_stats},
      {9, "byte-identical reruns under varying parallelism", determinism},
  };
  int failed = 0;
  for (const auto& c : all) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] criterion %d: %s\n      %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
  return failed ? 1 : 0;
}
