#include <gtest/gtest.h>

#include <filesystem>
#include <numbers>

#include "pdesym/datagen.hpp"

using namespace pdesym;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("pdesym_test_" + name);
  fs::remove_all(p);
  return p;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = read_file(e.path().string());
  return out;
}

}  // namespace

TEST(Params, JitterRange) {
  Rng rng(5);
  double sum = 0;
  for (int i = 0; i < 10000; ++i) {
    auto law = sample_params(family("cl_sine"), rng);
    EXPECT_GE(law.q1, 0.9);
    EXPECT_LE(law.q1, 1.1);
    EXPECT_GE(law.q2, 0.045);
    EXPECT_LE(law.q2, 0.055);
    sum += law.q1;
  }
  EXPECT_NEAR(sum / 10000, 1.0, 0.003);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_params(family("icl_cubic"), rng).q2, 0.0);
}

TEST(InitialConditions, ScaledAndPeriodic) {
  Grid1D g = family("burgers").grid();
  auto pure = sine_series(g, {1, 0, 0, 0, 0}, {0, 0, 0, 0, 0});
  for (std::size_t i = 0; i < g.nx; ++i) EXPECT_NEAR(pure[i], std::sin(2 * std::numbers::pi * g.x(i)), 1e-15);
  Rng rng(8);
  for (int k = 0; k < 100; ++k) {
    auto u = sample_ic(family("burgers"), rng);
    double mx = 0;
    for (double v : u) mx = std::max(mx, std::abs(v));
    EXPECT_NEAR(mx, 1.0, 1e-12);
  }
}

TEST(Generate, LayoutCountsAndDeterminism) {
  DatasetManifest m;
  m.params_per_family = 4;
  m.ics_per_param = 2;
  m.seed = 42;
  auto a = scratch("gen_a"), b = scratch("gen_b");
  auto rep = generate(m, a, 1);
  EXPECT_EQ(rep.written, 48u);
  EXPECT_TRUE(rep.skipped.empty());
  generate(m, b, 3);
  auto sa = snapshot(a), sb = snapshot(b);
  EXPECT_EQ(sa.size(), 97u);
  EXPECT_TRUE(sa == sb);

  auto index = nlohmann::json::parse(sa.at("manifest.json"));
  ASSERT_EQ(index["samples"].size(), 48u);
  for (const auto& s : index["samples"]) {
    auto traj = decode_grid(sa.at(s["trajectory"].get<std::string>()));
    EXPECT_EQ(traj.nt(), 32u);
    EXPECT_EQ(traj.grid.nx, 128u);
    auto eq = nlohmann::json::parse(sa.at(s["equation"].get<std::string>()));
    ConservationLaw law = law_from_json(eq);
    const FamilySpec& spec = family(eq["family"].get<std::string>());
    EXPECT_GE(law.q1, 0.9 * spec.q1 - 1e-15);
    EXPECT_LE(law.q1, 1.1 * spec.q1 + 1e-15);
    // stored coefficients reproduce the stored trajectory bit for bit
    auto again = solve(law, traj.frame_state(0), traj.grid, spec.t_final, spec.nt);
    EXPECT_EQ(again.values, traj.values);
    if (!spec.viscous()) {
      double m0 = 0, m1 = 0;
      for (std::size_t i = 0; i < traj.grid.nx; ++i) {
        m0 += traj.frame(0)[i] * traj.grid.dx;
        m1 += traj.frame(31)[i] * traj.grid.dx;
      }
      EXPECT_LE(std::abs(m1 - m0), 1e-12 * (1 + std::abs(m0)));
    }
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Generate, SplitsUseDisjointStreams) {
  DatasetManifest m;
  m.families = {family("burgers")};
  m.params_per_family = 1;
  m.ics_per_param = 1;
  auto a = scratch("split_a"), b = scratch("split_b");
  generate(m, a, 1);
  m.split = Split::Train;
  generate(m, b, 1);
  EXPECT_NE(read_file((a / "traj_burgers_p000_i000.grid").string()),
            read_file((b / "traj_burgers_p000_i000.grid").string()));
  fs::remove_all(a);
  fs::remove_all(b);
}
