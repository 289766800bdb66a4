#include <gtest/gtest.h>

#include <cmath>

#include "support.hpp"

using namespace hybridsa;

TEST(Objectives, DoubleWellValues) {
  const Objective o = double_well();
  EXPECT_EQ(o.theta({2.0}), 9.0);
  EXPECT_EQ(o.theta({1.0}), 0.0);
  for (const auto& c : o.critical_points) EXPECT_EQ(o.gradient(c)[0], 0.0);
  EXPECT_NEAR(critical_set_distance({0.9}, o), 0.1, 1e-15);
  EXPECT_NEAR(set_distance({0.2}, o.minimizers), 0.8, 1e-15);
}

TEST(Objectives, GradientMatchesFiniteDifference) {
  for (const Objective& o : {double_well(), rastrigin(2)}) {
    const Vector y(o.dim, 0.37);
    const Vector g = o.gradient(y);
    for (std::size_t i = 0; i < o.dim; ++i) {
      Vector a = y;
      Vector b = y;
      a[i] += 1e-6;
      b[i] -= 1e-6;
      EXPECT_NEAR((o.theta(a) - o.theta(b)) / 2e-6, g[i], 1e-5) << o.name;
    }
  }
}

TEST(Objectives, RastriginResidual) {
  const Objective o = rastrigin(2);
  EXPECT_EQ(critical_set_distance({0.0, 0.0}, o), 0.0);
  EXPECT_GT(critical_set_distance({0.25, 0.0}, o), 1.0);
}

TEST(Annealing, JumpKeepsTheBetterPoint) {
  const Objective o = double_well();
  // Theta(2) = 9 and Theta(1) = 0: the candidate wins.
  EXPECT_EQ(annealing_jump_y(o, {2.0}, 0.5, {-2.0}), (Vector{1.0}));
  // A worse candidate is rejected.
  EXPECT_EQ(annealing_jump_y(o, {1.0}, 0.5, {1.0}), (Vector{1.0}));
  // Candidates outside S are projected onto [-2, 2].
  EXPECT_EQ(annealing_jump_y(o, {1.5}, 1.0, {5.0}), (Vector{1.5}));
}

TEST(Annealing, BorelCantelliConstants) {
  double prev = 0.0;
  for (int j = 1; j <= 30; ++j) {
    const double c = borel_cantelli_c(j);
    EXPECT_GE(c, 1.0);
    EXPECT_GE(c, prev);
    EXPECT_LE(std::erfc(c / std::sqrt(2.0)), std::ldexp(1.0, -j) * (1.0 + 1e-9));
    prev = c;
  }
  EXPECT_THROW(borel_cantelli_c(0), std::invalid_argument);
}

TEST(Annealing, EllSchedules) {
  AnnealingConfig cfg;
  for (int j = 1; j <= 20; ++j) EXPECT_DOUBLE_EQ(annealing_ell(cfg, j), 1.0 / (j * borel_cantelli_c(j)));
  cfg.ell = EllSchedule::capped(0.5, [](int j) { return 1.0 / (j * j); });
  for (int j = 1; j <= 20; ++j) {
    const double base = 1.0 / (j * borel_cantelli_c(j));
    EXPECT_DOUBLE_EQ(annealing_ell(cfg, j), std::min(1.0 / (j * j), 0.5 * base));
    EXPECT_LE(annealing_ell(cfg, j), 0.5 * base);
  }
  EXPECT_THROW(EllSchedule::capped(0.0, [](int) { return 1.0; }), std::invalid_argument);
}

TEST(Annealing, RunIsMonotoneAndDwellCompliant) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    AnnealingConfig cfg;
    cfg.seed = seed;
    cfg.clip_z = true;
    const Preset p = annealing(cfg);
    const auto r = euler_simulate(p.model, p.x0, StepSchedule::power(0.5, 0.1), p.policy, Horizon{4000});
    ASSERT_EQ(r.status, RunStatus::Completed) << r.message;
    ASSERT_GT(r.J(), 3);
    for (int j = 0; j < r.J(); ++j) {
      const auto i = static_cast<std::size_t>(j);
      const Vector pre = r.at(r.kbar[i], j);
      const Vector after = r.at(r.kbar[i], j + 1);
      const double ty = cfg.objective.theta(Vector(pre.begin(), pre.end() - 1));
      EXPECT_LE(cfg.objective.theta(Vector(after.begin(), after.end() - 1)), ty);
      // |y+ - y| <= l_j |z_j| <= l_j c_j = 1 / j.
      EXPECT_LE(std::abs(after[0] - pre[0]), 1.0 / (j + 1) + 1e-12);
      EXPECT_EQ(after.back(), pre.back() - 1.0);
    }
    std::vector<HybridTime> pts;
    for (const auto& st : r.steps) pts.push_back({r.tau[static_cast<std::size_t>(st.k)], st.j});
    EXPECT_TRUE(dwell_check(pts, cfg.N, cfg.delta, 1e-9).admissible);
  }
}

TEST(Annealing, RestrictedToItsDomain) {
  const Preset p = annealing({});
  EXPECT_EQ(p.system.dim, 2u);
  EXPECT_TRUE(p.system.flow_set.contains(p.x0));
  EXPECT_TRUE(p.system.flow_map.evaluate({0.5, 1.0}).contains({1.5, 0.25}, 1e-12));
  EXPECT_FALSE(p.system.jump_set.contains({0.5, 0.5}));
}

TEST(CubicReset, TimerMechanics) {
  const Preset p = cubic_reset(2.0);
  const auto r = euler_simulate(p.model, p.x0, StepSchedule::power(0.75), p.policy, Horizon{2000});
  ASSERT_EQ(r.status, RunStatus::Completed) << r.message;
  ASSERT_GT(r.J(), 5);
  for (int j = 0; j < r.J(); ++j) {
    const auto i = static_cast<std::size_t>(j);
    const Vector pre = r.at(r.kbar[i], j);
    EXPECT_GE(pre[1], 1.0);
    EXPECT_EQ(r.at(r.kbar[i], j + 1)[1], 0.0);
    EXPECT_LE(std::abs(r.at(r.kbar[i], j + 1)[0]), 2.0);
  }
  for (const auto& x : r.states) {
    EXPECT_GE(x[1], 0.0);
    EXPECT_LE(x[1], 1.0 + 1.0);
  }
}

TEST(CubicReset, GeneralisedTimerIsDwellCompliant) {
  const Preset p = cubic_reset(2.0, 3, 0.5);
  const auto r = euler_simulate(p.model, p.x0, StepSchedule::power(0.5, 0.1), p.policy, Horizon{20000});
  ASSERT_EQ(r.status, RunStatus::Completed) << r.message;
  // The timer can pass N by at most delta h_k before the jump fires.
  for (const auto& x : r.states) EXPECT_LE(x[1], 3.0 + 0.5 * 0.1);
  ASSERT_GE(r.J(), 3);
  std::vector<HybridTime> pts;
  for (const auto& st : r.steps) pts.push_back({r.tau[static_cast<std::size_t>(st.k)], st.j});
  EXPECT_TRUE(dwell_check(pts, 3, 0.5, 1e-9).admissible);
}

TEST(CubicReset, SolveMatchesClosedForm) {
  const Preset p = cubic_reset(2.0);
  SolveOptions so;
  so.max_length = 3.0;
  const HybridArc a = solve(p.system, p.x0, so);
  const double z0 = std::sqrt(3.0);
  const Vector end0 = a.value({1.0, 0});
  EXPECT_NEAR(end0[0], z0 / std::sqrt(1.0 + 2.0 * z0 * z0), 1e-9);
}

TEST(SineBand, Geometry) {
  const HybridMapping band = sine_band_curve(40, 6.0);
  const auto v0 = band.values_at({0.0, 0});
  ASSERT_EQ(v0.size(), 5u);
  EXPECT_EQ(*std::min_element(v0.begin(), v0.end()), (Vector{-1.0}));
  EXPECT_EQ(*std::max_element(v0.begin(), v0.end()), (Vector{1.0}));
  const auto v5 = band.values_at({5.0, 0});
  const double width = (*std::max_element(v5.begin(), v5.end()))[0] - (*std::min_element(v5.begin(), v5.end()))[0];
  EXPECT_NEAR(width / 2.0, 0.006737946999085467, 1e-15);
  // 40 (m + 1) times on [m, m + 1).
  EXPECT_EQ(band.times().size(), 40u * (1 + 2 + 3 + 4 + 5 + 6) + 0u);
}

TEST(SineBand, FamilyContainsTheCentre) {
  const auto fam = sine_family(1e-3, 41);
  const auto cands = fam.candidates({std::sin(5.0)}, 0.05, 1.0);
  ASSERT_FALSE(cands.empty());
  double best = 1.0;
  for (const auto& c : cands) best = std::min(best, std::abs(c.value({0.5, 0})[0] - std::sin(5.5)));
  EXPECT_LT(best, 1e-12);
}

TEST(Presets, RegistryAndFlows) {
  EXPECT_EQ(preset_names().size(), 7u);
  const Preset r = rotation(2.0);
  const Vector x = r.system.exact_flow({1.0, 0.0}, 0.25 * M_PI);
  EXPECT_NEAR(x[0], 0.0, 1e-15);
  EXPECT_NEAR(x[1], -1.0, 1e-15);
  const Preset w = two_well();
  const Vector y = w.system.exact_flow(w.x0, 50.0);
  EXPECT_NEAR(y[0], 1.0, 1e-9);
  EXPECT_THROW(cubic_reset(0.0), std::invalid_argument);
}

TEST(Presets, ProductRunsFactorsIndependently) {
  const Preset a = cubic_reset(2.0);
  const Preset b = decay(1);
  const Preset p = product_preset(a, b);
  EXPECT_EQ(p.system.dim, 3u);
  const StepSchedule s = StepSchedule::power(0.75);
  const auto rp = euler_simulate(p.model, p.x0, s, p.policy, Horizon{500});
  const auto ra = euler_simulate(a.model, a.x0, s, a.policy, Horizon{500});
  const auto rb = euler_simulate(b.model, b.x0, s, b.policy, Horizon{500});
  ASSERT_EQ(rp.status, RunStatus::Completed) << rp.message;
  ASSERT_EQ(rp.steps.size(), ra.steps.size());
  for (std::size_t i = 0; i < rp.steps.size(); ++i) {
    const auto [k, j] = rp.steps[i];
    const Vector& x = rp.states[i];
    EXPECT_EQ(Vector(x.begin(), x.begin() + 2), ra.states[i]);
    // Jumps of the reset factor leave the decay factor alone.
    EXPECT_EQ(x[2], rb.at(k, 0)[0]);
  }
}

TEST(Annealing, EllDecayCheck) {
  AnnealingConfig cfg;
  EXPECT_TRUE(check_ell_decay(cfg).vanishes);
  cfg.ell = EllSchedule::capped(0.5, [](int) { return 1.0; });
  EXPECT_TRUE(check_ell_decay(cfg).vanishes);
  cfg.ell = EllSchedule::uncapped([](int) { return 0.2; });
  EXPECT_EQ(annealing_ell(cfg, 7), 0.2);
  const auto v = check_ell_decay(cfg);
  EXPECT_FALSE(v.vanishes);
  EXPECT_NE(v.reason.find("increases"), std::string::npos);
}
