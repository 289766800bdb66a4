// One line per acceptance criterion; exit status is nonzero if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "support.hpp"

using namespace hybridsa;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// 1. Divergent cubic in 50-digit arithmetic against the recursion oracle.
Verdict cubic_divergence() {
  using Big = boost::multiprecision::cpp_bin_float_50;
  const auto t0 = Clock::now();
  const Big z0 = sqrt(Big(3));
  const auto r = euler_simulate(cubic_model<Big>(), BasicVector<Big>{z0}, StepSchedule::power(0.75),
                                JumpPolicy::prefer_flow(), Horizon{10});
  const double secs = seconds_since(t0);
  const auto oracle = testing_support::cubic_recursion<Big>(z0, 10);
  bool exact = r.states.size() == oracle.size();
  for (std::size_t k = 0; exact && k < oracle.size(); ++k) exact = r.states[k][0] == oracle[k];
  bool increasing = true;
  for (std::size_t k = 1; k < r.states.size(); ++k) increasing = increasing && abs(r.states[k][0]) > abs(r.states[k - 1][0]);
  const bool big3 = abs(r.states[3][0]) > Big(1000);
  Verdict v;
  v.pass = exact && increasing && big3 && secs < 1.0;
  v.detail = std::string("exact=") + (exact ? "yes" : "no") + " increasing=" + (increasing ? "yes" : "no") +
             " |z_3|=" + fmt("%.6g", static_cast<double>(abs(r.states[3][0]))) + fmt(" time=%.3fs", secs);
  return v;
}

// 2. Saturated reset keeps iterates bounded and z settles near 0.
Verdict reset_boundedness() {
  const auto t0 = Clock::now();
  const Preset p = cubic_reset(2.0);
  const auto r = euler_simulate(p.model, p.x0, StepSchedule::power(0.75), p.policy, Horizon{10000});
  double sup = 0.0;
  for (const auto& x : r.states) sup = std::max(sup, linalg::norm(x));
  double zmax = std::numeric_limits<double>::infinity();
  try {
    const auto est = omega_estimate(r);
    zmax = coordinate_extent(est, 0);
    for (const auto& x : est.points) zmax = std::max(zmax, std::abs(x[0]));
  } catch (const std::exception&) {
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = r.status == RunStatus::Completed && sup <= 4.0 && zmax <= 0.05 && secs < 5.0;
  v.detail = fmt("sup|x|=%.4g (bound 4)", sup) + fmt(" omega max|z|=%.4g (bound 0.05)", zmax) + fmt(" time=%.2fs", secs);
  return v;
}

struct AnnealingTally {
  int complete = 0;
  int critical = 0;
  int minimizer = 0;
};

AnnealingTally annealing_batch(std::uint64_t first_seed, int n) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < n; ++i) seeds.push_back(first_seed + static_cast<std::uint64_t>(i));
  struct One {
    bool complete = false;
    double crit = 1e9;
    double mini = 1e9;
  };
  const Objective obj = double_well();
  const auto out = monte_carlo(seeds, [&](std::uint64_t s) {
    AnnealingConfig cfg;
    cfg.seed = s;
    const Preset p = annealing(cfg);
    const auto r = euler_simulate(p.model, p.x0, StepSchedule::power(0.5, 0.1), p.policy, Horizon{10000});
    One o;
    if (r.status != RunStatus::Completed) return o;
    try {
      const auto est = omega_estimate(r);
      o.complete = true;
      o.crit = o.mini = 0.0;
      for (const auto& x : est.points) {
        const Vector y(x.begin(), x.end() - 1);
        o.crit = std::max(o.crit, critical_set_distance(y, obj));
        o.mini = std::max(o.mini, set_distance(y, obj.minimizers));
      }
    } catch (const std::exception&) {
    }
    return o;
  });
  AnnealingTally t;
  for (const auto& o : out) {
    if (!o.complete) continue;
    ++t.complete;
    t.critical += o.crit < 0.1;
    t.minimizer += o.mini < 0.1;
  }
  return t;
}

// 3. Annealing runs end on the critical set, mostly at the minimizers.
Verdict annealing_convergence() {
  const auto t0 = Clock::now();
  auto judge = [](const AnnealingTally& t) {
    return t.complete > 0 && t.critical == t.complete && t.minimizer * 10 >= t.complete * 8;
  };
  AnnealingTally t = annealing_batch(0, 50);
  std::string rerun;
  if (!judge(t) && t.complete - t.critical <= 3) {
    t = annealing_batch(50, 50);
    rerun = " (rerun on seeds 50..99)";
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = judge(t) && secs < 120.0;
  v.detail = std::to_string(t.complete) + "/50 bounded complete, " + std::to_string(t.critical) + " at critical set, " +
             std::to_string(t.minimizer) + " at minimizers" + rerun + fmt(" time=%.1fs", secs);
  return v;
}

// 4. Benaim statistic shrinks from k = 10 to k = 1000 under bounded noise.
Verdict benaim_decay() {
  const auto t0 = Clock::now();
  const StepSchedule s = StepSchedule::power(0.75);
  const bool accepted = validate_moment_branch(s, 1.0).accept;
  const Preset p = decay(1);
  auto runs_with = [&](const NoiseModel& n) {
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t i = 0; i < 20; ++i) seeds.push_back(1000 + i);
    return monte_carlo(seeds, [&](std::uint64_t seed) {
      return noisy_simulate(p.model, p.x0, s, n, std::nullopt, seed, Horizon{1200}, JumpPolicy::prefer_flow());
    });
  };
  const auto noisy = empirical_benaim_decay(runs_with(NoiseModel::bounded(0.1, 1.0)), 1.0, {10, 1000});
  const auto clean = empirical_benaim_decay(runs_with(NoiseModel::bounded(0.0, 1.0)), 1.0, {10, 1000});
  bool zero = true;
  for (const auto& row : clean.per_seed)
    for (double x : row) zero = zero && x == 0.0;
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = accepted && noisy.decreasing >= 18 && zero && secs < 30.0;
  v.detail = std::string("validator ") + (accepted ? "accepts" : "rejects") + ", " + std::to_string(noisy.decreasing) +
             "/20 decrease" + fmt(" (mean %.4g", noisy.mean.front()) + fmt(" -> %.4g)", noisy.mean.back()) +
             ", zero noise " + (zero ? "identically 0" : "NONZERO") + fmt(" time=%.2fs", secs);
  return v;
}

// 5. Randomized domain algebra.
Verdict domain_algebra() {
  const auto fails = testing_support::domain_algebra_failures(20240501, 1000);
  Verdict v;
  v.pass = fails.empty();
  v.detail = std::to_string(1000 - fails.size()) + "/1000 cases" + (fails.empty() ? "" : ", first failure: " + fails.front());
  return v;
}

// 6. SCC estimate against brute force; find_chain output verifies on rotation.
Verdict chain_oracles() {
  std::mt19937_64 g(2024);
  int agree = 0;
  for (int c = 0; c < 200; ++c) {
    const std::size_t n = 1 + g() % 12;
    const double p = std::uniform_real_distribution<double>(0.02, 0.35)(g);
    const auto adj = testing_support::random_graph(g, n, p);
    const auto est = chain_recurrent_estimate(adj);
    agree += est.nodes == testing_support::brute_force_cyclic(adj) && est.classes == testing_support::brute_force_classes(adj);
  }
  const Preset rot = rotation();
  ReachOptions o;
  o.net_radius = 0.2;
  o.eps = 0.45;
  o.tau = 1.0;
  o.extra_length = 7.0;
  o.variants = 1;
  const auto graph = build_reach_graph(rot.system, regions::annulus({0.0, 0.0}, 0.5, 1.5), o);
  std::mt19937_64 q(31);
  std::uniform_real_distribution<double> ang(0.0, 2.0 * M_PI), rad(0.6, 1.4);
  int valid = 0;
  for (int i = 0; i < 100; ++i) {
    const double a = ang(q), b = ang(q), r1 = rad(q), r2 = rad(q);
    const auto s = find_chain(graph, {r1 * std::cos(a), r1 * std::sin(a)}, {r2 * std::cos(b), r2 * std::sin(b)});
    valid += s.chain && verify_chain(*s.chain, rot.system, false, 1e-2).valid;
  }
  Verdict v;
  v.pass = agree == 200 && valid == 100;
  v.detail = std::to_string(agree) + "/200 graphs agree, " + std::to_string(valid) + "/100 rotation chains valid";
  return v;
}

// 7. Interpolation anchoring, vanishing chi and chi against quadrature.
Verdict interpolation_exactness() {
  std::vector<SimulationResult<double>> deterministic;
  {
    const Preset p = cubic_reset(2.0);
    deterministic.push_back(euler_simulate(p.model, p.x0, StepSchedule::power(0.75), p.policy, Horizon{10000}));
  }
  {
    const Preset p = rotation();
    deterministic.push_back(euler_simulate(p.model, p.x0, StepSchedule::power(0.6, 0.05), p.policy, Horizon{5000}));
  }
  {
    AnnealingConfig cfg;
    cfg.seed = 3;
    const Preset p = annealing(cfg);
    deterministic.push_back(euler_simulate(p.model, p.x0, StepSchedule::power(0.5, 0.1), p.policy, Horizon{5000}));
  }
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Preset p = dwell(2, 0.5);
    deterministic.push_back(euler_simulate(p.model, p.x0, StepSchedule::power(0.6), JumpPolicy::randomized(0.5, s), Horizon{400}));
  }
  std::vector<SimulationResult<double>> noisy;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Preset p = decay(1);
    noisy.push_back(noisy_simulate(p.model, p.x0, StepSchedule::power(0.6), NoiseModel::gaussian(0.5), std::nullopt, s,
                                   Horizon{300}, JumpPolicy::prefer_flow())
                        .result);
  }
  std::size_t anchors = 0, anchor_fail = 0;
  auto anchor = [&](const SimulationResult<double>& r) {
    const HybridArc psi = interpolate(r);
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
      const auto [k, j] = r.steps[i];
      ++anchors;
      anchor_fail += psi.value({r.tau[static_cast<std::size_t>(k)], j}) != r.states[i];
    }
  };
  bool chi_zero = true;
  for (const auto& r : deterministic) {
    anchor(r);
    const auto dom = interpolated_domain(r);
    const auto& last = dom.intervals().back();
    const Vector chi = chi_correction(r, 0.0, 0, last.t_end, last.j);
    for (double c : chi) chi_zero = chi_zero && c == 0.0;
    for (double c : chi_tail_sup(r, 1.0, {0, r.K() / 2})) chi_zero = chi_zero && c == 0.0;
  }
  double worst = 0.0;
  std::mt19937_64 g(8);
  for (const auto& r : noisy) {
    anchor(r);
    std::uniform_real_distribution<double> u(0.0, r.tau.back());
    for (int c = 0; c < 50; ++c) {
      double s = u(g), t = u(g);
      if (s > t) std::swap(s, t);
      worst = std::max(worst, std::abs(chi_correction(r, s, 0, t, 0)[0] - testing_support::chi_quadrature(r, s, t)[0]));
    }
  }
  Verdict v;
  v.pass = anchor_fail == 0 && chi_zero && worst <= 1e-12;
  v.detail = std::to_string(anchors - anchor_fail) + "/" + std::to_string(anchors) + " anchors bit-exact, chi " +
             (chi_zero ? "identically 0" : "NONZERO") + " without defects" + fmt(", quadrature gap %.2e", worst);
  return v;
}

// 8. Exhaustive pairwise dwell check on generated domains.
Verdict dwell_compliance() {
  int ok = 0;
  double worst = -1e9;
  const int Ns[] = {1, 2, 3};
  const double deltas[] = {0.25, 0.5, 1.0};
  for (int run = 0; run < 100; ++run) {
    const int N = Ns[run % 3];
    const double delta = deltas[(run / 3) % 3];
    const Preset p = dwell(N, delta);
    const auto r = euler_simulate(p.model, p.x0, StepSchedule::power(0.6), JumpPolicy::randomized(0.5, run), Horizon{400});
    std::vector<std::pair<double, int>> pts;
    for (const auto& st : r.steps) pts.push_back({r.tau[static_cast<std::size_t>(st.k)], st.j});
    const double e = testing_support::dwell_worst_excess(pts, N, delta);
    worst = std::max(worst, e);
    ok += r.status == RunStatus::Completed && e <= 1e-9;
  }
  Verdict v;
  v.pass = ok == 100;
  v.detail = std::to_string(ok) + "/100 runs compliant" + fmt(", worst excess %.3g (tol 1e-9)", worst);
  return v;
}

// 9. Tail fits on the sine band track e^{-s}.
Verdict sine_band_tail() {
  const auto t0 = Clock::now();
  const HybridMapping band = sine_band_curve(40, 12.0);
  const auto fits = tail_closeness_diagnostic(band, sine_family(1e-3, 41), 5.0, {{1.0, 0}, {3.0, 0}, {5.0, 0}}, 0.05);
  bool ok = fits.size() == 3;
  std::string d;
  for (const auto& f : fits) {
    const double target = std::exp(-f.start.t);
    const double ratio = f.eps / target;
    ok = ok && !f.inconclusive && ratio >= 0.5 && ratio <= 2.0;
    d += fmt("s=%.0f", f.start.t) + fmt(" eps=%.4g", f.eps) + fmt(" (ratio %.3f) ", ratio);
  }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = ok && secs < 30.0;
  v.detail = d + fmt("time=%.1fs", secs);
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"cubic divergence", cubic_divergence},
      {"reset boundedness", reset_boundedness},
      {"annealing convergence", annealing_convergence},
      {"benaim decay", benaim_decay},
      {"domain algebra", domain_algebra},
      {"chain oracles", chain_oracles},
      {"interpolation exactness", interpolation_exactness},
      {"dwell compliance", dwell_compliance},
      {"sine band tail", sine_band_tail},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.detail = std::string("exception: ") + e.what();
    }
    failed += !v.pass;
    std::printf("criterion %zu %-24s %s  %s\n", i + 1, criteria[i].first, v.pass ? "PASS" : "FAIL", v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
