#pragma once

// Noisy sample paths with f^ = f + v on flows and g^ = g + w on jumps, the
// summability tests that pair step schedules with noise assumptions, and a
// seeded Monte Carlo harness.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "hybridsa/linalg.hpp"
#include "hybridsa/rng.hpp"
#include "hybridsa/schedule.hpp"
#include "hybridsa/sets.hpp"
#include "hybridsa/simulate.hpp"

namespace hybridsa {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Flow noise v_{k+1}.
class NoiseModel {
 public:
  enum class Kind { Bounded, Gaussian, Custom };
  using Sampler = std::function<Vector(std::mt19937_64&, std::size_t dim)>;

  /// Uniform in the closed ball of the given radius.
  static NoiseModel bounded(double radius, double p = 1.0) {
    if (radius < 0.0) throw ConfigError("noise radius must be nonnegative");
    NoiseModel n(Kind::Bounded, p);
    n.scale_ = radius;
    return n;
  }
  /// Independent N(0, sigma^2) components, each truncated at 8 sigma.
  static NoiseModel gaussian(double sigma, double p = 1.0) {
    if (sigma < 0.0) throw ConfigError("noise sigma must be nonnegative");
    NoiseModel n(Kind::Gaussian, p);
    n.scale_ = sigma;
    return n;
  }
  static NoiseModel custom(Sampler sampler, std::function<double(double)> gamma, double p = 1.0) {
    NoiseModel n(Kind::Custom, p);
    n.sampler_ = std::move(sampler);
    n.gamma_ = std::move(gamma);
    return n;
  }

  Kind kind() const { return kind_; }
  double scale() const { return scale_; }
  double p() const { return p_; }
  bool is_zero() const { return kind_ != Kind::Custom && scale_ == 0.0; }

  /// Envelope gamma(|x|) of the moment condition E|v|^{2p} <= gamma.
  double moment_envelope(double r, std::size_t dim = 1) const {
    switch (kind_) {
      case Kind::Bounded: return std::pow(scale_, 2.0 * p_);
      case Kind::Gaussian: {
        // E|N(0, sigma^2)|^{2p} per component; |v|^{2p} <= d^{p-1} sum |v_i|^{2p}.
        const double per = std::pow(2.0 * scale_ * scale_, p_) * std::tgamma(p_ + 0.5) / std::sqrt(M_PI);
        return std::pow(static_cast<double>(dim), p_) * per;
      }
      case Kind::Custom: return gamma_ ? gamma_(r) : 0.0;
    }
    return 0.0;
  }

  /// gamma of the sub-Gaussian bound E exp(theta . v) <= exp(gamma |theta|^2).
  double subgaussian_envelope() const {
    switch (kind_) {
      case Kind::Bounded: return scale_ * scale_ / 2.0;
      case Kind::Gaussian: return scale_ * scale_ / 2.0;
      case Kind::Custom: return gamma_ ? gamma_(0.0) : 0.0;
    }
    return 0.0;
  }

  Vector sample(std::mt19937_64& rng, std::size_t dim) const {
    switch (kind_) {
      case Kind::Bounded: {
        Vector v(dim, 0.0);
        if (scale_ == 0.0) return v;
        std::normal_distribution<double> g(0.0, 1.0);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double n = 0.0;
        while (n == 0.0) {
          for (auto& c : v) c = g(rng);
          n = linalg::norm(v);
        }
        const double r = scale_ * std::pow(u(rng), 1.0 / static_cast<double>(dim));
        for (auto& c : v) c *= r / n;
        return v;
      }
      case Kind::Gaussian: {
        Vector v(dim, 0.0);
        if (scale_ == 0.0) return v;
        std::normal_distribution<double> g(0.0, scale_);
        for (auto& c : v) {
          do c = g(rng);
          while (std::abs(c) > 8.0 * scale_);
        }
        return v;
      }
      case Kind::Custom: return sampler_(rng, dim);
    }
    return Vector(dim, 0.0);
  }

  std::string label() const {
    switch (kind_) {
      case Kind::Bounded: return "bounded";
      case Kind::Gaussian: return "gaussian";
      case Kind::Custom: return "custom";
    }
    return "";
  }

 private:
  NoiseModel(Kind k, double p) : kind_(k), p_(p) {
    if (p < 1.0) throw ConfigError("moment order p must be at least 1");
  }

  Kind kind_;
  double scale_ = 0.0;
  double p_ = 1.0;
  Sampler sampler_;
  std::function<double(double)> gamma_;
};

/// Decay sequence rho_j, j >= 1.
struct RhoSequence {
  enum class Kind { Geometric, Power, Constant };
  Kind kind = Kind::Geometric;
  double param = 0.5;

  static RhoSequence geometric(double q) { return checked({Kind::Geometric, q}); }
  static RhoSequence power(double a) { return checked({Kind::Power, a}); }
  static RhoSequence constant(double c) { return checked({Kind::Constant, c}); }

  double operator()(int j) const {
    switch (kind) {
      case Kind::Geometric: return std::pow(param, j);
      case Kind::Power: return std::pow(static_cast<double>(j), -param);
      case Kind::Constant: return param;
    }
    return 0.0;
  }

  bool summable() const {
    switch (kind) {
      case Kind::Geometric: return param < 1.0;
      case Kind::Power: return param > 1.0;
      case Kind::Constant: return false;
    }
    return false;
  }
  bool vanishing() const {
    switch (kind) {
      case Kind::Geometric: return param < 1.0;
      case Kind::Power: return param > 0.0;
      case Kind::Constant: return false;
    }
    return false;
  }
  std::string label() const {
    switch (kind) {
      case Kind::Geometric: return "geometric";
      case Kind::Power: return "power";
      case Kind::Constant: return "constant";
    }
    return "";
  }

 private:
  static RhoSequence checked(RhoSequence r) {
    if (!(r.param > 0.0)) throw ConfigError("rho parameter must be positive");
    return r;
  }
};

enum class JumpNoiseMode { SummableRho, DirectDecay };

/// Jump noise w_{j+1}, clipped so that |w_{j+1}| <= rho_{j+1} gamma(|x|).
class JumpNoiseModel {
 public:
  JumpNoiseModel(NoiseModel base, RhoSequence rho, std::function<double(double)> gamma, JumpNoiseMode mode)
      : base_(std::move(base)), rho_(rho), gamma_(std::move(gamma)), mode_(mode) {
    if (!gamma_) gamma_ = [](double) { return 1.0; };
  }

  const RhoSequence& rho() const { return rho_; }
  JumpNoiseMode mode() const { return mode_; }
  const NoiseModel& base() const { return base_; }

  double envelope(int j_next, const Vector& x) const { return rho_(j_next) * gamma_(linalg::norm(x)); }

  /// w for the jump producing index j_next = j + 1 from state x.
  Vector sample(std::mt19937_64& rng, int j_next, const Vector& x) const {
    Vector w = base_.sample(rng, x.size());
    const double cap = envelope(j_next, x);
    const double n = linalg::norm(w);
    if (n > cap && n > 0.0)
      for (auto& c : w) c *= cap / n;
    return w;
  }

 private:
  NoiseModel base_;
  RhoSequence rho_;
  std::function<double(double)> gamma_;
  JumpNoiseMode mode_;
};

/// Wraps a sampler for the chosen branch; rejects rho sequences the branch cannot use.
inline JumpNoiseModel jump_noise_schedule(NoiseModel base, RhoSequence rho, JumpNoiseMode mode,
                                          std::function<double(double)> gamma = {}) {
  if (mode == JumpNoiseMode::SummableRho && !rho.summable())
    throw ConfigError("summable-rho branch needs a summable rho sequence (" + rho.label() + " is not)");
  if (mode == JumpNoiseMode::DirectDecay && !rho.vanishing())
    throw ConfigError("direct-decay branch needs rho_j -> 0 (" + rho.label() + " does not)");
  return JumpNoiseModel(std::move(base), rho, std::move(gamma), mode);
}

// ---------------------------------------------------------------------------
// Noisy runs

struct RandomRun {
  std::uint64_t seed = 0;
  SimulationResult<double> result;
  std::vector<Vector> v;  // v[k] = v_{k+1}
  std::vector<Vector> w;  // w[j] = w_{j+1}
};

struct NoisyOptions {
  double guard_eps = 0.0;
  /// Projection applied to g + w (e.g. P_S); the system's post-jump region is used when unset.
  std::optional<SetRegion> post_jump_region;
};

/// Flow steps use fhat = f_k + v_{k+1}; jumps land on g_j + w_{j+1}
/// (then projected when a post-jump region is known). Every draw comes
/// from its own counter-based stream, so (config, seed) fixes the run.
inline RandomRun noisy_simulate(const SimulationModel<double>& model, const Vector& x0, const StepSchedule& schedule,
                                const NoiseModel& noise, const std::optional<JumpNoiseModel>& jump_noise,
                                std::uint64_t seed, const Horizon& horizon,
                                const JumpPolicy& policy = JumpPolicy::prefer_jump(), const NoisyOptions& opt = {}) {
  const std::size_t dim = model.dim;
  SimulationOptions<double> so;
  so.guard_eps = opt.guard_eps;
  auto draw_v = [noise, seed, dim](long k) {
    auto rng = make_stream(seed, StreamTag::FlowNoise, static_cast<std::uint64_t>(k));
    return noise.sample(rng, dim);
  };
  if (!noise.is_zero()) so.flow_noise = [draw_v](long k, const Vector&, const Vector&, double) { return draw_v(k); };
  auto draw_w = [jump_noise, seed](int j, const Vector& x) {
    auto rng = make_stream(seed, StreamTag::JumpNoise, static_cast<std::uint64_t>(j));
    return jump_noise->sample(rng, j + 1, x);
  };
  const std::optional<SetRegion> region = opt.post_jump_region;
  if (jump_noise) {
    so.jump_outcome = [draw_w, region](int j, const Vector& x, const Vector& g) {
      Vector out = linalg::add(g, draw_w(j, x));
      if (region) {
        if (auto p = region->project(out)) out = *p;
      }
      return out;
    };
  }
  RandomRun run;
  run.seed = seed;
  run.result = euler_simulate(model, x0, schedule, policy, horizon, so);
  run.v.reserve(static_cast<std::size_t>(run.result.K()));
  for (long k = 0; k < run.result.K(); ++k) run.v.push_back(noise.is_zero() ? Vector(dim, 0.0) : draw_v(k));
  for (int j = 0; j < run.result.J(); ++j) {
    if (!jump_noise) {
      run.w.push_back(Vector(dim, 0.0));
      continue;
    }
    const Vector& x = run.result.at(run.result.kbar[static_cast<std::size_t>(j)], j);
    run.w.push_back(draw_w(j, x));
  }
  return run;
}

/// Largest |w_{j+1}| / (rho_{j+1} gamma(|x|)) over the run; <= 1 means every jump respected the envelope.
inline double envelope_ratio(const RandomRun& run, const JumpNoiseModel& jn) {
  double worst = 0.0;
  for (int j = 0; j < run.result.J(); ++j) {
    const Vector& x = run.result.at(run.result.kbar[static_cast<std::size_t>(j)], j);
    const double cap = jn.envelope(j + 1, x);
    const double n = linalg::norm(run.w[static_cast<std::size_t>(j)]);
    worst = std::max(worst, cap > 0.0 ? n / cap : (n > 0.0 ? std::numeric_limits<double>::infinity() : 0.0));
  }
  return worst;
}

/// Sample mean of |v|^{2p} over a run.
inline double empirical_moment(const RandomRun& run, double p) {
  if (run.v.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& v : run.v) acc += std::pow(linalg::norm(v), 2.0 * p);
  return acc / static_cast<double>(run.v.size());
}

// ---------------------------------------------------------------------------
// Schedule / noise compatibility

struct BranchVerdict {
  bool accept = false;
  bool analytic = false;
  std::string reason;
};

namespace detail {

/// Convergence heuristic for sum_k term(h_k): the block (K, 2K] adds at most 1% of the first K terms.
inline BranchVerdict series_heuristic(const StepSchedule& s, const std::function<double(double)>& term, long K) {
  BranchVerdict v;
  if (s.kind() == StepSchedule::Kind::List) K = static_cast<long>(s.list_size()) / 2;
  if (K < 2) {
    v.reason = "too few steps for the series heuristic";
    return v;
  }
  double first = 0.0;
  double second = 0.0;
  for (long k = 1; k <= K; ++k) first += term(s.h<double>(k));
  for (long k = K + 1; k <= 2 * K; ++k) second += term(s.h<double>(k));
  v.accept = second <= 0.01 * first;
  v.reason = "series heuristic: block sum " + std::to_string(second) + " vs head sum " + std::to_string(first);
  return v;
}

}  // namespace detail

/// sum_k h_{k+1}^{1+p} < infinity.
inline BranchVerdict validate_moment_branch(const StepSchedule& s, double p, long heuristic_K = 100000) {
  if (p < 1.0) throw ConfigError("moment order p must be at least 1");
  BranchVerdict v;
  switch (s.kind()) {
    case StepSchedule::Kind::Power: {
      v.analytic = true;
      const double e = s.exponent() * (1.0 + p);
      v.accept = e > 1.0;
      v.reason = "a(1+p) = " + std::to_string(e) + (v.accept ? " > 1" : " <= 1");
      return v;
    }
    case StepSchedule::Kind::Constant:
      v.analytic = true;
      v.reason = "constant steps: terms do not vanish";
      return v;
    default:
      return detail::series_heuristic(s, [p](double h) { return std::pow(h, 1.0 + p); }, heuristic_K);
  }
}

/// sum_k exp(-c / h_{k+1}) < infinity for every listed c.
inline BranchVerdict validate_subgaussian_branch(const StepSchedule& s, const std::vector<double>& cs,
                                                 long heuristic_K = 100000) {
  if (cs.empty()) throw ConfigError("sub-Gaussian check needs at least one c");
  for (double c : cs)
    if (!(c > 0.0)) throw ConfigError("sub-Gaussian constants must be positive");
  BranchVerdict v;
  switch (s.kind()) {
    case StepSchedule::Kind::Power:
      v.analytic = true;
      v.accept = s.exponent() > 0.0;
      v.reason = v.accept ? "exp(-c k^a) is summable for a > 0" : "a <= 0: terms do not vanish";
      return v;
    case StepSchedule::Kind::Constant:
      v.analytic = true;
      v.reason = "constant steps: terms are constant";
      return v;
    default:
      for (double c : cs) {
        v = detail::series_heuristic(s, [c](double h) { return std::exp(-c / h); }, heuristic_K);
        if (!v.accept) return v;
      }
      return v;
  }
}

// ---------------------------------------------------------------------------
// Monte Carlo

/// Runs fn(seed) for every seed with at most `jobs` concurrent tasks; output order follows `seeds`.
template <class Fn>
auto monte_carlo(const std::vector<std::uint64_t>& seeds, Fn fn, unsigned jobs = 0)
    -> std::vector<decltype(fn(std::uint64_t{}))> {
  using R = decltype(fn(std::uint64_t{}));
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::optional<R>> slots(seeds.size());
  std::size_t next = 0;
  while (next < seeds.size()) {
    std::vector<std::future<void>> batch;
    for (unsigned t = 0; t < jobs && next < seeds.size(); ++t, ++next) {
      const std::size_t i = next;
      batch.push_back(std::async(std::launch::async, [&, i] { slots[i].emplace(fn(seeds[i])); }));
    }
    for (auto& f : batch) f.get();
  }
  std::vector<R> out;
  out.reserve(seeds.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

struct DecayTable {
  std::vector<long> checkpoints;
  std::vector<std::vector<double>> per_seed;  // [run][checkpoint]
  std::vector<double> mean;                   // per checkpoint
  std::size_t decreasing = 0;                 // runs with last < first
  bool verdict = false;                       // decreasing for >= 90% of runs
};

inline DecayTable empirical_benaim_decay(const std::vector<RandomRun>& runs, double T,
                                         const std::vector<long>& checkpoints) {
  if (checkpoints.size() < 2) throw std::invalid_argument("decay table needs at least two checkpoints");
  DecayTable tab;
  tab.checkpoints = checkpoints;
  tab.mean.assign(checkpoints.size(), 0.0);
  for (const auto& run : runs) {
    auto row = benaim_series(run.result, T, checkpoints);
    for (std::size_t c = 0; c < row.size(); ++c) tab.mean[c] += row[c] / static_cast<double>(runs.size());
    if (row.back() < row.front()) ++tab.decreasing;
    tab.per_seed.push_back(std::move(row));
  }
  tab.verdict = !runs.empty() && static_cast<double>(tab.decreasing) >= 0.9 * static_cast<double>(runs.size());
  return tab;
}

}  // namespace hybridsa
