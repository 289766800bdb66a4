#pragma once

// Euler-type simulation of hybrid inclusions on hybrid sequence domains with
// vanishing steps, the bookkeeping of realised and selected flow directions,
// the window statistic on their weighted defects, and the passage from
// sequences to arcs (compression, interpolation, correction integrals).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hybridsa/hybrid_time.hpp"
#include "hybridsa/linalg.hpp"
#include "hybridsa/rng.hpp"
#include "hybridsa/schedule.hpp"
#include "hybridsa/system.hpp"

namespace hybridsa {

class HorizonError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Simulation-side view of a hybrid system over scalar type S.
template <class S>
struct SimulationModel {
  using State = BasicVector<S>;

  std::size_t dim = 0;
  std::string name = "model";
  std::function<bool(const State&)> in_flow;
  std::function<bool(const State&)> in_jump;
  /// Distances to C and D, used by the escape guard (optional).
  std::function<double(const State&)> flow_distance;
  std::function<double(const State&)> jump_distance;
  /// f_k: an element of F(x); may depend on the step size about to be taken.
  std::function<State(const State&, const S& h)> flow_selection;
  /// g_j: an element of G(x) for the jump from j to j + 1.
  std::function<State(const State&, int j)> jump_selection;
};

/// Model using the configured selections of a double-precision system.
inline SimulationModel<double> make_model(const HybridSystem& sys) {
  SimulationModel<double> m;
  m.dim = sys.dim;
  m.name = sys.name;
  const SetRegion c = sys.flow_set;
  const SetRegion d = sys.jump_set;
  const SetValuedMap f = sys.flow_map;
  const SetValuedMap g = sys.jump_map;
  m.in_flow = [c](const Vector& x) { return c.contains(x); };
  m.in_jump = [d](const Vector& x) { return d.contains(x); };
  m.flow_distance = [c](const Vector& x) { return c.distance(x); };
  m.jump_distance = [d](const Vector& x) { return d.distance(x); };
  m.flow_selection = [f](const Vector& x, double) { return f.selection(x); };
  m.jump_selection = [g](const Vector& x, int) { return g.selection(x); };
  return m;
}

/// Resolves the choice between flowing and jumping on C cap D.
struct JumpPolicy {
  enum class Kind { PreferFlow, PreferJump, Randomized };
  Kind kind = Kind::PreferJump;
  double p = 0.5;  // jump probability for Randomized
  std::uint64_t seed = 0;

  static JumpPolicy prefer_flow() { return {Kind::PreferFlow, 0.0, 0}; }
  static JumpPolicy prefer_jump() { return {Kind::PreferJump, 1.0, 0}; }
  static JumpPolicy randomized(double p, std::uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("jump probability must lie in [0, 1]");
    return {Kind::Randomized, p, seed};
  }

  bool choose_jump(long k, int j) const {
    switch (kind) {
      case Kind::PreferFlow: return false;
      case Kind::PreferJump: return true;
      case Kind::Randomized: {
        auto rng = make_stream(seed, StreamTag::Policy, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(j));
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
      }
    }
    return false;
  }

  std::string label() const {
    switch (kind) {
      case Kind::PreferFlow: return "prefer-flow";
      case Kind::PreferJump: return "prefer-jump";
      case Kind::Randomized: return "randomized";
    }
    return "";
  }
};

/// Stops at the first of max_k flow steps, max_j jumps, or tau_k + j >= max_length.
struct Horizon {
  long max_k = 1000;
  int max_j = 1'000'000;
  double max_length = std::numeric_limits<double>::infinity();
};

enum class RunStatus { Completed, Escaped, NonFinite };

inline std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Completed: return "completed";
    case RunStatus::Escaped: return "escaped";
    case RunStatus::NonFinite: return "non-finite";
  }
  return "";
}

template <class S>
struct SimulationOptions {
  using State = BasicVector<S>;

  /// States within this distance of C (resp. D) still flow (resp. jump).
  double guard_eps = 0.0;
  /// Deterministic perturbation h * gamma(|x|) * unit added to the flow direction.
  std::function<double(double)> perturbation_gamma;
  Vector perturbation_unit;
  /// Flow noise v_{k+1} given (k, x, f_k, h_{k+1}).
  std::function<State(long, const State&, const State&, const S&)> flow_noise;
  /// Realised jump outcome given (j, x, g_j); defaults to g_j.
  std::function<State(int, const State&, const State&)> jump_outcome;
};

template <class S>
struct SimulationResult {
  using State = BasicVector<S>;
  using Step = HybridSequenceDomain::Step;

  std::vector<Step> steps;    // staircase order
  std::vector<State> states;  // phi at each step
  std::vector<State> fhat;    // fhat[k] = realised direction fhat_{k+1}
  std::vector<State> fsel;    // fsel[k] = selected f_k in F(phi(k, jbar_k))
  std::vector<State> ghat;    // ghat[j] = phi(kbar_j, j + 1)
  std::vector<State> gsel;    // gsel[j] = selected g_j in G(phi(kbar_j, j))
  std::vector<int> jbar;      // jbar[k] = inf{j : (k + 1, j) in dom}
  std::vector<long> kbar;     // kbar[j] = inf{k : (k, j + 1) in dom}
  std::vector<S> h;           // h[k] = h_{k+1}
  std::vector<S> tau;         // tau[k] = tau_k, k = 0..K
  StepSchedule schedule = StepSchedule::constant(1.0);
  std::string policy;
  bool bounded_observed = true;
  bool complete_in_k = false;
  bool complete_in_j = false;
  RunStatus status = RunStatus::Completed;
  std::string message;

  long K() const { return static_cast<long>(fhat.size()); }
  std::size_t dim() const { return states.front().size(); }
  int J() const { return static_cast<int>(ghat.size()); }

  HybridSequenceDomain domain() const { return HybridSequenceDomain(steps); }

  std::optional<std::size_t> index_of(long k, int j) const {
    const auto it = std::lower_bound(steps.begin(), steps.end(), Step{k, j}, [](const Step& a, const Step& b) {
      return a.k + a.j != b.k + b.j ? a.k + a.j < b.k + b.j : a.j < b.j;
    });
    if (it == steps.end() || *it != Step{k, j}) return std::nullopt;
    return static_cast<std::size_t>(it - steps.begin());
  }

  const State& at(long k, int j) const {
    const auto i = index_of(k, j);
    if (!i) throw DomainError("(" + std::to_string(k) + ", " + std::to_string(j) + ") is not in the sequence domain");
    return states[*i];
  }

  const State& final_state() const { return states.back(); }
};

/// Simulates phi(k + 1, j) = phi(k, j) + h_{k+1} fhat_{k+1} on flows and
/// phi(k, j + 1) = jump outcome on jumps. On C cap D the policy decides.
/// Leaving C + eps B and D + eps B ends the run with status Escaped and the
/// partial result; a non-finite state ends it with status NonFinite.
template <class S>
SimulationResult<S> euler_simulate(const SimulationModel<S>& model, BasicVector<S> x0, const StepSchedule& schedule,
                                   const JumpPolicy& policy, const Horizon& horizon,
                                   const SimulationOptions<S>& options = {}) {
  using State = BasicVector<S>;
  if (x0.size() != model.dim) throw std::invalid_argument("initial state has the wrong dimension");
  if (horizon.max_k < 0 || horizon.max_j < 0) throw std::invalid_argument("horizon bounds must be nonnegative");
  SimulationResult<S> r;
  r.schedule = schedule;
  r.policy = policy.label();
  r.steps.push_back({0, 0});
  r.states.push_back(x0);
  r.tau.push_back(S(0));
  State x = std::move(x0);
  long k = 0;
  int j = 0;
  while (true) {
    if (k >= horizon.max_k) {
      r.complete_in_k = true;
      break;
    }
    if (j >= horizon.max_j) {
      r.complete_in_j = true;
      break;
    }
    if (static_cast<double>(r.tau.back()) + j >= horizon.max_length) break;
    bool in_c = model.in_flow(x);
    bool in_d = model.in_jump(x);
    if (!in_c && !in_d && options.guard_eps > 0.0) {
      in_c = model.flow_distance && model.flow_distance(x) <= options.guard_eps;
      in_d = !in_c && model.jump_distance && model.jump_distance(x) <= options.guard_eps;
    }
    if (!in_c && !in_d) {
      r.status = RunStatus::Escaped;
      r.message = "state left C and D (guard eps = " + std::to_string(options.guard_eps) + ") at (k, j) = (" +
                  std::to_string(k) + ", " + std::to_string(j) + ")";
      break;
    }
    const bool jump = in_d && (!in_c || policy.choose_jump(k, j));
    if (jump) {
      State g = model.jump_selection(x, j);
      State out = options.jump_outcome ? options.jump_outcome(j, x, g) : g;
      r.gsel.push_back(std::move(g));
      r.ghat.push_back(out);
      r.kbar.push_back(k);
      x = std::move(out);
      ++j;
    } else {
      const S hk = schedule.h<S>(k + 1);
      State f = model.flow_selection(x, hk);
      State dir = f;
      if (options.perturbation_gamma) {
        const double mag = static_cast<double>(hk) * options.perturbation_gamma(static_cast<double>(linalg::norm(x)));
        for (std::size_t i = 0; i < dir.size(); ++i) dir[i] += S(mag * options.perturbation_unit.at(i));
      }
      if (options.flow_noise) {
        const State v = options.flow_noise(k, x, f, hk);
        for (std::size_t i = 0; i < dir.size(); ++i) dir[i] += v[i];
      }
      x = linalg::axpy(x, hk, dir);
      r.fsel.push_back(std::move(f));
      r.fhat.push_back(std::move(dir));
      r.jbar.push_back(j);
      r.h.push_back(hk);
      r.tau.push_back(r.tau.back() + hk);
      ++k;
    }
    r.steps.push_back({k, j});
    r.states.push_back(x);
    if (!linalg::all_finite(x)) {
      r.status = RunStatus::NonFinite;
      r.bounded_observed = false;
      r.message = "non-finite state at (k, j) = (" + std::to_string(k) + ", " + std::to_string(j) + ")";
      break;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Window statistic

/// sup_{k+1 <= n <= m(tau_k + T)} |sum_{i=k}^{n-1} h_{i+1} (fhat_{i+1} - f_i)|.
template <class S>
double benaim_sup(const SimulationResult<S>& r, double T, long k) {
  if (!(T > 0.0)) throw std::invalid_argument("window length T must be positive");
  if (k < 0 || k >= r.K()) throw HorizonError("k = " + std::to_string(k) + " outside the recorded flow steps");
  const double limit = static_cast<double>(r.tau[static_cast<std::size_t>(k)]) + T;
  if (!(static_cast<double>(r.tau.back()) > limit))
    throw HorizonError("run too short: tau_K = " + std::to_string(static_cast<double>(r.tau.back())) +
                       " does not exceed tau_k + T = " + std::to_string(limit));
  const std::size_t d = r.fhat.front().size();
  std::vector<double> acc(d, 0.0);
  double sup = 0.0;
  for (long i = k; i < r.K(); ++i) {
    // n = i + 1 is admissible while tau_{n} <= tau_k + T.
    if (!(static_cast<double>(r.tau[static_cast<std::size_t>(i + 1)]) <= limit)) break;
    const auto& fh = r.fhat[static_cast<std::size_t>(i)];
    const auto& fs = r.fsel[static_cast<std::size_t>(i)];
    const double hi = static_cast<double>(r.h[static_cast<std::size_t>(i)]);
    double n2 = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      acc[c] += hi * static_cast<double>(fh[c] - fs[c]);
      n2 += acc[c] * acc[c];
    }
    sup = std::max(sup, std::sqrt(n2));
  }
  return sup;
}

template <class S>
std::vector<double> benaim_series(const SimulationResult<S>& r, double T, const std::vector<long>& ks) {
  std::vector<double> out;
  out.reserve(ks.size());
  for (long k : ks) out.push_back(benaim_sup(r, T, k));
  return out;
}

// ---------------------------------------------------------------------------
// Compression, interpolation, correction integrals

/// phi~(tau_k, j) = phi(k, j) on the compressed domain of points (tau_k, j).
template <class S>
HybridMapping compress(const SimulationResult<S>& r) {
  std::vector<GraphPoint> pts;
  pts.reserve(r.steps.size());
  for (std::size_t i = 0; i < r.steps.size(); ++i)
    pts.push_back({static_cast<double>(r.tau[static_cast<std::size_t>(r.steps[i].k)]), r.steps[i].j,
                   linalg::convert<double>(r.states[i])});
  return HybridMapping(std::move(pts));
}

/// psi: linear in t between (tau_k, phi(k, j)) and (tau_{k+1}, phi(k + 1, j)),
/// with the jumps of phi copied. Samples sit exactly at tau_k.
template <class S>
HybridArc interpolate(const SimulationResult<S>& r) {
  std::vector<HybridArc::Piece> pieces(static_cast<std::size_t>(r.J() + 1));
  for (std::size_t i = 0; i < r.steps.size(); ++i) {
    auto& p = pieces[static_cast<std::size_t>(r.steps[i].j)];
    p.t.push_back(static_cast<double>(r.tau[static_cast<std::size_t>(r.steps[i].k)]));
    p.x.push_back(linalg::convert<double>(r.states[i]));
  }
  return HybridArc::from_pieces(std::move(pieces));
}

/// Flow-time intervals [tau_{k_start(j)}, tau_{k_end(j)}] of the interpolated domain.
template <class S>
HybridTimeDomain interpolated_domain(const SimulationResult<S>& r) {
  std::vector<TimeInterval> iv;
  long start = 0;
  for (int j = 0; j <= r.J(); ++j) {
    const long end = j < r.J() ? r.kbar[static_cast<std::size_t>(j)] : r.K();
    iv.push_back({static_cast<double>(r.tau[static_cast<std::size_t>(start)]),
                  static_cast<double>(r.tau[static_cast<std::size_t>(end)]), j});
    start = end;
  }
  return HybridTimeDomain(std::move(iv));
}

/// chi(s, i, t, j) = integral_s^t U with U = f_k - fhat_{k+1} on [tau_k, tau_{k+1}),
/// evaluated as an exact sum over the constant pieces.
template <class S>
Vector chi_correction(const SimulationResult<S>& r, double s, int i, double t, int j) {
  const auto dom = interpolated_domain(r);
  if (!dom.contains({s, i}) || !dom.contains({t, j}))
    throw DomainError("chi arguments are not in the interpolated domain");
  if (s + i > t + j || s > t) throw DomainError("chi needs (s, i) to precede (t, j)");
  const std::size_t d = r.dim();
  Vector out(d, 0.0);
  std::vector<double> tau(r.tau.size());
  for (std::size_t k = 0; k < tau.size(); ++k) tau[k] = static_cast<double>(r.tau[k]);
  auto k0 = static_cast<long>(std::upper_bound(tau.begin(), tau.end(), s) - tau.begin()) - 1;
  for (long k = std::max<long>(k0, 0); k < r.K(); ++k) {
    const double a = std::max(s, tau[static_cast<std::size_t>(k)]);
    const double b = std::min(t, tau[static_cast<std::size_t>(k + 1)]);
    if (tau[static_cast<std::size_t>(k)] >= t) break;
    if (b <= a) continue;
    const auto& f = r.fsel[static_cast<std::size_t>(k)];
    const auto& fh = r.fhat[static_cast<std::size_t>(k)];
    for (std::size_t c = 0; c < d; ++c) out[c] += (b - a) * static_cast<double>(f[c] - fh[c]);
  }
  return out;
}

/// Largest |chi| over windows of length T starting at each listed flow index.
template <class S>
std::vector<double> chi_tail_sup(const SimulationResult<S>& r, double T, const std::vector<long>& starts) {
  std::vector<double> out;
  for (long k : starts) {
    const double s = static_cast<double>(r.tau.at(static_cast<std::size_t>(k)));
    const int i = r.jbar.at(static_cast<std::size_t>(k));
    double sup = 0.0;
    for (long n = k + 1; n <= r.K(); ++n) {
      const double t = static_cast<double>(r.tau[static_cast<std::size_t>(n)]);
      if (t > s + T) break;
      sup = std::max(sup, linalg::norm(chi_correction(r, s, i, t, r.jbar[static_cast<std::size_t>(n - 1)])));
    }
    out.push_back(sup);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gap scan

struct GapReport {
  double largest_gap = 0.0;  // largest distance between consecutive lengths past the threshold
  double gap_start = 0.0;    // length at which it begins
  bool has_gap = false;      // some window [T, T + 1 + eps) holds no domain point
  bool finite_domain = true; // the domain ends, leaving an infinite gap after end_length
  double end_length = 0.0;
};

/// Scans sorted lengths t + j of domain points.
inline GapReport gap_scan(std::vector<double> lengths, double eps, double start_threshold = 0.0,
                          bool finite_domain = true) {
  if (!(eps > 0.0)) throw std::invalid_argument("gap_scan needs eps > 0");
  std::sort(lengths.begin(), lengths.end());
  GapReport rep;
  rep.finite_domain = finite_domain;
  rep.end_length = lengths.empty() ? 0.0 : lengths.back();
  for (std::size_t i = 1; i < lengths.size(); ++i) {
    if (lengths[i] < start_threshold) continue;
    const double g = lengths[i] - lengths[i - 1];
    if (g > rep.largest_gap) {
      rep.largest_gap = g;
      rep.gap_start = lengths[i - 1];
    }
  }
  rep.has_gap = rep.largest_gap > 1.0 + eps || finite_domain;
  return rep;
}

template <class S>
GapReport gap_scan(const SimulationResult<S>& r, double eps, double start_threshold = 0.0) {
  std::vector<double> lengths;
  lengths.reserve(r.steps.size());
  for (const auto& st : r.steps) lengths.push_back(static_cast<double>(r.tau[static_cast<std::size_t>(st.k)]) + st.j);
  return gap_scan(std::move(lengths), eps, start_threshold, true);
}

/// Interval domains have no interior gaps; only the end of a bounded domain shows up.
inline GapReport gap_scan(const HybridTimeDomain& dom, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("gap_scan needs eps > 0");
  GapReport rep;
  rep.finite_domain = !dom.unbounded();
  rep.end_length = dom.length();
  rep.largest_gap = dom.last_j() > 0 ? 1.0 : 0.0;
  rep.has_gap = rep.finite_domain;
  return rep;
}

// ---------------------------------------------------------------------------
// Reference solutions

struct SolveOptions {
  double dt = 1e-3;  // integration and sampling step
  double max_length = 10.0;
  int max_j = 10'000;
  JumpPolicy policy = JumpPolicy::prefer_jump();
  std::size_t selection_index = 0;  // which of F(x).selections() / G(x).selections() to follow
};

/// A solution of the hybrid inclusion sampled every dt: closed-form flow when
/// the system provides one, else fine Euler steps along the chosen selection.
/// Exits from C are located by bisection on the last step.
inline HybridArc solve(const HybridSystem& sys, const Vector& x0, const SolveOptions& opt = {}) {
  if (!(opt.dt > 0.0) || opt.max_length < 0.0) throw std::invalid_argument("solve needs dt > 0 and max_length >= 0");
  auto pick = [&](const SetValuedMap& m, const Vector& x) {
    if (opt.selection_index == 0) return m.selection(x);
    const auto sel = m.selections(x);
    if (sel.empty()) throw MapError("empty value set");
    return sel[opt.selection_index % sel.size()];
  };
  auto advance = [&](const Vector& x, double dt) {
    if (sys.exact_flow) return sys.exact_flow(x, dt);
    return linalg::axpy(x, dt, pick(sys.flow_map, x));
  };
  std::vector<HybridArc::Piece> pieces(1);
  pieces[0].t.push_back(0.0);
  pieces[0].x.push_back(x0);
  Vector x = x0;
  double t = 0.0;
  int j = 0;
  long guard = 0;
  while (t + j < opt.max_length && j < opt.max_j) {
    if (++guard > 100'000'000) break;
    const bool in_c = sys.flow_set.contains(x);
    const bool in_d = sys.jump_set.contains(x);
    if (!in_c && !in_d) break;
    bool jump = in_d && (!in_c || opt.policy.choose_jump(static_cast<long>(t / opt.dt), j));
    if (!jump) {
      double dt = std::min(opt.dt, opt.max_length - (t + j));
      Vector next = advance(x, dt);
      if (!sys.flow_set.contains(next)) {
        // Bisect for the last time the flow stays in C.
        double lo = 0.0;
        double hi = dt;
        for (int it = 0; it < 60; ++it) {
          const double mid = 0.5 * (lo + hi);
          if (sys.flow_set.contains(advance(x, mid))) lo = mid;
          else hi = mid;
        }
        if (lo <= 0.0) {
          if (in_d) jump = true;
          else break;
        } else {
          dt = lo;
          next = advance(x, dt);
        }
      }
      if (!jump) {
        t += dt;
        x = std::move(next);
        if (!linalg::all_finite(x)) break;
        pieces.back().t.push_back(t);
        pieces.back().x.push_back(x);
        continue;
      }
    }
    x = pick(sys.jump_map, x);
    ++j;
    HybridArc::Piece p;
    p.t.push_back(t);
    p.x.push_back(x);
    pieces.push_back(std::move(p));
  }
  return HybridArc::from_pieces(std::move(pieces));
}

}  // namespace hybridsa
