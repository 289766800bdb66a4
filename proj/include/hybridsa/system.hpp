#pragma once

// Hybrid inclusion data (C, F, D, G): set-valued maps, inflation, restriction,
// solution checks, the dwell-time automaton and basic-condition spot checks.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hybridsa/hybrid_time.hpp"
#include "hybridsa/linalg.hpp"
#include "hybridsa/sets.hpp"

namespace hybridsa {

class MapError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class SetValuedMap {
 public:
  using Evaluate = std::function<ValueSet(const Vector&)>;
  using Select = std::function<Vector(const Vector&)>;

  SetValuedMap() = default;
  explicit SetValuedMap(Evaluate evaluate, Select select = {})
      : evaluate_(std::move(evaluate)), select_(std::move(select)) {}

  /// Single-valued map x -> {f(x)}.
  static SetValuedMap function(std::function<Vector(const Vector&)> f) {
    return SetValuedMap([f](const Vector& x) { return ValueSet::singleton(f(x)); }, f);
  }

  explicit operator bool() const { return static_cast<bool>(evaluate_); }

  ValueSet evaluate(const Vector& x) const { return evaluate_(x); }

  Vector selection(const Vector& x) const {
    if (select_) return select_(x);
    const ValueSet v = evaluate_(x);
    if (v.is_empty()) throw MapError("empty value set at the queried state");
    return v.selection();
  }

  std::vector<Vector> selections(const Vector& x) const {
    std::vector<Vector> out = evaluate_(x).selections();
    if (select_) out.insert(out.begin(), select_(x));
    return out;
  }

 private:
  Evaluate evaluate_;
  Select select_;
};

struct HybridSystem {
  std::size_t dim = 0;
  SetRegion flow_set;
  SetValuedMap flow_map;
  SetRegion jump_set;
  SetValuedMap jump_map;
  std::string name = "system";
  /// Optional closed-form flow x -> phi(t) for single-valued F, valid while in C.
  std::function<Vector(const Vector&, double)> exact_flow;
  /// Optional region onto which noisy jump outcomes are projected.
  std::optional<SetRegion> post_jump_region;
};

namespace detail {

/// Points of x + eps B on a grid of spacing eps / 4 (random fill beyond 3 dimensions).
inline std::vector<Vector> ball_probes(const Vector& x, double eps) {
  std::vector<Vector> out{x};
  if (eps <= 0.0) return out;
  const std::size_t d = x.size();
  if (d <= 3) {
    const int n = 4;
    std::vector<int> idx(d, -n);
    while (true) {
      Vector p = x;
      double r2 = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double off = eps * idx[c] / n;
        p[c] += off;
        r2 += off * off;
      }
      if (r2 <= eps * eps * (1.0 + 1e-12) && p != x) out.push_back(std::move(p));
      std::size_t c = 0;
      while (c < d && ++idx[c] > n) idx[c++] = -n;
      if (c == d) break;
    }
  } else {
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> g(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 512; ++i) {
      Vector dir(d);
      for (auto& v : dir) v = g(rng);
      const double r = eps * std::pow(u(rng), 1.0 / static_cast<double>(d)) / linalg::norm(dir);
      out.push_back(linalg::axpy(x, r, dir));
    }
  }
  return out;
}

}  // namespace detail

/// The eps-inflated data C + eps B, co F((x + eps B) cap C) + eps B,
/// D + eps B, G((x + eps B) cap D) + eps B. Value sets are built from a
/// finite probe net, so they under-approximate the true inflation.
class InflatedSystem {
 public:
  InflatedSystem(HybridSystem base, double eps) : base_(std::move(base)), eps_(eps) {
    if (eps < 0.0) throw std::invalid_argument("inflation radius must be nonnegative");
  }

  const HybridSystem& base() const { return base_; }
  double eps() const { return eps_; }

  bool in_flow_set(const Vector& x) const { return base_.flow_set.contains(x, eps_); }
  bool in_jump_set(const Vector& x) const { return base_.jump_set.contains(x, eps_); }

  ValueSet flow_value(const Vector& x) const {
    if (eps_ == 0.0) return base_.flow_set.contains(x) ? base_.flow_map.evaluate(x) : ValueSet::empty();
    std::vector<Vector> gens;
    double r = 0.0;
    for (const auto& p : detail::ball_probes(x, eps_)) {
      if (!base_.flow_set.contains(p)) continue;
      const ValueSet v = base_.flow_map.evaluate(p);
      gens.insert(gens.end(), v.generators().begin(), v.generators().end());
      r = std::max(r, v.radius());
    }
    if (gens.empty()) return ValueSet::empty();
    return ValueSet::hull(std::move(gens), r + eps_);
  }

  ValueSet jump_value(const Vector& x) const {
    if (eps_ == 0.0) return base_.jump_set.contains(x) ? base_.jump_map.evaluate(x) : ValueSet::empty();
    std::vector<Vector> gens;
    double r = 0.0;
    for (const auto& p : detail::ball_probes(x, eps_)) {
      if (!base_.jump_set.contains(p)) continue;
      const ValueSet v = base_.jump_map.evaluate(p);
      gens.insert(gens.end(), v.generators().begin(), v.generators().end());
      r = std::max(r, v.radius());
    }
    if (gens.empty()) return ValueSet::empty();
    return ValueSet::points(std::move(gens), r + eps_);
  }

 private:
  HybridSystem base_;
  double eps_;
};

inline InflatedSystem inflate(const HybridSystem& system, double eps) { return InflatedSystem(system, eps); }

struct Restriction {
  HybridSystem system;
  std::vector<std::string> warnings;
};

/// (C cap K, F, D cap K, G^K) with G^K(x) = G(x) cap K. Generators of G(x)
/// outside K are dropped; probes of D cap K where nothing survives are
/// reported as warnings.
inline Restriction restrict(const HybridSystem& system, const SetRegion& K, const std::vector<Vector>& probes = {}) {
  Restriction out;
  out.system = system;
  out.system.flow_set = regions::intersection(system.flow_set, K);
  out.system.jump_set = regions::intersection(system.jump_set, K);
  const SetValuedMap g = system.jump_map;
  auto restricted = [g, K](const Vector& x) {
    const ValueSet v = g.evaluate(x);
    std::vector<Vector> kept;
    for (const auto& p : v.generators())
      if (K.contains(p)) kept.push_back(p);
    if (kept.empty()) return ValueSet::empty();
    if (v.is_convex()) return ValueSet::hull(std::move(kept), 0.0);
    return ValueSet::points(std::move(kept), 0.0);
  };
  out.system.jump_map = SetValuedMap(restricted);
  out.system.name = system.name + "|K";
  for (const auto& p : probes) {
    if (!out.system.jump_set.contains(p)) continue;
    if (restricted(p).is_empty()) {
      std::string s = "G^K empty at probe (";
      for (std::size_t i = 0; i < p.size(); ++i) s += (i ? ", " : "") + std::to_string(p[i]);
      out.warnings.push_back(s + ")");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Solution verification

struct FlowCheck {
  int j = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  double derivative_distance = 0.0;  // max over sample gaps
  double flow_set_distance = 0.0;    // max over samples
  std::optional<GraphPoint> witness;
};

struct JumpCheck {
  int j = 0;  // jump from j to j + 1
  double t = 0.0;
  double jump_set_distance = 0.0;
  double jump_value_distance = 0.0;
};

struct SolutionReport {
  bool pass = true;
  double worst = 0.0;
  std::vector<FlowCheck> flows;
  std::vector<JumpCheck> jumps;
  std::optional<GraphPoint> witness;
  std::string message;
};

/// Checks an arc against the flow and jump conditions. On each sample gap the
/// finite-difference slope is compared with F at the left, middle and right
/// states (the smallest distance counts), so Euler and exact-flow samples
/// both pass up to their discretisation error.
inline SolutionReport verify_solution(const HybridArc& arc, const HybridSystem& system, double tol) {
  if (tol < 0.0) throw std::invalid_argument("tolerance must be nonnegative");
  if (arc.empty()) throw DomainError("cannot verify an empty arc");
  if (arc.dim() != system.dim) throw DomainError("arc dimension does not match the system");
  SolutionReport rep;
  const auto dom = arc.domain();
  const auto rows = arc.samples();
  auto note = [&](double d, const GraphPoint& p, const std::string& what) {
    if (d > rep.worst) rep.worst = d;
    if (d > tol && rep.pass) {
      rep.pass = false;
      rep.witness = p;
      rep.message = what + " at (t, j) = (" + std::to_string(p.t) + ", " + std::to_string(p.j) + ")";
    }
  };
  std::size_t r = 0;
  for (const auto& iv : dom.intervals()) {
    std::size_t begin = r;
    while (r < rows.size() && rows[r].j == iv.j) ++r;
    if (iv.t_end <= iv.t_start) continue;
    FlowCheck fc{iv.j, iv.t_start, iv.t_end, 0.0, 0.0, std::nullopt};
    for (std::size_t i = begin; i < r; ++i) {
      const double dc = system.flow_set.distance(rows[i].x);
      fc.flow_set_distance = std::max(fc.flow_set_distance, dc);
      note(dc, rows[i], "state outside C");
      if (i + 1 < r) {
        const auto& a = rows[i];
        const auto& b = rows[i + 1];
        const double dt = b.t - a.t;
        Vector slope = linalg::sub(b.x, a.x);
        for (auto& v : slope) v /= dt;
        const Vector mid = linalg::axpy(a.x, 0.5, linalg::sub(b.x, a.x));
        double d = std::numeric_limits<double>::infinity();
        for (const Vector* s : {&a.x, &mid, &b.x}) {
          const ValueSet v = system.flow_map.evaluate(*s);
          if (!v.is_empty()) d = std::min(d, v.distance(slope));
        }
        if (d > fc.derivative_distance) {
          fc.derivative_distance = d;
          if (d > tol) fc.witness = a;
        }
        note(d, a, "derivative outside F");
      }
    }
    rep.flows.push_back(fc);
  }
  const auto& pieces = dom.intervals();
  for (std::size_t p = 0; p + 1 < pieces.size(); ++p) {
    const Vector before = arc.value({pieces[p].t_end, static_cast<int>(p)});
    const Vector after = arc.value({pieces[p].t_end, static_cast<int>(p) + 1});
    JumpCheck jc{static_cast<int>(p), pieces[p].t_end, system.jump_set.distance(before), 0.0};
    const ValueSet g = system.jump_map.evaluate(before);
    jc.jump_value_distance = g.is_empty() ? std::numeric_limits<double>::infinity() : g.distance(after);
    const GraphPoint at{pieces[p].t_end, static_cast<int>(p), before};
    note(jc.jump_set_distance, at, "jump from outside D");
    note(jc.jump_value_distance, at, "jump value outside G");
    rep.jumps.push_back(jc);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Dwell-time automaton

/// tau in [0, N], tau' in [0, delta]; tau in [1, N], tau+ = tau - 1.
inline HybridSystem dwell_automaton(int N, double delta) {
  if (N < 1 || !(delta > 0.0)) throw std::invalid_argument("dwell automaton needs N >= 1 and delta > 0");
  HybridSystem s;
  s.dim = 1;
  s.name = "dwell(" + std::to_string(N) + "," + std::to_string(delta) + ")";
  s.flow_set = regions::box({0.0}, {static_cast<double>(N)});
  s.flow_map = SetValuedMap([delta](const Vector&) { return ValueSet::hull({{0.0}, {delta}}); },
                            [delta](const Vector&) { return Vector{delta}; });
  s.jump_set = regions::box({1.0}, {static_cast<double>(N)});
  s.jump_map = SetValuedMap::function([](const Vector& x) { return Vector{x[0] - 1.0}; });
  return s;
}

struct DwellReport {
  bool admissible = true;
  double worst_excess = -std::numeric_limits<double>::infinity();  // max of (j - i) - delta (t - s) - N
  std::optional<std::pair<HybridTime, HybridTime>> witness;
};

/// j - i <= delta (t - s) + N for every ordered pair of domain points.
/// Linear time: keeps the running minimum of i - delta s over earlier points.
inline DwellReport dwell_check(const std::vector<HybridTime>& points, int N, double delta, double tol = 0.0) {
  DwellReport rep;
  double best = std::numeric_limits<double>::infinity();
  HybridTime best_at{};
  for (const auto& p : points) {
    const double v = p.j - delta * p.t;
    if (v < best) {
      best = v;
      best_at = p;
    }
    const double excess = v - best - N;
    if (excess > rep.worst_excess) rep.worst_excess = excess;
    if (excess > tol && rep.admissible) {
      rep.admissible = false;
      rep.witness = std::make_pair(best_at, p);
    }
  }
  return rep;
}

inline bool dwell_admissible(const HybridTime& from, const HybridTime& to, int N, double delta, double tol = 0.0) {
  return (to.j - from.j) <= delta * (to.t - from.t) + N + tol;
}

// ---------------------------------------------------------------------------
// Basic-condition spot checks

struct HbcProbe {
  Vector x;
  bool in_flow_set = false;
  bool in_jump_set = false;
  bool flow_nonempty = true;
  bool flow_convex = true;
  bool jump_nonempty = true;
  double value_bound = 0.0;  // max |v| over generators + radius
};

struct HbcReport {
  bool pass = true;
  std::vector<HbcProbe> probes;
  std::vector<std::string> failures;
  double local_bound = 0.0;
};

/// Nonemptiness and convexity of F on C, nonemptiness of G on D, and a
/// finite bound on the values at each probe. Closedness and outer
/// semicontinuity cannot be decided from finitely many probes.
inline HbcReport check_hbc(const HybridSystem& system, const std::vector<Vector>& probes) {
  HbcReport rep;
  auto bound_of = [](const ValueSet& v) {
    double b = 0.0;
    for (const auto& g : v.generators()) b = std::max(b, linalg::norm(g));
    return b + v.radius();
  };
  auto fail = [&](const Vector& x, const std::string& what) {
    rep.pass = false;
    std::string s = what + " at (";
    for (std::size_t i = 0; i < x.size(); ++i) s += (i ? ", " : "") + std::to_string(x[i]);
    rep.failures.push_back(s + ")");
  };
  for (const auto& x : probes) {
    HbcProbe p;
    p.x = x;
    p.in_flow_set = system.flow_set.contains(x);
    p.in_jump_set = system.jump_set.contains(x);
    if (p.in_flow_set) {
      const ValueSet f = system.flow_map.evaluate(x);
      p.flow_nonempty = !f.is_empty();
      p.flow_convex = f.is_convex();
      if (!p.flow_nonempty) fail(x, "F empty");
      else if (!p.flow_convex) fail(x, "F not convex");
      if (p.flow_nonempty) p.value_bound = std::max(p.value_bound, bound_of(f));
    }
    if (p.in_jump_set) {
      const ValueSet g = system.jump_map.evaluate(x);
      p.jump_nonempty = !g.is_empty();
      if (!p.jump_nonempty) fail(x, "G empty");
      else p.value_bound = std::max(p.value_bound, bound_of(g));
    }
    if (!std::isfinite(p.value_bound)) fail(x, "unbounded value");
    rep.local_bound = std::max(rep.local_bound, p.value_bound);
    rep.probes.push_back(std::move(p));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Products

namespace detail {

inline ValueSet product_values(const ValueSet& a, const ValueSet& b) {
  if (a.is_empty() || b.is_empty()) return ValueSet::empty();
  std::vector<Vector> gens;
  for (const auto& p : a.generators())
    for (const auto& q : b.generators()) {
      Vector v = p;
      v.insert(v.end(), q.begin(), q.end());
      gens.push_back(std::move(v));
    }
  const double r = std::hypot(a.radius(), b.radius());
  if (a.is_convex() && b.is_convex()) return ValueSet::hull(std::move(gens), r);
  return ValueSet::points(std::move(gens), r);
}

}  // namespace detail

/// Runs two systems side by side: both components flow on C1 x C2; a jump
/// happens when either component is in its jump set, and only that component jumps.
inline HybridSystem product(const HybridSystem& a, const HybridSystem& b) {
  const std::size_t da = a.dim;
  auto split = [da](const Vector& x) {
    return std::pair<Vector, Vector>(Vector(x.begin(), x.begin() + static_cast<long>(da)),
                                     Vector(x.begin() + static_cast<long>(da), x.end()));
  };
  auto join = [](Vector p, const Vector& q) {
    p.insert(p.end(), q.begin(), q.end());
    return p;
  };
  HybridSystem s;
  s.dim = a.dim + b.dim;
  s.name = a.name + " x " + b.name;
  s.flow_set = regions::product(a.flow_set, b.flow_set);
  s.flow_map = SetValuedMap(
      [a, b, split](const Vector& x) {
        auto [xa, xb] = split(x);
        return detail::product_values(a.flow_map.evaluate(xa), b.flow_map.evaluate(xb));
      },
      [a, b, split, join](const Vector& x) {
        auto [xa, xb] = split(x);
        return join(a.flow_map.selection(xa), b.flow_map.selection(xb));
      });
  const SetRegion ja = a.jump_set;
  const SetRegion jb = b.jump_set;
  s.jump_set = SetRegion(s.dim, [ja, jb, split](const Vector& x) {
    auto [xa, xb] = split(x);
    return ja.contains(xa) || jb.contains(xb);
  });
  s.jump_map = SetValuedMap(
      [a, b, split](const Vector& x) {
        auto [xa, xb] = split(x);
        const ValueSet va = a.jump_set.contains(xa) ? a.jump_map.evaluate(xa) : ValueSet::singleton(xa);
        const ValueSet vb = b.jump_set.contains(xb) ? b.jump_map.evaluate(xb) : ValueSet::singleton(xb);
        return detail::product_values(va, vb);
      },
      [a, b, split, join](const Vector& x) {
        auto [xa, xb] = split(x);
        return join(a.jump_set.contains(xa) ? a.jump_map.selection(xa) : xa,
                    b.jump_set.contains(xb) ? b.jump_map.selection(xb) : xb);
      });
  if (a.exact_flow && b.exact_flow) {
    s.exact_flow = [a, b, split, join](const Vector& x, double t) {
      auto [xa, xb] = split(x);
      return join(a.exact_flow(xa, t), b.exact_flow(xb, t));
    };
  }
  return s;
}

}  // namespace hybridsa
