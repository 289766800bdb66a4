#pragma once

// Concrete systems with known limiting behaviour: the cubic flow with and
// without a saturating reset, a rotation, linear decay, a two-well gradient
// flow, the dwell-time timer, projected random-search annealing, and the
// shrinking sine band.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hybridsa/hybrid_time.hpp"
#include "hybridsa/linalg.hpp"
#include "hybridsa/rng.hpp"
#include "hybridsa/sets.hpp"
#include "hybridsa/simulate.hpp"
#include "hybridsa/system.hpp"

namespace hybridsa {

/// A system together with the simulator's selections and a default initial state.
struct Preset {
  std::string name;
  HybridSystem system;
  SimulationModel<double> model;
  JumpPolicy policy = JumpPolicy::prefer_jump();
  Vector x0;
};

namespace detail {

inline SetRegion empty_region(std::size_t dim) {
  return SetRegion(dim, [](const Vector&) { return false; }, {}, std::nullopt, "empty");
}

inline Preset from_system(std::string name, HybridSystem sys, Vector x0, JumpPolicy policy = JumpPolicy::prefer_jump()) {
  Preset p;
  p.name = std::move(name);
  p.model = make_model(sys);
  p.system = std::move(sys);
  p.policy = policy;
  p.x0 = std::move(x0);
  return p;
}

template <class S>
S signum(const S& v) {
  return v > S(0) ? S(1) : (v < S(0) ? S(-1) : S(0));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Cubic flow

/// z' = -z^3 on R with no jumps.
inline HybridSystem cubic_system() {
  HybridSystem s;
  s.dim = 1;
  s.name = "cubic";
  s.flow_set = regions::everything(1);
  s.flow_map = SetValuedMap::function([](const Vector& x) { return Vector{-x[0] * x[0] * x[0]}; });
  s.jump_set = detail::empty_region(1);
  s.jump_map = SetValuedMap::function([](const Vector& x) { return x; });
  s.exact_flow = [](const Vector& x, double t) { return Vector{x[0] / std::sqrt(1.0 + 2.0 * x[0] * x[0] * t)}; };
  return s;
}

/// The cubic flow over any scalar type (used for extended-range runs).
template <class S>
SimulationModel<S> cubic_model() {
  SimulationModel<S> m;
  m.dim = 1;
  m.name = "cubic";
  m.in_flow = [](const BasicVector<S>&) { return true; };
  m.in_jump = [](const BasicVector<S>&) { return false; };
  m.flow_selection = [](const BasicVector<S>& x, const S&) { return BasicVector<S>{-(x[0] * x[0] * x[0])}; };
  m.jump_selection = [](const BasicVector<S>& x, int) { return x; };
  return m;
}

/// State (z, tau): flow z' = -z^3, tau' = delta on R x [0, N]; jump on
/// R x [N, inf) to (z, 0). The simulator jumps with the saturated reset
/// (sgn(z) min(|z|, c), 0). N = delta = 1 gives the unit timer.
inline Preset cubic_reset(double c, int N = 1, double delta = 1.0) {
  if (!(c > 0.0) || N < 1 || !(delta > 0.0)) throw std::invalid_argument("cubic_reset needs c > 0, N >= 1, delta > 0");
  const double n = N;
  HybridSystem s;
  s.dim = 2;
  s.name = "cubic_reset";
  const double inf = std::numeric_limits<double>::infinity();
  s.flow_set = regions::box({-inf, 0.0}, {inf, n});
  s.flow_map = SetValuedMap::function([delta](const Vector& x) { return Vector{-x[0] * x[0] * x[0], delta}; });
  s.jump_set = regions::box({-inf, n}, {inf, inf});
  s.jump_map = SetValuedMap::function([](const Vector& x) { return Vector{x[0], 0.0}; });
  s.exact_flow = [delta](const Vector& x, double t) {
    return Vector{x[0] / std::sqrt(1.0 + 2.0 * x[0] * x[0] * t), x[1] + delta * t};
  };
  Preset p = detail::from_system("cubic_reset", s, {std::sqrt(3.0), 0.0});
  p.model.jump_selection = [c](const Vector& x, int) {
    return Vector{detail::signum(x[0]) * std::min(std::abs(x[0]), c), 0.0};
  };
  return p;
}

/// Side-by-side composition matching product(a.system, b.system); each factor
/// keeps its own simulator selections.
inline Preset product_preset(const Preset& a, const Preset& b) {
  Preset p;
  p.name = a.name + " x " + b.name;
  p.system = product(a.system, b.system);
  p.policy = a.policy;
  p.x0 = a.x0;
  p.x0.insert(p.x0.end(), b.x0.begin(), b.x0.end());
  const SimulationModel<double> ma = a.model;
  const SimulationModel<double> mb = b.model;
  const auto da = static_cast<long>(a.system.dim);
  auto head = [da](const Vector& x) { return Vector(x.begin(), x.begin() + da); };
  auto rest = [da](const Vector& x) { return Vector(x.begin() + da, x.end()); };
  auto join = [](Vector u, const Vector& v) {
    u.insert(u.end(), v.begin(), v.end());
    return u;
  };
  SimulationModel<double>& m = p.model;
  m.dim = a.system.dim + b.system.dim;
  m.name = p.name;
  m.in_flow = [=](const Vector& x) { return ma.in_flow(head(x)) && mb.in_flow(rest(x)); };
  m.in_jump = [=](const Vector& x) { return ma.in_jump(head(x)) || mb.in_jump(rest(x)); };
  if (ma.flow_distance && mb.flow_distance)
    m.flow_distance = [=](const Vector& x) { return std::hypot(ma.flow_distance(head(x)), mb.flow_distance(rest(x))); };
  if (ma.jump_distance && mb.jump_distance)
    m.jump_distance = [=](const Vector& x) { return std::min(ma.jump_distance(head(x)), mb.jump_distance(rest(x))); };
  m.flow_selection = [=](const Vector& x, double h) {
    return join(ma.flow_selection(head(x), h), mb.flow_selection(rest(x), h));
  };
  m.jump_selection = [=](const Vector& x, int j) {
    const Vector xa = head(x);
    const Vector xb = rest(x);
    return join(ma.in_jump(xa) ? ma.jump_selection(xa, j) : xa, mb.in_jump(xb) ? mb.jump_selection(xb, j) : xb);
  };
  return p;
}

// ---------------------------------------------------------------------------
// Flows with closed-form solutions

/// x' = omega (x_2, -x_1) on R^2.
inline Preset rotation(double omega = 1.0) {
  HybridSystem s;
  s.dim = 2;
  s.name = "rotation";
  s.flow_set = regions::everything(2);
  s.flow_map = SetValuedMap::function([omega](const Vector& x) { return Vector{omega * x[1], -omega * x[0]}; });
  s.jump_set = detail::empty_region(2);
  s.jump_map = SetValuedMap::function([](const Vector& x) { return x; });
  s.exact_flow = [omega](const Vector& x, double t) {
    const double c = std::cos(omega * t);
    const double sn = std::sin(omega * t);
    return Vector{c * x[0] + sn * x[1], -sn * x[0] + c * x[1]};
  };
  return detail::from_system("rotation", s, {1.0, 0.0});
}

/// x' = -x on R^d.
inline Preset decay(std::size_t dim = 1) {
  HybridSystem s;
  s.dim = dim;
  s.name = "decay";
  s.flow_set = regions::everything(dim);
  s.flow_map = SetValuedMap::function([](const Vector& x) { return linalg::scale(x, -1.0); });
  s.jump_set = detail::empty_region(dim);
  s.jump_map = SetValuedMap::function([](const Vector& x) { return x; });
  s.exact_flow = [](const Vector& x, double t) { return linalg::scale(x, std::exp(-t)); };
  return detail::from_system("decay", s, Vector(dim, 1.0));
}

/// Gradient flow of (x^2 - 1)^2: x' = -4x(x^2 - 1), with wells at +-1.
inline Preset two_well() {
  HybridSystem s;
  s.dim = 1;
  s.name = "two_well";
  s.flow_set = regions::everything(1);
  s.flow_map = SetValuedMap::function([](const Vector& x) { return Vector{-4.0 * x[0] * (x[0] * x[0] - 1.0)}; });
  s.jump_set = detail::empty_region(1);
  s.jump_map = SetValuedMap::function([](const Vector& x) { return x; });
  // u = x^2 solves the logistic equation u' = 8u(1 - u).
  s.exact_flow = [](const Vector& x, double t) {
    const double u0 = x[0] * x[0];
    if (u0 == 0.0) return Vector{0.0};
    const double e = std::exp(8.0 * t);
    const double u = u0 * e / (1.0 - u0 + u0 * e);
    return Vector{detail::signum(x[0]) * std::sqrt(u)};
  };
  return detail::from_system("two_well", s, {0.5});
}

/// The dwell-time timer alone; the simulator's rate min(delta, (N - tau)/h)
/// keeps Euler steps inside [0, N].
inline Preset dwell(int N, double delta) {
  Preset p = detail::from_system("dwell", dwell_automaton(N, delta), {0.0});
  const double n = N;
  p.model.flow_selection = [delta, n](const Vector& x, double h) {
    return Vector{std::clamp((n - x[0]) / h, 0.0, delta)};
  };
  return p;
}

// ---------------------------------------------------------------------------
// Annealing

struct Objective {
  std::string name;
  std::size_t dim = 1;
  std::function<double(const Vector&)> theta;
  std::function<Vector(const Vector&)> gradient;
  SetRegion S;  // constraint set with projection P_S
  std::vector<Vector> critical_points;
  std::vector<Vector> minimizers;
};

/// (y^2 - 1)^2 on S = [-bound, bound].
inline Objective double_well(double bound = 2.0) {
  Objective o;
  o.name = "double_well";
  o.dim = 1;
  o.theta = [](const Vector& y) {
    const double a = y[0] * y[0] - 1.0;
    return a * a;
  };
  o.gradient = [](const Vector& y) { return Vector{4.0 * y[0] * (y[0] * y[0] - 1.0)}; };
  o.S = regions::box({-bound}, {bound});
  o.critical_points = {{-1.0}, {0.0}, {1.0}};
  o.minimizers = {{-1.0}, {1.0}};
  return o;
}

/// A d-dimensional Rastrigin-type landscape on [-bound, bound]^d; no critical list.
inline Objective rastrigin(std::size_t dim = 1, double A = 10.0, double bound = 5.12) {
  Objective o;
  o.name = "rastrigin";
  o.dim = dim;
  constexpr double two_pi = 2.0 * M_PI;
  o.theta = [A](const Vector& y) {
    double v = A * static_cast<double>(y.size());
    for (double c : y) v += c * c - A * std::cos(two_pi * c);
    return v;
  };
  o.gradient = [A](const Vector& y) {
    Vector g(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) g[i] = 2.0 * y[i] + two_pi * A * std::sin(two_pi * y[i]);
    return g;
  };
  o.S = regions::box(Vector(dim, -bound), Vector(dim, bound));
  o.minimizers = {Vector(dim, 0.0)};
  return o;
}

/// Distance to the listed critical set, else the gradient residual |grad Theta(y)|.
inline double critical_set_distance(const Vector& y, const Objective& obj) {
  if (obj.critical_points.empty()) return linalg::norm(obj.gradient(y));
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : obj.critical_points) best = std::min(best, linalg::distance(y, c));
  return best;
}

inline double set_distance(const Vector& y, const std::vector<Vector>& pts) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : pts) best = std::min(best, linalg::distance(y, c));
  return best;
}

/// Smallest c >= 1 with P(|z| > c) <= 2^{-j} for z ~ N(0, sigma^2 I_d),
/// via the bound P(|z| > c) <= d P(|z_1| > c / sqrt(d)) and bisection.
inline double borel_cantelli_c(int j, double sigma = 1.0, std::size_t dim = 1) {
  if (j < 1) throw std::invalid_argument("schedule index starts at 1");
  const double target = std::ldexp(1.0, -j);
  const double d = static_cast<double>(dim);
  auto tail = [&](double c) { return d * std::erfc(c / (sigma * std::sqrt(2.0 * d))); };
  double lo = 0.0;
  double hi = 1.0;
  while (tail(hi) > target) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (tail(mid) > target) lo = mid;
    else hi = mid;
  }
  return std::max(1.0, hi);
}

/// Perturbation scales l_j for the random-search jumps.
struct EllSchedule {
  enum class Mode { BorelCantelli, Capped, Uncapped };
  Mode mode = Mode::BorelCantelli;
  double beta = 1.0;
  std::function<double(int)> ell_tilde;  // for Capped

  static EllSchedule borel_cantelli() { return {}; }
  static EllSchedule capped(double beta, std::function<double(int)> ell_tilde) {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    return {Mode::Capped, beta, std::move(ell_tilde)};
  }
  /// l_j = l~_j as given; need not vanish.
  static EllSchedule uncapped(std::function<double(int)> ell_tilde) { return {Mode::Uncapped, 1.0, std::move(ell_tilde)}; }
};

struct AnnealingConfig {
  Objective objective = double_well();
  int N = 2;
  double delta = 0.5;
  EllSchedule ell;
  double z_sigma = 1.0;
  bool clip_z = false;  // clip |z_j| to c_j
  std::uint64_t seed = 0;
};

/// l_j = 1 / (j c_j), or min(l~_j, beta l_j) in capped mode.
inline double annealing_ell(const AnnealingConfig& cfg, int j) {
  const double base = 1.0 / (j * borel_cantelli_c(j, cfg.z_sigma, cfg.objective.dim));
  if (cfg.ell.mode == EllSchedule::Mode::Capped) return std::min(cfg.ell.ell_tilde(j), cfg.ell.beta * base);
  if (cfg.ell.mode == EllSchedule::Mode::Uncapped) return cfg.ell.ell_tilde(j);
  return base;
}

struct EllVerdict {
  bool vanishes = false;
  std::string reason;
};

/// Checks that l_j c_j decreases along j = 1, 2, 4, ..., J and ends at least
/// ten times below its start.
inline EllVerdict check_ell_decay(const AnnealingConfig& cfg, int J = 1024) {
  auto scaled = [&](int j) { return annealing_ell(cfg, j) * borel_cantelli_c(j, cfg.z_sigma, cfg.objective.dim); };
  const double first = scaled(1);
  double prev = first;
  for (int j = 2; j <= J; j *= 2) {
    const double v = scaled(j);
    if (v > prev) return {false, "l_j c_j increases at j = " + std::to_string(j)};
    prev = v;
  }
  if (prev > 0.1 * first) return {false, "l_j c_j does not decay by j = " + std::to_string(J)};
  return {true, ""};
}

/// Argmin over {y, P_S(y + l z)} of Theta, keeping y on ties or when the
/// projection is undefined.
inline Vector annealing_jump_y(const Objective& obj, const Vector& y, double ell, const Vector& z) {
  const auto cand = obj.S.project(linalg::axpy(y, ell, z));
  if (!cand) return y;
  return obj.theta(*cand) < obj.theta(y) ? *cand : y;
}

/// State (y, tau): C = S x [0, N] with F = -grad Theta(y) x [0, delta];
/// D = S x [1, N] with tau+ = tau - 1 and y+ from the random-search rule.
inline Preset annealing(const AnnealingConfig& cfg) {
  const Objective obj = cfg.objective;
  const std::size_t d = obj.dim;
  const double n = cfg.N;
  const double delta = cfg.delta;
  if (cfg.N < 1 || !(delta > 0.0)) throw std::invalid_argument("annealing needs N >= 1 and delta > 0");
  HybridSystem s;
  s.dim = d + 1;
  s.name = "annealing";
  s.flow_set = regions::product(obj.S, regions::box({0.0}, {n}));
  s.flow_map = SetValuedMap(
      [obj, delta](const Vector& x) {
        Vector g = obj.gradient(Vector(x.begin(), x.end() - 1));
        Vector a = linalg::scale(g, -1.0);
        Vector b = a;
        a.push_back(0.0);
        b.push_back(delta);
        return ValueSet::hull({a, b});
      },
      [obj, delta](const Vector& x) {
        Vector f = linalg::scale(obj.gradient(Vector(x.begin(), x.end() - 1)), -1.0);
        f.push_back(delta);
        return f;
      });
  s.jump_set = regions::product(obj.S, regions::box({1.0}, {n}));
  s.jump_map = SetValuedMap::function([](const Vector& x) {
    Vector r = x;
    r.back() -= 1.0;
    return r;
  });
  s.post_jump_region = regions::product(obj.S, regions::box({0.0}, {n}));
  Preset p = detail::from_system("annealing", s, {});
  p.model.flow_selection = [obj, delta, n](const Vector& x, double h) {
    Vector f = linalg::scale(obj.gradient(Vector(x.begin(), x.end() - 1)), -1.0);
    f.push_back(std::clamp((n - x.back()) / h, 0.0, delta));
    return f;
  };
  const AnnealingConfig c = cfg;
  p.model.jump_selection = [c, obj, d](const Vector& x, int j) {
    auto rng = make_stream(c.seed, StreamTag::Annealing, static_cast<std::uint64_t>(j));
    std::normal_distribution<double> g(0.0, c.z_sigma);
    Vector z(d);
    for (auto& v : z) v = g(rng);
    const int jn = j + 1;
    if (c.clip_z) {
      const double cj = borel_cantelli_c(jn, c.z_sigma, d);
      const double nz = linalg::norm(z);
      if (nz > cj)
        for (auto& v : z) v *= cj / nz;
    }
    const Vector y(x.begin(), x.end() - 1);
    Vector out = annealing_jump_y(obj, y, annealing_ell(c, jn), z);
    out.push_back(x.back() - 1.0);
    return out;
  };
  // y0 uniform in the bounding box of S, tau0 = 0.
  auto rng = make_stream(cfg.seed, StreamTag::Initial);
  Vector x0(d + 1, 0.0);
  const auto& bb = obj.S.bounding_box();
  for (std::size_t i = 0; i < d; ++i) {
    std::uniform_real_distribution<double> u(bb->lo[i], bb->hi[i]);
    x0[i] = u(rng);
  }
  p.x0 = x0;
  return p;
}

// ---------------------------------------------------------------------------
// Sine band

/// The band t -> [sin t - e^{-t}, sin t + e^{-t}] on the discrete times
/// t = m + i / (density (m + 1)), m = 0..horizon-1, with five values per time
/// (the endpoints, quarter points and centre).
inline HybridMapping sine_band_curve(int density, double horizon) {
  if (density < 1 || !(horizon > 0.0)) throw std::invalid_argument("sine band needs density >= 1 and horizon > 0");
  std::vector<GraphPoint> pts;
  for (int m = 0; m < horizon; ++m) {
    const int per = density * (m + 1);
    for (int i = 0; i < per; ++i) {
      const double t = m + static_cast<double>(i) / per;
      if (t > horizon) break;
      const double c = std::sin(t);
      const double w = std::exp(-t);
      for (double f : {-1.0, -0.5, 0.0, 0.5, 1.0}) pts.push_back({t, 0, {c + f * w}});
    }
  }
  return HybridMapping(std::move(pts));
}

/// Solutions of a system (or any family of arcs) starting near a given state.
struct SolutionFamily {
  std::function<std::vector<HybridArc>(const Vector& x0, double radius, double T)> candidates;
};

/// t -> sin(t + r): for a start value v, phases near asin(v) and pi - asin(v)
/// whose starting values stay within `radius` of v.
inline SolutionFamily sine_family(double dt = 1e-3, int phases = 41) {
  SolutionFamily f;
  f.candidates = [dt, phases](const Vector& x0, double radius, double T) {
    std::vector<HybridArc> out;
    const double v = std::clamp(x0[0], -1.0, 1.0);
    const double r0 = std::asin(v);
    for (double base : {r0, M_PI - r0}) {
      for (int i = 0; i < phases; ++i) {
        const double off = phases == 1 ? 0.0 : (2.0 * i / (phases - 1) - 1.0) * std::max(radius, 1e-9);
        const double r = base + off;
        if (std::abs(std::sin(r) - x0[0]) > radius) continue;
        out.push_back(HybridArc::sample_flow([r](double t) { return Vector{std::sin(t + r)}; }, T, dt));
      }
    }
    return out;
  };
  return f;
}

/// Solutions of `sys` from a few probes of x0 + radius B.
inline SolutionFamily system_family(const HybridSystem& sys, SolveOptions opt = {}) {
  SolutionFamily f;
  f.candidates = [sys, opt](const Vector& x0, double radius, double T) {
    std::vector<HybridArc> out;
    SolveOptions o = opt;
    o.max_length = T;
    for (const auto& p : detail::ball_probes(x0, radius)) {
      if (!sys.flow_set.contains(p) && !sys.jump_set.contains(p)) continue;
      out.push_back(solve(sys, p, o));
    }
    return out;
  };
  return f;
}

// ---------------------------------------------------------------------------
// Registry

inline std::vector<std::string> preset_names() {
  return {"cubic", "cubic_reset", "rotation", "decay", "two_well", "dwell(N,delta)", "annealing"};
}

}  // namespace hybridsa
