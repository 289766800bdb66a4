#pragma once

// Value sets of set-valued maps and closed regions of the state space.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hybridsa/linalg.hpp"

namespace hybridsa {

namespace detail {

/// Euclidean projection of v onto the probability simplex.
inline Vector project_simplex(Vector v) {
  Vector u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cum += u[i];
    const double cand = (cum - 1.0) / static_cast<double>(i + 1);
    if (u[i] - cand > 0.0) theta = cand;
  }
  for (auto& x : v) x = std::max(0.0, x - theta);
  return v;
}

/// Distance from y to the segment [a, b].
inline double segment_distance(const Vector& a, const Vector& b, const Vector& y) {
  const Vector ab = linalg::sub(b, a);
  const double len2 = linalg::dot<double>(ab, ab);
  if (len2 == 0.0) return linalg::distance(a, y);
  const double s = std::clamp(linalg::dot<double>(linalg::sub(y, a), ab) / len2, 0.0, 1.0);
  return linalg::distance(linalg::axpy(a, s, ab), y);
}

/// Distance from y to co{points}, by projected gradient on the barycentric weights.
/// Distance from y to the affine hull of the chosen points when the projection
/// has nonnegative barycentric weights; nullopt otherwise or if degenerate.
inline std::optional<double> simplex_face_distance(const std::vector<Vector>& pts, const std::vector<std::size_t>& idx,
                                                   const Vector& y) {
  const Vector& p0 = pts[idx[0]];
  const std::size_t m = idx.size() - 1;
  const std::size_t d = y.size();
  std::vector<Vector> e(m);
  for (std::size_t i = 0; i < m; ++i) e[i] = linalg::sub(pts[idx[i + 1]], p0);
  const Vector r0 = linalg::sub(y, p0);
  std::vector<Vector> a(m, Vector(m + 1));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < m; ++k) a[i][k] = linalg::dot<double>(e[i], e[k]);
    a[i][m] = linalg::dot<double>(e[i], r0);
  }
  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i) scale = std::max(scale, a[i][i]);
  for (std::size_t c = 0; c < m; ++c) {
    std::size_t piv = c;
    for (std::size_t i = c + 1; i < m; ++i)
      if (std::abs(a[i][c]) > std::abs(a[piv][c])) piv = i;
    if (std::abs(a[piv][c]) <= 1e-12 * std::max(scale, 1e-300)) return std::nullopt;
    std::swap(a[c], a[piv]);
    for (std::size_t i = 0; i < m; ++i) {
      if (i == c) continue;
      const double f = a[i][c] / a[c][c];
      for (std::size_t k = c; k <= m; ++k) a[i][k] -= f * a[c][k];
    }
  }
  double w0 = 1.0;
  Vector proj = p0;
  for (std::size_t i = 0; i < m; ++i) {
    const double lam = a[i][m] / a[i][i];
    if (lam < -1e-12) return std::nullopt;
    w0 -= lam;
    proj = linalg::axpy(proj, lam, e[i]);
  }
  if (w0 < -1e-12) return std::nullopt;
  // A full-dimensional simplex containing y.
  if (m == d) return 0.0;
  return linalg::distance(proj, y);
}

inline double hull_distance(const std::vector<Vector>& pts, const Vector& y) {
  if (pts.size() == 1) return linalg::distance(pts[0], y);
  if (pts.size() == 2) return segment_distance(pts[0], pts[1], y);
  const std::size_t n = pts.size();
  const std::size_t d = y.size();
  if (n <= 10 && d <= 4) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : pts) best = std::min(best, linalg::distance(p, y));
    const std::size_t top = std::min(n, d + 1);
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
      const auto size = static_cast<std::size_t>(__builtin_popcount(mask));
      if (size < 2 || size > top) continue;
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (1u << i)) idx.push_back(i);
      if (auto dist = simplex_face_distance(pts, idx, y)) best = std::min(best, *dist);
    }
    return best;
  }
  double lip = 0.0;
  for (const auto& p : pts) lip += linalg::dot<double>(p, p);
  const double step = 1.0 / std::max(lip, 1e-300);
  Vector w(n, 1.0 / static_cast<double>(n));
  double best = linalg::distance(pts[0], y);
  for (const auto& p : pts) best = std::min(best, linalg::distance(p, y));
  for (int it = 0; it < 2000; ++it) {
    Vector z(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c) z[c] += w[i] * pts[i][c];
    const Vector r = linalg::sub(z, y);
    best = std::min(best, linalg::norm(r));
    Vector g(n);
    for (std::size_t i = 0; i < n; ++i) g[i] = linalg::dot<double>(pts[i], r);
    Vector next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = w[i] - step * g[i];
    next = project_simplex(std::move(next));
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs(next[i] - w[i]));
    w = std::move(next);
    if (change < 1e-14) break;
  }
  return best;
}

}  // namespace detail

/// A finite description of a value set: co{points} + radius * B (convex), or
/// the union of balls around finitely many points (nonconvex).
class ValueSet {
 public:
  ValueSet() = default;

  static ValueSet empty() { return ValueSet(); }
  static ValueSet singleton(Vector c) { return ValueSet({std::move(c)}, 0.0, true); }
  static ValueSet ball(Vector c, double r) {
    if (r < 0.0) throw std::invalid_argument("ball radius must be nonnegative");
    return ValueSet({std::move(c)}, r, true);
  }
  static ValueSet hull(std::vector<Vector> pts, double r = 0.0) { return ValueSet(std::move(pts), r, true); }
  /// Finitely many isolated values (not convex unless there is only one).
  static ValueSet points(std::vector<Vector> pts, double r = 0.0) { return ValueSet(std::move(pts), r, false); }

  bool is_empty() const { return points_.empty(); }
  bool is_convex() const {
    if (convex_ || points_.size() <= 1) return true;
    for (const auto& p : points_)
      if (p != points_.front()) return false;
    return true;
  }
  const std::vector<Vector>& generators() const { return points_; }
  double radius() const { return radius_; }
  std::size_t dim() const { return points_.empty() ? 0 : points_.front().size(); }

  double distance(const Vector& y) const {
    if (points_.empty()) return std::numeric_limits<double>::infinity();
    double d;
    if (convex_) {
      d = detail::hull_distance(points_, y);
    } else {
      d = std::numeric_limits<double>::infinity();
      for (const auto& p : points_) d = std::min(d, linalg::distance(p, y));
    }
    return std::max(0.0, d - radius_);
  }

  bool contains(const Vector& y, double tol = 0.0) const { return distance(y) <= tol; }

  /// Default selection: the first generator.
  Vector selection() const {
    if (points_.empty()) throw std::domain_error("selection from an empty value set");
    return points_.front();
  }

  /// A few distinct members: every generator, plus axis offsets for balls.
  std::vector<Vector> selections() const {
    std::vector<Vector> out = points_;
    if (radius_ > 0.0 && !points_.empty()) {
      for (std::size_t c = 0; c < dim(); ++c) {
        Vector a = points_.front();
        Vector b = points_.front();
        a[c] += radius_;
        b[c] -= radius_;
        out.push_back(std::move(a));
        out.push_back(std::move(b));
      }
    }
    return out;
  }

  /// Adds eps * B.
  ValueSet inflated(double eps) const { return ValueSet(points_, radius_ + eps, convex_); }

  template <class Rng>
  Vector sample(Rng& rng) const {
    if (points_.empty()) throw std::domain_error("sampling from an empty value set");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vector base;
    if (convex_) {
      Vector w(points_.size());
      double s = 0.0;
      for (auto& x : w) {
        x = -std::log(1.0 - u(rng));
        s += x;
      }
      base.assign(dim(), 0.0);
      for (std::size_t i = 0; i < points_.size(); ++i)
        for (std::size_t c = 0; c < dim(); ++c) base[c] += w[i] / s * points_[i][c];
    } else {
      base = points_[std::min(points_.size() - 1, static_cast<std::size_t>(u(rng) * points_.size()))];
    }
    if (radius_ > 0.0) {
      std::normal_distribution<double> g(0.0, 1.0);
      Vector dir(dim());
      for (auto& x : dir) x = g(rng);
      const double n = linalg::norm(dir);
      const double r = radius_ * std::pow(u(rng), 1.0 / static_cast<double>(dim()));
      if (n > 0.0)
        for (std::size_t c = 0; c < dim(); ++c) base[c] += r * dir[c] / n;
    }
    return base;
  }

 private:
  ValueSet(std::vector<Vector> pts, double r, bool convex) : points_(std::move(pts)), radius_(r), convex_(convex) {
    for (const auto& p : points_)
      if (p.size() != points_.front().size()) throw std::invalid_argument("value set generators of mixed dimension");
  }

  std::vector<Vector> points_;
  double radius_ = 0.0;
  bool convex_ = true;
};

struct Box {
  Vector lo;
  Vector hi;

  bool contains(const Vector& x) const {
    for (std::size_t i = 0; i < x.size(); ++i)
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
  }
  Vector clamp(const Vector& x) const {
    Vector r(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) r[i] = std::clamp(x[i], lo[i], hi[i]);
    return r;
  }
  bool finite() const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!std::isfinite(lo[i]) || !std::isfinite(hi[i])) return false;
    return true;
  }
};

/// A closed subset of R^d given by a membership predicate, an optional
/// nearest-point map and an optional bounding box.
class SetRegion {
 public:
  using Member = std::function<bool(const Vector&)>;
  using Project = std::function<std::optional<Vector>(const Vector&)>;

  SetRegion() = default;
  SetRegion(std::size_t dim, Member member, Project project = {}, std::optional<Box> bbox = std::nullopt,
            std::string name = "region")
      : dim_(dim), member_(std::move(member)), project_(std::move(project)), bbox_(std::move(bbox)),
        name_(std::move(name)) {}

  std::size_t dim() const { return dim_; }
  const std::string& name() const { return name_; }
  const std::optional<Box>& bounding_box() const { return bbox_; }
  bool has_projection() const { return static_cast<bool>(project_); }

  bool contains(const Vector& x) const { return member_(x); }

  /// Membership in the closed eps-neighbourhood.
  bool contains(const Vector& x, double eps) const {
    if (member_(x)) return true;
    if (eps <= 0.0) return false;
    return distance(x) <= eps;
  }

  /// Nearest point, when a projection is known and defined at x.
  std::optional<Vector> project(const Vector& x) const {
    if (!project_) return std::nullopt;
    return project_(x);
  }

  /// Distance to the set: exact via the projection, else sampled on a grid
  /// over the bounding box (+inf when neither is available).
  double distance(const Vector& x) const {
    if (member_(x)) return 0.0;
    if (project_) {
      if (auto p = project_(x)) return linalg::distance(x, *p);
    }
    if (!bbox_ || !bbox_->finite()) return std::numeric_limits<double>::infinity();
    return grid_distance(x);
  }

  /// Grid points of the bounding box that lie in the set.
  std::vector<Vector> grid(double spacing) const {
    if (!bbox_ || !bbox_->finite()) throw std::invalid_argument("grid over a region without a finite bounding box");
    if (!(spacing > 0.0)) throw std::invalid_argument("grid spacing must be positive");
    std::vector<std::size_t> counts(dim_);
    for (std::size_t c = 0; c < dim_; ++c)
      counts[c] = static_cast<std::size_t>(std::floor((bbox_->hi[c] - bbox_->lo[c]) / spacing + 1e-9)) + 1;
    std::vector<Vector> out;
    std::vector<std::size_t> idx(dim_, 0);
    while (true) {
      Vector p(dim_);
      for (std::size_t c = 0; c < dim_; ++c) p[c] = bbox_->lo[c] + static_cast<double>(idx[c]) * spacing;
      if (member_(p)) out.push_back(std::move(p));
      std::size_t c = 0;
      while (c < dim_ && ++idx[c] == counts[c]) idx[c++] = 0;
      if (c == dim_) break;
    }
    return out;
  }

 private:
  double grid_distance(const Vector& x) const {
    double lo_span = kInfinity;
    for (std::size_t c = 0; c < dim_; ++c) lo_span = std::min(lo_span, bbox_->hi[c] - bbox_->lo[c]);
    const std::size_t per_dim = dim_ <= 1 ? 2001 : (dim_ == 2 ? 201 : 41);
    double spacing = 0.0;
    for (std::size_t c = 0; c < dim_; ++c)
      spacing = std::max(spacing, (bbox_->hi[c] - bbox_->lo[c]) / static_cast<double>(per_dim - 1));
    if (spacing <= 0.0) spacing = 1.0;
    double best = kInfinity;
    for (const auto& p : grid(spacing)) best = std::min(best, linalg::distance(x, p));
    return best;
  }

  static constexpr double kInfinity = std::numeric_limits<double>::infinity();

  std::size_t dim_ = 0;
  Member member_;
  Project project_;
  std::optional<Box> bbox_;
  std::string name_;
};

namespace regions {

inline SetRegion everything(std::size_t dim) {
  const double inf = std::numeric_limits<double>::infinity();
  return SetRegion(
      dim, [](const Vector&) { return true; }, [](const Vector& x) { return std::optional<Vector>(x); },
      Box{Vector(dim, -inf), Vector(dim, inf)}, "R^" + std::to_string(dim));
}

/// Axis-aligned box; bounds may be infinite.
inline SetRegion box(Vector lo, Vector hi) {
  if (lo.size() != hi.size()) throw std::invalid_argument("box bounds of mixed dimension");
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (lo[i] > hi[i]) throw std::invalid_argument("box with lo > hi");
  Box b{std::move(lo), std::move(hi)};
  return SetRegion(
      b.lo.size(), [b](const Vector& x) { return b.contains(x); },
      [b](const Vector& x) { return std::optional<Vector>(b.clamp(x)); }, b, "box");
}

inline SetRegion ball(Vector center, double r) {
  if (r < 0.0) throw std::invalid_argument("ball radius must be nonnegative");
  Box b{linalg::add(center, Vector(center.size(), -r)), linalg::add(center, Vector(center.size(), r))};
  return SetRegion(
      center.size(), [center, r](const Vector& x) { return linalg::distance(x, center) <= r; },
      [center, r](const Vector& x) {
        const double d = linalg::distance(x, center);
        if (d <= r) return std::optional<Vector>(x);
        return std::optional<Vector>(linalg::axpy(center, r / d, linalg::sub(x, center)));
      },
      b, "ball");
}

inline SetRegion singleton(Vector p) { return ball(std::move(p), 0.0); }

/// Planar annulus r1 <= |x - center| <= r2.
inline SetRegion annulus(Vector center, double r1, double r2) {
  if (center.size() != 2 || r1 < 0.0 || r2 < r1) throw std::invalid_argument("annulus needs 2-d center and 0 <= r1 <= r2");
  Box b{linalg::add(center, Vector(2, -r2)), linalg::add(center, Vector(2, r2))};
  return SetRegion(
      2,
      [center, r1, r2](const Vector& x) {
        const double d = linalg::distance(x, center);
        return d >= r1 && d <= r2;
      },
      [center, r1, r2](const Vector& x) -> std::optional<Vector> {
        const double d = linalg::distance(x, center);
        if (d >= r1 && d <= r2) return x;
        if (d == 0.0) return Vector{center[0] + r1, center[1]};
        const double target = d < r1 ? r1 : r2;
        return linalg::axpy(center, target / d, linalg::sub(x, center));
      },
      b, "annulus");
}

inline SetRegion circle(Vector center, double r) {
  auto a = annulus(std::move(center), r, r);
  return SetRegion(
      2, [a](const Vector& x) { return a.contains(x, 1e-12); }, [a](const Vector& x) { return a.project(x); },
      a.bounding_box(), "circle");
}

/// Cartesian product A x B.
inline SetRegion product(const SetRegion& a, const SetRegion& b) {
  const std::size_t da = a.dim();
  const std::size_t d = a.dim() + b.dim();
  auto split = [da](const Vector& x) {
    return std::pair<Vector, Vector>(Vector(x.begin(), x.begin() + static_cast<long>(da)),
                                     Vector(x.begin() + static_cast<long>(da), x.end()));
  };
  SetRegion::Project proj;
  if (a.has_projection() && b.has_projection()) {
    proj = [a, b, split](const Vector& x) -> std::optional<Vector> {
      auto [xa, xb] = split(x);
      auto pa = a.project(xa);
      auto pb = b.project(xb);
      if (!pa || !pb) return std::nullopt;
      Vector r = *pa;
      r.insert(r.end(), pb->begin(), pb->end());
      return r;
    };
  }
  std::optional<Box> bbox;
  if (a.bounding_box() && b.bounding_box()) {
    Box bb = *a.bounding_box();
    bb.lo.insert(bb.lo.end(), b.bounding_box()->lo.begin(), b.bounding_box()->lo.end());
    bb.hi.insert(bb.hi.end(), b.bounding_box()->hi.begin(), b.bounding_box()->hi.end());
    bbox = bb;
  }
  return SetRegion(
      d,
      [a, b, split](const Vector& x) {
        auto [xa, xb] = split(x);
        return a.contains(xa) && b.contains(xb);
      },
      proj, bbox, a.name() + " x " + b.name());
}

/// A intersected with B. No projection; distance falls back to the bounding-box grid.
inline SetRegion intersection(const SetRegion& a, const SetRegion& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("intersection of regions of different dimension");
  std::optional<Box> bbox = a.bounding_box() ? a.bounding_box() : b.bounding_box();
  if (a.bounding_box() && b.bounding_box()) {
    Box bb = *a.bounding_box();
    for (std::size_t i = 0; i < bb.lo.size(); ++i) {
      bb.lo[i] = std::max(bb.lo[i], b.bounding_box()->lo[i]);
      bb.hi[i] = std::min(bb.hi[i], b.bounding_box()->hi[i]);
      if (bb.lo[i] > bb.hi[i]) bb.hi[i] = bb.lo[i];
    }
    bbox = bb;
  }
  return SetRegion(
      a.dim(), [a, b](const Vector& x) { return a.contains(x) && b.contains(x); }, {}, bbox,
      a.name() + " & " + b.name());
}

/// R^m x Q with Q a finite set of points in R^q. The projection is
/// componentwise and is left undefined beyond half the minimal separation
/// of Q (outside the reach of the set).
inline SetRegion euclidean_times_finite(std::size_t m, std::vector<Vector> q_points) {
  if (q_points.empty()) throw std::invalid_argument("finite factor must be nonempty");
  const std::size_t q = q_points.front().size();
  double sep = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < q_points.size(); ++a)
    for (std::size_t b = a + 1; b < q_points.size(); ++b) sep = std::min(sep, linalg::distance(q_points[a], q_points[b]));
  const double reach = sep / 2.0;
  auto tail_of = [m](const Vector& x) { return Vector(x.begin() + static_cast<long>(m), x.end()); };
  return SetRegion(
      m + q,
      [q_points, tail_of](const Vector& x) {
        const Vector t = tail_of(x);
        return std::any_of(q_points.begin(), q_points.end(), [&](const Vector& p) { return p == t; });
      },
      [q_points, tail_of, reach, m](const Vector& x) -> std::optional<Vector> {
        const Vector t = tail_of(x);
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < q_points.size(); ++i) {
          const double d = linalg::distance(q_points[i], t);
          if (d < bd) {
            bd = d;
            best = i;
          }
        }
        if (bd >= reach) return std::nullopt;
        Vector r(x.begin(), x.begin() + static_cast<long>(m));
        r.insert(r.end(), q_points[best].begin(), q_points[best].end());
        return r;
      },
      std::nullopt, "R^" + std::to_string(m) + " x Q");
}

}  // namespace regions
}  // namespace hybridsa
