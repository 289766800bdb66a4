#pragma once

// Small dense-vector helpers. States are plain std::vector so that the same
// code runs on double and on extended-range scalar types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hybridsa {

template <class S>
using BasicVector = std::vector<S>;

using Vector = BasicVector<double>;

namespace linalg {

template <class S>
void require_same_size(std::span<const S> a, std::span<const S> b) {
  if (a.size() != b.size())
    throw std::invalid_argument("dimension mismatch: " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
}

template <class S>
S dot(std::span<const S> a, std::span<const S> b) {
  require_same_size(a, b);
  S acc = S(0);
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

template <class S>
S norm(std::span<const S> a) {
  using std::sqrt;
  return sqrt(dot(a, a));
}

template <class S>
S norm(const BasicVector<S>& a) {
  return norm(std::span<const S>(a));
}

template <class S>
S max_norm(std::span<const S> a) {
  using std::abs;
  S m = S(0);
  for (const auto& v : a) m = std::max(m, S(abs(v)));
  return m;
}

template <class S>
BasicVector<S> add(const BasicVector<S>& a, const BasicVector<S>& b) {
  require_same_size<S>(a, b);
  BasicVector<S> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

template <class S>
BasicVector<S> sub(const BasicVector<S>& a, const BasicVector<S>& b) {
  require_same_size<S>(a, b);
  BasicVector<S> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

template <class S>
BasicVector<S> scale(const BasicVector<S>& a, const S& c) {
  BasicVector<S> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] * c;
  return r;
}

/// x + h * v, evaluated componentwise in that order.
template <class S>
BasicVector<S> axpy(const BasicVector<S>& x, const S& h, const BasicVector<S>& v) {
  require_same_size<S>(x, v);
  BasicVector<S> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) r[i] = x[i] + h * v[i];
  return r;
}

template <class S>
S distance(const BasicVector<S>& a, const BasicVector<S>& b) {
  require_same_size<S>(a, b);
  S acc = S(0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const S d = a[i] - b[i];
    acc += d * d;
  }
  using std::sqrt;
  return sqrt(acc);
}

template <class S>
bool all_finite(const BasicVector<S>& a) {
  using std::isfinite;
  return std::all_of(a.begin(), a.end(), [](const S& v) { return bool(isfinite(v)); });
}

/// Converts between scalar types (e.g. extended precision to double for reporting).
template <class To, class From>
BasicVector<To> convert(const BasicVector<From>& a) {
  BasicVector<To> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = static_cast<To>(a[i]);
  return r;
}

}  // namespace linalg
}  // namespace hybridsa
