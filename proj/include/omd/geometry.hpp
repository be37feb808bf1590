#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "omd/error.hpp"

namespace omd {

/// Dense real d-vector used for primal iterates and dual (gradient) points.
///
/// Construction from user data checks d >= 1 and finiteness. Arithmetic does
/// not re-check, so an overflowing iteration shows up as non-finite entries
/// that the engine's divergence guard picks up.
class Vector {
 public:
  Vector() = default;

  explicit Vector(std::size_t dim, double fill = 0.0) : data_(dim, fill) {
    if (dim == 0) throw DomainError("vector dimension must be at least 1");
    if (!std::isfinite(fill)) throw DomainError("vector entries must be finite");
  }

  Vector(std::initializer_list<double> values) : Vector(std::vector<double>(values)) {}

  explicit Vector(std::vector<double> values) : data_(std::move(values)) {
    if (data_.empty()) throw DomainError("vector dimension must be at least 1");
    for (double v : data_) {
      if (!std::isfinite(v)) throw DomainError("vector entries must be finite");
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  [[nodiscard]] auto begin() noexcept { return data_.begin(); }
  [[nodiscard]] auto end() noexcept { return data_.end(); }
  [[nodiscard]] auto begin() const noexcept { return data_.begin(); }
  [[nodiscard]] auto end() const noexcept { return data_.end(); }

  [[nodiscard]] std::span<const double> values() const noexcept { return data_; }
  [[nodiscard]] const std::vector<double>& raw() const noexcept { return data_; }

  [[nodiscard]] bool all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  Vector& operator+=(const Vector& other) {
    require_same_size(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }

  Vector& operator-=(const Vector& other) {
    require_same_size(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
  }

  Vector& operator*=(double s) noexcept {
    for (double& v : data_) v *= s;
    return *this;
  }

  /// this += s * other
  Vector& axpy(double s, const Vector& other) {
    require_same_size(other);
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
    return *this;
  }

  friend Vector operator+(Vector lhs, const Vector& rhs) { return lhs += rhs; }
  friend Vector operator-(Vector lhs, const Vector& rhs) { return lhs -= rhs; }
  friend Vector operator*(double s, Vector v) { return v *= s; }
  friend Vector operator*(Vector v, double s) { return v *= s; }
  friend Vector operator-(Vector v) { return v *= -1.0; }

  friend bool operator==(const Vector&, const Vector&) = default;

  void require_same_size(const Vector& other) const {
    if (other.size() != size()) throw DimensionMismatch(size(), other.size());
  }

 private:
  std::vector<double> data_;
};

[[nodiscard]] inline Vector zeros(std::size_t dim) { return Vector(dim, 0.0); }

/// Exponent of an l_p norm, restricted to 1 < p < infinity.
class NormSpec {
 public:
  explicit NormSpec(double p) : p_(p) {
    if (!(p > 1.0) || !std::isfinite(p)) {
      throw DomainError("norm exponent must lie in (1, inf), got " + std::to_string(p));
    }
  }

  static NormSpec euclidean() { return NormSpec(2.0); }

  [[nodiscard]] double p() const noexcept { return p_; }
  [[nodiscard]] double dual_p() const noexcept { return p_ / (p_ - 1.0); }
  [[nodiscard]] NormSpec dual() const { return NormSpec(dual_p()); }

  friend bool operator==(const NormSpec&, const NormSpec&) = default;

 private:
  double p_;
};

/// Conjugate exponent p/(p-1).
[[nodiscard]] inline double dual_exponent(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw DomainError("dual exponent needs p in (1, inf), got " + std::to_string(p));
  }
  return p / (p - 1.0);
}

[[nodiscard]] inline double inner(const Vector& w, const Vector& v) {
  w.require_same_size(v);
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * v[i];
  return s;
}

/// l_p norm, scaled by the largest magnitude so that |w_i|^p cannot overflow.
[[nodiscard]] inline double p_norm(const Vector& w, double p) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw DomainError("p-norm exponent must lie in (1, inf), got " + std::to_string(p));
  }
  double scale = 0.0;
  for (double v : w) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double v : w) s += std::pow(std::abs(v) / scale, p);
  return scale * std::pow(s, 1.0 / p);
}

[[nodiscard]] inline double p_norm(const Vector& w, const NormSpec& norm) { return p_norm(w, norm.p()); }

[[nodiscard]] inline double dual_norm(const Vector& v, const NormSpec& norm) {
  return p_norm(v, norm.dual_p());
}

inline double sgn(double x) noexcept { return (x > 0.0) - (x < 0.0); }

}  // namespace omd
