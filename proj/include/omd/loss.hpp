#pragma once

#include <cmath>
#include <string>
#include <string_view>

#include "omd/error.hpp"
#include "omd/geometry.hpp"

namespace omd {

/// One observation z = (x, y); x lives in the dual space.
struct Sample {
  Vector x;
  double y = 0.0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

enum class LossKind { LeastSquares, Logistic, Sigmoid, SquaredHinge, Huber };

struct Loss {
  LossKind kind = LossKind::LeastSquares;

  /// Every kind except the sigmoid form 1/(1 + e^{ay}) is convex in a.
  [[nodiscard]] bool convex() const noexcept { return kind != LossKind::Sigmoid; }

  /// Classification losses assume labels in [-1, 1].
  [[nodiscard]] bool classification() const noexcept {
    return kind == LossKind::Logistic || kind == LossKind::Sigmoid || kind == LossKind::SquaredHinge;
  }

  friend bool operator==(const Loss&, const Loss&) = default;
};

[[nodiscard]] inline std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::LeastSquares: return "least_squares";
    case LossKind::Logistic: return "logistic";
    case LossKind::Sigmoid: return "sigmoid";
    case LossKind::SquaredHinge: return "squared_hinge";
    case LossKind::Huber: return "huber";
  }
  return "unknown";
}

[[nodiscard]] inline LossKind parse_loss_kind(std::string_view name) {
  if (name == "least_squares") return LossKind::LeastSquares;
  if (name == "logistic") return LossKind::Logistic;
  if (name == "sigmoid") return LossKind::Sigmoid;
  if (name == "squared_hinge") return LossKind::SquaredHinge;
  if (name == "huber") return LossKind::Huber;
  throw DomainError("unknown loss kind '" + std::string(name) + "'");
}

namespace detail {

/// log(1 + e^s) without overflow.
inline double softplus(double s) {
  return s > 0.0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s));
}

/// 1 / (1 + e^s) without overflow.
inline double logistic_tail(double s) {
  if (s >= 0.0) {
    const double e = std::exp(-s);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(s));
}

}  // namespace detail

/// phi(a, y).
[[nodiscard]] inline double loss_value(const Loss& loss, double a, double y) {
  switch (loss.kind) {
    case LossKind::LeastSquares: return 0.5 * (a - y) * (a - y);
    case LossKind::Logistic: return detail::softplus(-a * y);
    case LossKind::Sigmoid: return detail::logistic_tail(a * y);
    case LossKind::SquaredHinge: {
      const double m = std::max(0.0, 1.0 - a * y);
      return m * m;
    }
    case LossKind::Huber: {
      // Omega_2(|a - y|): u^2/2 below 1, u - 1/2 above.
      const double u = std::abs(a - y);
      return u < 1.0 ? 0.5 * u * u : (u - 1.0) + 0.5;
    }
  }
  return 0.0;
}

/// d phi / d a.
[[nodiscard]] inline double loss_derivative(const Loss& loss, double a, double y) {
  switch (loss.kind) {
    case LossKind::LeastSquares: return a - y;
    case LossKind::Logistic: return -y * detail::logistic_tail(a * y);
    case LossKind::Sigmoid: {
      const double s = detail::logistic_tail(-a * y);  // sigma(ay)
      return -y * s * (1.0 - s);
    }
    case LossKind::SquaredHinge: return -2.0 * y * std::max(0.0, 1.0 - a * y);
    case LossKind::Huber: {
      const double r = a - y;
      return sgn(r) * std::min(std::abs(r), 1.0);
    }
  }
  return 0.0;
}

/// Lipschitz constant l_phi of phi'(., y), labels in [-1, 1] for classification kinds.
[[nodiscard]] inline double lipschitz_constant(const Loss& loss) {
  switch (loss.kind) {
    case LossKind::LeastSquares: return 1.0;
    case LossKind::Logistic: return 0.25;
    // max over s in (0,1) of |s(1-s)(1-2s)|, attained at s = (3 - sqrt 3)/6
    case LossKind::Sigmoid: return 1.0 / (6.0 * std::sqrt(3.0));
    case LossKind::SquaredHinge: return 2.0;
    case LossKind::Huber: return 1.0;
  }
  return 0.0;
}

/// f(w, z) = phi(<w, x>, y) + lambda ||w||_2^2.
struct LossModel {
  Loss loss;
  double lambda = 0.0;

  LossModel() = default;
  LossModel(Loss loss_, double lambda_) : loss(loss_), lambda(lambda_) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("regularization must be >= 0");
  }

  friend bool operator==(const LossModel&, const LossModel&) = default;
};

[[nodiscard]] inline double sample_loss(const LossModel& model, const Vector& w, const Sample& z) {
  return loss_value(model.loss, inner(w, z.x), z.y) + model.lambda * inner(w, w);
}

/// grad_w f(w, z) = phi'(<w, x>, y) x + 2 lambda w.
[[nodiscard]] inline Vector sample_gradient(const LossModel& model, const Vector& w, const Sample& z) {
  Vector g = loss_derivative(model.loss, inner(w, z.x), z.y) * z.x;
  if (model.lambda != 0.0) g.axpy(2.0 * model.lambda, w);
  return g;
}

/// 2 (l_phi R^2 + lambda): smoothness of f(., z) for ||x||_* <= R.
[[nodiscard]] inline double smoothness_bound(const LossModel& model, double radius) {
  if (!(radius >= 0.0)) throw DomainError("radius must be nonnegative");
  return 2.0 * (lipschitz_constant(model.loss) * radius * radius + model.lambda);
}

/// Least squares has Hessian x x^T + 2 lambda I, giving the sharper R^2 + 2 lambda.
/// Other losses fall back to smoothness_bound.
[[nodiscard]] inline double sharp_smoothness_bound(const LossModel& model, double radius) {
  if (!(radius >= 0.0)) throw DomainError("radius must be nonnegative");
  if (model.loss.kind == LossKind::LeastSquares) return radius * radius + 2.0 * model.lambda;
  return smoothness_bound(model, radius);
}

}  // namespace omd
