#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "omd/error.hpp"
#include "omd/geometry.hpp"
#include "omd/loss.hpp"
#include "omd/rng.hpp"

namespace omd {

struct Atom {
  Sample z;
  double prob = 0.0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Finite support; expectations are exact weighted sums.
struct DiscreteFinite {
  std::vector<Atom> atoms;

  friend bool operator==(const DiscreteFinite&, const DiscreteFinite&) = default;
};

/// x = feature_scale * N(0, I), rescaled onto the radius-R sphere when
/// ||x||_* > R ("clipped Gaussian"); y = <w_true, x> + noise_sd * N(0, 1).
struct GaussianLinear {
  Vector w_true;
  double noise_sd = 0.0;
  double feature_scale = 1.0;

  friend bool operator==(const GaussianLinear&, const GaussianLinear&) = default;
};

using SourceKind = std::variant<DiscreteFinite, GaussianLinear>;

enum class VarianceClass { ZeroVariance, PositiveVariance };

[[nodiscard]] inline const char* to_string(VarianceClass v) {
  return v == VarianceClass::ZeroVariance ? "zero_variance" : "positive_variance";
}

/// Distribution over samples together with the dual norm ||.||_* used for the
/// radius R = sup ||x||_*.
class SampleSource {
 public:
  /// `primal` is the norm on W; features are measured in its dual.
  /// A missing radius for a discrete source is taken as the largest atom norm.
  SampleSource(SourceKind kind, NormSpec primal, std::optional<double> radius = std::nullopt)
      : kind_(std::move(kind)), dual_(primal.dual()) {
    if (auto* d = std::get_if<DiscreteFinite>(&kind_)) {
      validate(*d);
      double rmax = 0.0;
      for (const auto& a : d->atoms) rmax = std::max(rmax, dual_norm_of(a.z.x));
      if (radius) {
        if (!(*radius >= 0.0) || !std::isfinite(*radius)) throw DomainError("radius must be finite and >= 0");
        if (rmax > *radius * (1.0 + 1e-12) + 1e-15) {
          throw DomainError("atom feature norm " + std::to_string(rmax) + " exceeds declared radius " +
                            std::to_string(*radius));
        }
        radius_ = *radius;
      } else {
        radius_ = rmax;
      }
    } else {
      const auto& g = std::get<GaussianLinear>(kind_);
      if (g.w_true.empty()) throw DomainError("gaussian source needs w_true");
      if (!(g.noise_sd >= 0.0) || !std::isfinite(g.noise_sd)) throw DomainError("noise_sd must be >= 0");
      if (!(g.feature_scale > 0.0) || !std::isfinite(g.feature_scale)) {
        throw DomainError("feature_scale must be > 0");
      }
      if (!radius || !(*radius > 0.0) || !std::isfinite(*radius)) {
        throw DomainError("gaussian source needs a positive finite radius");
      }
      radius_ = *radius;
    }
  }

  [[nodiscard]] const SourceKind& kind() const noexcept { return kind_; }
  [[nodiscard]] double radius() const noexcept { return radius_; }
  [[nodiscard]] const NormSpec& dual_norm_spec() const noexcept { return dual_; }
  [[nodiscard]] bool discrete() const noexcept { return std::holds_alternative<DiscreteFinite>(kind_); }
  [[nodiscard]] const DiscreteFinite& support() const {
    if (const auto* d = std::get_if<DiscreteFinite>(&kind_)) return *d;
    throw Unsupported("exact expectation needs a discrete source");
  }

  [[nodiscard]] std::size_t dim() const {
    if (const auto* d = std::get_if<DiscreteFinite>(&kind_)) return d->atoms.front().z.x.size();
    return std::get<GaussianLinear>(kind_).w_true.size();
  }

  [[nodiscard]] double dual_norm_of(const Vector& x) const { return p_norm(x, dual_.p()); }

  /// Classification losses assume |y| <= 1; Gaussian labels are unbounded.
  void check_labels_for(const Loss& loss) const {
    if (!loss.classification()) return;
    if (!discrete()) throw DomainError("classification losses need a discrete source with labels in [-1, 1]");
    for (const auto& a : support().atoms) {
      if (std::abs(a.z.y) > 1.0) throw DomainError("classification labels must lie in [-1, 1]");
    }
  }

 private:
  static void validate(const DiscreteFinite& d) {
    if (d.atoms.empty()) throw DomainError("discrete source needs at least one atom");
    const std::size_t dim = d.atoms.front().z.x.size();
    double total = 0.0;
    for (const auto& a : d.atoms) {
      if (a.z.x.size() != dim) throw DimensionMismatch(dim, a.z.x.size());
      if (!std::isfinite(a.z.y)) throw DomainError("labels must be finite");
      if (!(a.prob > 0.0)) throw DomainError("atom probabilities must be positive");
      total += a.prob;
    }
    if (std::abs(total - 1.0) > 1e-12) throw DomainError("atom probabilities must sum to 1");
  }

  SourceKind kind_;
  NormSpec dual_;
  double radius_ = 0.0;
};

/// One sample. Discrete: inversion of the cumulative probabilities with a single
/// uniform. Gaussian: d normals for x, then one for the noise.
[[nodiscard]] inline Sample draw(const SampleSource& source, CounterRng& rng) {
  if (const auto* d = std::get_if<DiscreteFinite>(&source.kind())) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (const auto& a : d->atoms) {
      acc += a.prob;
      if (u < acc) return a.z;
    }
    return d->atoms.back().z;  // rounding in the cumulative sum
  }
  const auto& g = std::get<GaussianLinear>(source.kind());
  Vector x(g.w_true.size());
  for (double& v : x) v = g.feature_scale * rng.normal();
  const double n = source.dual_norm_of(x);
  if (n > source.radius()) x *= source.radius() / n;
  const double noise = rng.normal();
  return Sample{x, inner(g.w_true, x) + g.noise_sd * noise};
}

/// E f(z) over a discrete support, summed in atom order.
template <class Fn>
[[nodiscard]] double expectation(const DiscreteFinite& d, Fn&& fn) {
  double s = 0.0;
  for (const auto& a : d.atoms) s += a.prob * fn(a.z);
  return s;
}

namespace detail {

inline Eigen::VectorXd to_eigen(const Vector& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.raw().data(), static_cast<Eigen::Index>(v.size()));
}

inline Vector from_eigen(const Eigen::VectorXd& v) {
  return Vector(std::vector<double>(v.data(), v.data() + v.size()));
}

/// E||x||_2^2 / d for the clipped Gaussian, which is the scalar c in C_X = c I.
/// With k = R^2/s^2: E min(s^2 chi2_d, R^2) = s^2 d P(chi2_{d+2} <= k) + R^2 P(chi2_d > k).
inline double clipped_gaussian_second_moment(const GaussianLinear& g, double radius) {
  const double d = static_cast<double>(g.w_true.size());
  const double s2 = g.feature_scale * g.feature_scale;
  const double half_k = 0.5 * radius * radius / s2;
  const double inside = s2 * d * boost::math::gamma_p(0.5 * d + 1.0, half_k);
  const double outside = radius * radius * boost::math::gamma_q(0.5 * d, half_k);
  return (inside + outside) / d;
}

inline void require_l2_features(const SampleSource& source) {
  if (source.dual_norm_spec().p() != 2.0) {
    throw Unsupported("closed-form moments of the clipped Gaussian need l2 feature clipping");
  }
}

}  // namespace detail

/// C_X = E[X X^T].
[[nodiscard]] inline Eigen::MatrixXd covariance(const SampleSource& source) {
  const auto dim = static_cast<Eigen::Index>(source.dim());
  if (const auto* d = std::get_if<DiscreteFinite>(&source.kind())) {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& a : d->atoms) {
      const Eigen::VectorXd x = detail::to_eigen(a.z.x);
      c.noalias() += a.prob * x * x.transpose();
    }
    return c;
  }
  detail::require_l2_features(source);
  const double c = detail::clipped_gaussian_second_moment(std::get<GaussianLinear>(source.kind()), source.radius());
  return c * Eigen::MatrixXd::Identity(dim, dim);
}

struct Spectrum {
  double min;
  double max;
};

[[nodiscard]] inline Spectrum covariance_spectrum(const SampleSource& source) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(covariance(source), Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

/// Pivoted LDL^T; positive definite iff every pivot exceeds 1e-12.
[[nodiscard]] inline bool covariance_positive_definite(const SampleSource& source) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(covariance(source));
  return ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 1e-12;
}

/// grad F(w) with F(w) = E f(w, Z).
[[nodiscard]] inline Vector population_gradient(const SampleSource& source, const LossModel& model, const Vector& w) {
  if (const auto* d = std::get_if<DiscreteFinite>(&source.kind())) {
    Vector g(w.size());
    w.require_same_size(d->atoms.front().z.x);
    for (const auto& a : d->atoms) {
      g.axpy(a.prob * loss_derivative(model.loss, inner(w, a.z.x), a.z.y), a.z.x);
    }
    if (model.lambda != 0.0) g.axpy(2.0 * model.lambda, w);
    return g;
  }
  if (model.loss.kind != LossKind::LeastSquares) {
    throw Unsupported("exact population gradient of a gaussian source needs least squares");
  }
  detail::require_l2_features(source);
  const auto& gl = std::get<GaussianLinear>(source.kind());
  w.require_same_size(gl.w_true);
  // C_X w - E[XY] + 2 lambda w, with E[XY] = C_X w_true because the noise is independent.
  const double c = detail::clipped_gaussian_second_moment(gl, source.radius());
  Vector g = c * (w - gl.w_true);
  if (model.lambda != 0.0) g.axpy(2.0 * model.lambda, w);
  return g;
}

/// w* = argmin F. Least squares without regularization is a direct solve of
/// C_X w = E[XY]; everything else runs full-gradient descent with step 1/L_F.
[[nodiscard]] inline Vector minimizer(const SampleSource& source, const LossModel& model) {
  if (!model.loss.convex()) throw DomainError("minimizer needs a convex loss");
  const std::size_t dim = source.dim();

  if (model.loss.kind == LossKind::LeastSquares && model.lambda == 0.0) {
    if (!covariance_positive_definite(source)) throw DomainError("covariance C_X is singular");
    const Eigen::MatrixXd c = covariance(source);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    if (const auto* d = std::get_if<DiscreteFinite>(&source.kind())) {
      for (const auto& a : d->atoms) rhs += a.prob * a.z.y * detail::to_eigen(a.z.x);
    } else {
      rhs = c * detail::to_eigen(std::get<GaussianLinear>(source.kind()).w_true);
    }
    return detail::from_eigen(c.ldlt().solve(rhs));
  }
  if (model.lambda == 0.0) throw DomainError("minimizer needs lambda > 0 outside least squares");

  // Euclidean smoothness of F: l_phi * lambda_max(C_X) + 2 lambda bounds the Hessian.
  const double lmax = covariance_spectrum(source).max;
  const double lf = lipschitz_constant(model.loss) * lmax + 2.0 * model.lambda;
  const double step = 1.0 / lf;
  Vector w(dim);
  constexpr int kMaxIter = 5'000'000;
  for (int it = 0; it < kMaxIter; ++it) {
    const Vector g = population_gradient(source, model, w);
    if (p_norm(g, 2.0) <= 1e-10) return w;
    w.axpy(-step, g);
  }
  throw Error("minimizer: gradient descent did not reach tolerance 1e-10");
}

struct GradientNormEstimate {
  double value;
  double std_err;  // 0 for exact sums
  bool exact;
};

/// E ||grad f(w, Z)||_*: exact on discrete sources, Monte Carlo otherwise.
[[nodiscard]] inline GradientNormEstimate mean_gradient_norm(const SampleSource& source, const LossModel& model,
                                                             const Vector& w, std::size_t mc_samples = 100000,
                                                             std::uint64_t seed = 0) {
  if (const auto* d = std::get_if<DiscreteFinite>(&source.kind())) {
    const double v = expectation(*d, [&](const Sample& z) { return source.dual_norm_of(sample_gradient(model, w, z)); });
    return {v, 0.0, true};
  }
  if (mc_samples < 2) throw DomainError("Monte Carlo needs at least 2 samples");
  CounterRng rng(seed);
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < mc_samples; ++i) {
    const double v = source.dual_norm_of(sample_gradient(model, w, draw(source, rng)));
    const double delta = v - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (v - mean);
  }
  const double n = static_cast<double>(mc_samples);
  return {mean, std::sqrt(m2 / (n - 1.0) / n), false};
}

/// E ||grad f(w, Z)||_*^2, exact (discrete sources only).
[[nodiscard]] inline double mean_squared_gradient_norm(const SampleSource& source, const LossModel& model,
                                                       const Vector& w) {
  return expectation(source.support(), [&](const Sample& z) {
    const double n = source.dual_norm_of(sample_gradient(model, w, z));
    return n * n;
  });
}

/// Zero variance iff E||grad f(w*, Z)||_* <= 1e-10. w_star must pass ||grad F(w_star)||_2 <= 1e-8.
[[nodiscard]] inline VarianceClass classify_variance(const SampleSource& source, const LossModel& model,
                                                     const Vector& w_star) {
  const double opt = p_norm(population_gradient(source, model, w_star), 2.0);
  if (!(opt <= 1e-8)) throw DomainError("w_star fails the optimality check ||grad F|| <= 1e-8");
  return mean_gradient_norm(source, model, w_star).value <= 1e-10 ? VarianceClass::ZeroVariance
                                                                   : VarianceClass::PositiveVariance;
}

/// min of E||grad f(w, Z)||_* over w* and `probes` random points around it.
/// Probes the infimum in the positive-variance hypothesis; it does not prove it.
[[nodiscard]] inline double probe_gradient_norm_infimum(const SampleSource& source, const LossModel& model,
                                                        const Vector& w_star, std::size_t probes,
                                                        std::uint64_t seed, double spread = 1.0) {
  CounterRng rng(seed);
  double best = mean_gradient_norm(source, model, w_star).value;
  for (std::size_t i = 0; i < probes; ++i) {
    Vector w = w_star;
    for (double& v : w) v += spread * rng.normal();
    best = std::min(best, mean_gradient_norm(source, model, w).value);
  }
  return best;
}

}  // namespace omd
