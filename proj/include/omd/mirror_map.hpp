#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>

#include "omd/error.hpp"
#include "omd/geometry.hpp"

namespace omd {

/// Psi(w) = 1/2 ||w||_2^2.
struct Euclidean {
  friend bool operator==(const Euclidean&, const Euclidean&) = default;
};

/// Psi_p(w) = 1/2 ||w||_p^2 with 1 < p <= 2.
struct PNormDivergence {
  double p;
  friend bool operator==(const PNormDivergence&, const PNormDivergence&) = default;
};

/// Psi(w) = lambda * sum_i g_eps(w_i) + 1/2 ||w||_2^2, where g_eps is the
/// Huber-type smoothing of |.|.
struct SmoothedL1 {
  double epsilon;
  double lambda;
  friend bool operator==(const SmoothedL1&, const SmoothedL1&) = default;
};

using MirrorKind = std::variant<Euclidean, PNormDivergence, SmoothedL1>;

/// A strongly convex potential together with the norm its moduli refer to.
///
/// Each kind has exactly one admissible reference norm: l_p for the p-norm
/// divergence and l_2 for the Euclidean and smoothed-l1 potentials.
class MirrorMap {
 public:
  MirrorMap(MirrorKind kind, NormSpec reference) : kind_(kind), reference_(reference) {
    std::visit([](const auto& k) { validate(k); }, kind_);
    if (!(reference_ == natural_norm(kind_))) {
      throw DomainError("reference norm does not match the mirror map's natural norm");
    }
  }

  explicit MirrorMap(MirrorKind kind) : MirrorMap(kind, natural_norm(kind)) {}

  static MirrorMap euclidean() { return MirrorMap(Euclidean{}); }
  static MirrorMap p_norm(double p) { return MirrorMap(PNormDivergence{p}); }
  static MirrorMap smoothed_l1(double epsilon, double lambda) {
    return MirrorMap(SmoothedL1{epsilon, lambda});
  }

  [[nodiscard]] const MirrorKind& kind() const noexcept { return kind_; }
  [[nodiscard]] const NormSpec& reference_norm() const noexcept { return reference_; }

  [[nodiscard]] std::string name() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Euclidean>) {
            return "euclidean";
          } else if constexpr (std::is_same_v<K, PNormDivergence>) {
            return "pnorm";
          } else {
            return "smoothed_l1";
          }
        },
        kind_);
  }

  static NormSpec natural_norm(const MirrorKind& kind) {
    if (const auto* pn = std::get_if<PNormDivergence>(&kind)) {
      validate(*pn);
      return NormSpec(pn->p);
    }
    return NormSpec::euclidean();
  }

 private:
  static void validate(const Euclidean&) {}
  static void validate(const PNormDivergence& k) {
    if (!(k.p > 1.0 && k.p <= 2.0)) {
      throw DomainError("p-norm divergence needs 1 < p <= 2, got " + std::to_string(k.p));
    }
  }
  static void validate(const SmoothedL1& k) {
    if (!(k.epsilon > 0.0) || !(k.lambda > 0.0) || !std::isfinite(k.epsilon) ||
        !std::isfinite(k.lambda)) {
      throw DomainError("smoothed-l1 map needs epsilon > 0 and lambda > 0");
    }
  }

  MirrorKind kind_;
  NormSpec reference_;
};

namespace detail {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline double huber_smooth(double xi, double eps) {
  const double a = std::abs(xi);
  return a <= eps ? xi * xi / (2.0 * eps) : a - 0.5 * eps;
}

inline double huber_smooth_derivative(double xi, double eps) {
  return std::abs(xi) <= eps ? xi / eps : sgn(xi);
}

}  // namespace detail

/// Gradient of 1/2 ||.||_q^2 for any q > 1: ||w||_q^{2-q} (sgn(w_j)|w_j|^{q-1})_j,
/// with the continuous extension 0 at the origin.
[[nodiscard]] inline Vector norm_square_gradient(const Vector& w, double q) {
  const double n = p_norm(w, q);
  Vector g(w.size());
  if (n == 0.0) return g;
  // ||w||^{2-q} |w_j|^{q-1} = ||w|| (|w_j|/||w||)^{q-1}, which stays finite for large q.
  for (std::size_t j = 0; j < w.size(); ++j) {
    g[j] = sgn(w[j]) * n * std::pow(std::abs(w[j]) / n, q - 1.0);
  }
  return g;
}

[[nodiscard]] inline double psi_value(const MirrorMap& map, const Vector& w) {
  return std::visit(
      detail::overloaded{
          [&](const Euclidean&) { return 0.5 * inner(w, w); },
          [&](const PNormDivergence& k) {
            const double n = p_norm(w, k.p);
            return 0.5 * n * n;
          },
          [&](const SmoothedL1& k) {
            double s = 0.0;
            for (double v : w) s += detail::huber_smooth(v, k.epsilon);
            return k.lambda * s + 0.5 * inner(w, w);
          },
      },
      map.kind());
}

[[nodiscard]] inline Vector psi_grad(const MirrorMap& map, const Vector& w) {
  return std::visit(
      detail::overloaded{
          [&](const Euclidean&) { return w; },
          [&](const PNormDivergence& k) { return norm_square_gradient(w, k.p); },
          [&](const SmoothedL1& k) {
            Vector g(w.size());
            for (std::size_t j = 0; j < w.size(); ++j) {
              g[j] = k.lambda * detail::huber_smooth_derivative(w[j], k.epsilon) + w[j];
            }
            return g;
          },
      },
      map.kind());
}

/// Inverse of psi_grad. For the p-norm divergence this is the gradient of the
/// conjugate potential 1/2 ||.||_{p*}^2; for the smoothed-l1 map it is the
/// coordinatewise inverse of a strictly increasing piecewise-linear function.
[[nodiscard]] inline Vector psi_grad_inverse(const MirrorMap& map, const Vector& v) {
  return std::visit(
      detail::overloaded{
          [&](const Euclidean&) { return v; },
          [&](const PNormDivergence& k) { return norm_square_gradient(v, dual_exponent(k.p)); },
          [&](const SmoothedL1& k) {
            const double knee = k.lambda + k.epsilon;
            Vector w(v.size());
            for (std::size_t j = 0; j < v.size(); ++j) {
              w[j] = std::abs(v[j]) <= knee ? v[j] * k.epsilon / knee : v[j] - k.lambda * sgn(v[j]);
            }
            return w;
          },
      },
      map.kind());
}

/// D_Psi(target, base) = Psi(target) - Psi(base) - <target - base, grad Psi(base)>.
struct BregmanValue {
  double value;
};

[[nodiscard]] inline BregmanValue bregman(const MirrorMap& map, const Vector& target, const Vector& base) {
  target.require_same_size(base);
  const double d = std::visit(
      detail::overloaded{
          // Algebraically identical closed forms that avoid cancellation.
          [&](const Euclidean&) {
            const Vector diff = target - base;
            return 0.5 * inner(diff, diff);
          },
          [&](const SmoothedL1& k) {
            double s = 0.0;
            double q = 0.0;
            for (std::size_t j = 0; j < target.size(); ++j) {
              const double delta = target[j] - base[j];
              s += detail::huber_smooth(target[j], k.epsilon) - detail::huber_smooth(base[j], k.epsilon) -
                   delta * detail::huber_smooth_derivative(base[j], k.epsilon);
              q += delta * delta;
            }
            return k.lambda * s + 0.5 * q;
          },
          [&](const PNormDivergence&) {
            return psi_value(map, target) - psi_value(map, base) -
                   inner(target - base, psi_grad(map, base));
          },
      },
      map.kind());
  return BregmanValue{std::max(0.0, d)};
}

/// sigma_Psi with respect to the map's reference norm.
[[nodiscard]] inline double strong_convexity_modulus(const MirrorMap& map) {
  if (!(map.reference_norm() == MirrorMap::natural_norm(map.kind()))) {
    throw DomainError("strong convexity modulus requested in a non-native norm");
  }
  if (const auto* pn = std::get_if<PNormDivergence>(&map.kind())) return pn->p - 1.0;
  return 1.0;
}

/// L_Psi, or nothing when Psi is not strongly smooth (p-norm divergence with p < 2).
[[nodiscard]] inline std::optional<double> smoothness_modulus(const MirrorMap& map) {
  return std::visit(
      detail::overloaded{
          [](const Euclidean&) -> std::optional<double> { return 1.0; },
          [](const PNormDivergence& k) -> std::optional<double> {
            if (k.p == 2.0) return 1.0;
            return std::nullopt;
          },
          [](const SmoothedL1& k) -> std::optional<double> { return 1.0 + k.lambda / k.epsilon; },
      },
      map.kind());
}

/// C_Psi in ||grad Psi(w)||_* <= C_Psi (1 + ||w||).
[[nodiscard]] inline double incremental_constant(const MirrorMap& map) {
  if (std::holds_alternative<PNormDivergence>(map.kind())) return 1.0;
  // ||grad Psi(0)||_* + L_Psi, and grad Psi(0) = 0 for the remaining kinds.
  return *smoothness_modulus(map);
}

/// tau_p = 2 / min{p, 3 - p}, in (1, 2] for p in (1, 2].
[[nodiscard]] inline double tau_p(double p) {
  if (!(p > 1.0 && p <= 2.0)) throw DomainError("tau_p needs 1 < p <= 2");
  return 2.0 / std::min(p, 3.0 - p);
}

/// Convex control function Omega_p: Huber-like, linear beyond u = 1.
[[nodiscard]] inline double omega_p(double p, double u) {
  if (!(u >= 0.0)) throw DomainError("omega_p needs u >= 0");
  const double tau = tau_p(p);
  if (u >= 1.0) return (u - 1.0) + 1.0 / tau;
  return std::pow(u, tau) / tau;
}

struct ControlFunction {
  explicit ControlFunction(double p_) : p(p_), tau(tau_p(p_)) {}
  double operator()(double u) const { return omega_p(p, u); }
  double p;
  double tau;
};

/// B_p = min{C, C^tau_p} with C = (2 (2 n)^{2-p} + 2 n^{p-1} + 2)^{-1}, n = ||w~||_p.
/// Uses 0^s = 0 for s > 0 at n = 0.
[[nodiscard]] inline double b_p_constant(double p, double target_norm) {
  if (!(p > 1.0 && p < 2.0)) throw DomainError("b_p_constant needs 1 < p < 2");
  if (!(target_norm >= 0.0)) throw DomainError("b_p_constant needs a nonnegative norm");
  const double c = 1.0 / (2.0 * std::pow(2.0 * target_norm, 2.0 - p) +
                          2.0 * std::pow(target_norm, p - 1.0) + 2.0);
  return std::min(c, std::pow(c, tau_p(p)));
}

/// Fenchel conjugate of (1/kappa)||.||^kappa evaluated at v:
/// ((kappa - 1)/kappa) ||v||_*^{kappa/(kappa - 1)}.
[[nodiscard]] inline double norm_power_conjugate(double kappa, const Vector& v, const NormSpec& norm) {
  if (!(kappa > 1.0) || !std::isfinite(kappa)) throw DomainError("norm_power_conjugate needs kappa > 1");
  const double n = dual_norm(v, norm);
  return (kappa - 1.0) / kappa * std::pow(n, kappa / (kappa - 1.0));
}

}  // namespace omd
