#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "omd/config.hpp"
#include "omd/data_stream.hpp"
#include "omd/diagnostics.hpp"
#include "omd/engine.hpp"
#include "omd/loss.hpp"
#include "omd/mirror_map.hpp"
#include "omd/rng.hpp"

namespace omd {

struct CheckResult {
  std::string name;
  bool passed;
  double max_residual;
};

namespace detail {

inline Vector random_vector(CounterRng& rng, std::size_t d, double lo, double hi) {
  Vector v(d);
  for (double& x : v) x = lo + (hi - lo) * rng.uniform();
  return v;
}

/// Coordinates in [-1, 1] times 10^s with s uniform in [lo_exp, hi_exp].
inline Vector random_scaled(CounterRng& rng, std::size_t d, double lo_exp, double hi_exp) {
  Vector v = random_vector(rng, d, -1.0, 1.0);
  v *= std::pow(10.0, lo_exp + (hi_exp - lo_exp) * rng.uniform());
  return v;
}

inline std::vector<MirrorMap> sample_maps() {
  return {MirrorMap::euclidean(), MirrorMap::p_norm(1.2), MirrorMap::p_norm(1.5), MirrorMap::p_norm(1.9),
          MirrorMap::p_norm(2.0), MirrorMap::smoothed_l1(0.5, 1.0), MirrorMap::smoothed_l1(0.1, 0.3)};
}

inline DiscreteFinite four_atom_source() {
  return DiscreteFinite{{{Sample{Vector{1.0, 0.0, 0.0}, 1.0}, 0.25},
                         {Sample{Vector{0.0, 0.8, 0.2}, -0.5}, 0.25},
                         {Sample{Vector{-0.3, 0.1, 0.9}, 0.7}, 0.3},
                         {Sample{Vector{0.4, -0.6, 0.3}, -0.2}, 0.2}}};
}

}  // namespace detail

/// sup over r >= 0 and sampled unit directions u of r<u, v> - r^kappa / kappa,
/// with a golden-section search along each direction.
[[nodiscard]] inline double conjugate_by_search(double kappa, const Vector& v, const NormSpec& norm,
                                                std::size_t directions, std::uint64_t seed) {
  CounterRng rng(seed);
  double best = 0.0;
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  for (std::size_t i = 0; i < directions; ++i) {
    Vector u(v.size());
    for (double& x : u) x = rng.normal();
    const double n = p_norm(u, norm);
    if (n == 0.0) continue;
    u *= 1.0 / n;
    const double s = inner(u, v);
    if (s <= 0.0) continue;
    auto f = [&](double r) { return r * s - std::pow(r, kappa) / kappa; };
    // f is concave in r and f(r) < 0 once r^(kappa-1) > kappa s.
    double lo = 0.0;
    double hi = 2.0 * std::pow(kappa * s, 1.0 / (kappa - 1.0));
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < 100 && hi - lo > 1e-14 * (1.0 + hi); ++it) {
      if (f1 < f2) {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + phi * (hi - lo);
        f2 = f(x2);
      } else {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - phi * (hi - lo);
        f1 = f(x1);
      }
    }
    best = std::max({best, f1, f2});
  }
  return best;
}

/// Every identity and inequality check, with fixed seeds. Output is deterministic.
[[nodiscard]] inline std::vector<CheckResult> run_verify_suite() {
  using detail::random_scaled;
  using detail::random_vector;
  std::vector<CheckResult> out;
  auto add = [&](std::string name, double worst, bool ok) { out.push_back({std::move(name), ok, worst}); };

  {  // Hoelder: |<w, v>| <= ||w||_p ||v||_p*
    CounterRng rng(101);
    double worst = 0.0;
    for (double p : {1.2, 1.5, 2.0}) {
      for (int i = 0; i < 1000; ++i) {
        const Vector w = random_vector(rng, 5, -3.0, 3.0);
        const Vector v = random_vector(rng, 5, -3.0, 3.0);
        worst = std::max(worst, std::abs(inner(w, v)) - p_norm(w, p) * p_norm(v, dual_exponent(p)));
      }
    }
    add("holder_inequality", std::max(0.0, worst), worst <= 1e-12);
  }
  {
    CounterRng rng(102);
    double worst = 0.0;
    for (double p : {1.2, 1.5, 2.0}) {
      for (int i = 0; i < 1000; ++i) {
        const Vector a = random_vector(rng, 5, -3.0, 3.0);
        const Vector b = random_vector(rng, 5, -3.0, 3.0);
        worst = std::max(worst, p_norm(a + b, p) - p_norm(a, p) - p_norm(b, p));
      }
    }
    add("triangle_inequality", std::max(0.0, worst), worst <= 1e-12);
  }
  {
    CounterRng rng(103);
    double worst = 0.0;
    for (const auto& map : detail::sample_maps()) {
      for (int i = 0; i < 1000; ++i) {
        const Vector w = random_scaled(rng, 4, -2.0, 1.0);
        const Vector back = psi_grad_inverse(map, psi_grad(map, w));
        for (std::size_t j = 0; j < w.size(); ++j) worst = std::max(worst, std::abs(back[j] - w[j]));
      }
    }
    add("psi_gradient_round_trip", worst, worst <= 1e-10);
  }
  {
    CounterRng rng(104);
    double worst = 0.0;
    for (double p : {1.2, 1.5, 1.9}) {
      for (int i = 0; i < 1000; ++i) worst = std::max(worst, gradient_norm_residual(p, random_scaled(rng, 4, -2.0, 1.0)));
    }
    add("gradient_norm_identity", worst, worst < 1e-10);
  }
  {
    CounterRng rng(105);
    double lower = 0.0;
    double upper = 0.0;
    for (const auto& map : detail::sample_maps()) {
      const double sigma = strong_convexity_modulus(map);
      const auto l = smoothness_modulus(map);
      for (int i = 0; i < 1000; ++i) {
        const Vector a = random_scaled(rng, 4, -2.0, 1.0);
        const Vector b = random_scaled(rng, 4, -2.0, 1.0);
        const double n = p_norm(a - b, map.reference_norm());
        const double d = bregman(map, a, b).value;
        lower = std::max(lower, 0.5 * sigma * n * n - d);
        if (l) upper = std::max(upper, d - 0.5 * *l * n * n);
      }
    }
    add("strong_convexity_lower_bound", lower, lower <= 1e-10);
    add("strong_smoothness_upper_bound", upper, upper <= 1e-10);
  }
  {
    CounterRng rng(106);
    double worst = 0.0;
    for (const auto& map : detail::sample_maps()) {
      for (int i = 0; i < 1000; ++i) {
        worst = std::max(worst, bregman_sum_residual(map, random_scaled(rng, 4, -2.0, 1.0),
                                                     random_scaled(rng, 4, -2.0, 1.0)));
      }
    }
    add("bregman_sum_identity", worst, worst < 1e-10);
  }
  {
    CounterRng rng(107);
    double worst = 0.0;
    for (double p : {1.2, 1.5, 2.0}) {
      for (int i = 0; i < 1000; ++i) {
        worst = std::max(worst, duality_residual(p, random_vector(rng, 4, -10.0, 10.0), random_vector(rng, 4, -10.0, 10.0)));
      }
    }
    add("bregman_duality", worst, worst < 1e-9);
  }
  {
    CounterRng rng(108);
    double worst_upper = 0.0;
    double worst_control = 0.0;
    for (double p : {1.2, 1.5, 1.8}) {
      for (int i = 0; i < 10000; ++i) {
        const Vector wt = random_scaled(rng, 3, -3.0, 2.0);
        const Vector w = random_scaled(rng, 3, -3.0, 2.0);
        worst_upper = std::max(worst_upper, -psip_upper_slack(p, wt, w));
        worst_control = std::max(worst_control, -psip_control_slack(p, wt, w));
      }
    }
    add("pnorm_bregman_upper_bound", std::max(0.0, worst_upper), worst_upper <= 0.0);
    add("pnorm_control_lower_bound", std::max(0.0, worst_control), worst_control <= 1e-12);
  }
  {
    CounterRng rng(109);
    double worst = 0.0;
    for (const auto& map : detail::sample_maps()) {
      const double c = incremental_constant(map);
      const NormSpec& norm = map.reference_norm();
      for (int i = 0; i < 1000; ++i) {
        const Vector w = random_scaled(rng, 4, -3.0, 3.0);
        worst = std::max(worst, dual_norm(psi_grad(map, w), norm) - c * (1.0 + p_norm(w, norm)));
      }
    }
    add("incremental_condition", std::max(0.0, worst), worst <= 1e-10);
  }
  {
    CounterRng rng(110);
    double worst = 0.0;
    bool ok = true;
    for (double kappa : {1.5, 2.0, 3.0}) {
      for (double p : {1.5, 2.0}) {
        const NormSpec norm(p);
        const Vector v = random_vector(rng, 2, -2.0, 2.0);
        const double exact = norm_power_conjugate(kappa, v, norm);
        const double searched = conjugate_by_search(kappa, v, norm, 100000, rng.next_u64());
        const double rel = (exact - searched) / exact;
        ok = ok && searched <= exact * (1.0 + 1e-12) && rel <= 1e-4;
        worst = std::max(worst, std::abs(rel));
      }
    }
    add("fenchel_conjugate_search", worst, ok);
  }
  {
    CounterRng rng(111);
    double worst = 0.0;
    const std::vector<LossModel> models = {LossModel(Loss{LossKind::LeastSquares}, 0.0),
                                           LossModel(Loss{LossKind::Huber}, 0.1),
                                           LossModel(Loss{LossKind::Logistic}, 0.05)};
    for (const auto& map : detail::sample_maps()) {
      const SampleSource source(detail::four_atom_source(), map.reference_norm());
      for (const auto& model : models) {
        const Vector w_star = random_vector(rng, 3, -1.0, 1.0);
        for (int i = 0; i < 100; ++i) {
          const Vector w = random_vector(rng, 3, -2.0, 2.0);
          worst = std::max(worst, key_identity_residual(map, model, source, w_star, w, 0.05 + 0.5 * rng.uniform()));
        }
      }
    }
    add("key_identity", worst, worst < 1e-10);
  }
  {
    CounterRng rng(112);
    double worst = 0.0;
    const LossKind kinds[] = {LossKind::LeastSquares, LossKind::Logistic, LossKind::SquaredHinge, LossKind::Huber};
    for (int i = 0; i < 10000; ++i) {
      const LossModel model(Loss{kinds[i % 4]}, (i / 4) % 3 == 0 ? 0.0 : 0.5 * rng.uniform());
      Vector x = random_vector(rng, 3, -1.0, 1.0);
      const double R = p_norm(x, 2.0);
      const double y = model.loss.classification() ? (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform()
                                                   : random_vector(rng, 1, -3.0, 3.0)[0];
      const Sample z{x, y};
      const double L = smoothness_bound(model, R);
      if (L == 0.0) continue;
      const double m = cocoercivity_margin(model, z, random_vector(rng, 3, -3.0, 3.0), random_vector(rng, 3, -3.0, 3.0), L);
      worst = std::max(worst, -m);
    }
    add("cocoercivity", std::max(0.0, worst), worst <= 1e-10);
  }
  {
    CounterRng rng(113);
    double worst = 0.0;
    const LossKind kinds[] = {LossKind::LeastSquares, LossKind::Logistic, LossKind::Sigmoid, LossKind::SquaredHinge,
                              LossKind::Huber};
    for (LossKind kind : kinds) {
      const Loss loss{kind};
      for (int i = 0; i < 1000;) {
        const double a = -4.0 + 8.0 * rng.uniform();
        const double y = loss.classification() ? -1.0 + 2.0 * rng.uniform() : -4.0 + 8.0 * rng.uniform();
        if (std::abs(std::abs(a - y) - 1.0) < 1e-3 || std::abs(a * y - 1.0) < 1e-3) continue;
        ++i;
        const double h = 1e-5;
        const double fd = (loss_value(loss, a + h, y) - loss_value(loss, a - h, y)) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - loss_derivative(loss, a, y)));
      }
    }
    add("loss_derivative_finite_difference", worst, worst <= 1e-6);
  }
  {
    double worst = 0.0;
    for (LossKind kind : {LossKind::LeastSquares, LossKind::Logistic, LossKind::Sigmoid, LossKind::SquaredHinge,
                          LossKind::Huber}) {
      const Loss loss{kind};
      const double ell = lipschitz_constant(loss);
      for (int iy = 0; iy <= 20; ++iy) {
        const double y = loss.classification() ? -1.0 + 0.1 * iy : -5.0 + 0.5 * iy;
        for (int ia = 0; ia < 4000; ++ia) {
          const double a = -10.0 + 0.005 * ia;
          const double b = a + 0.005;
          const double q = std::abs(loss_derivative(loss, b, y) - loss_derivative(loss, a, y)) / (b - a);
          worst = std::max(worst, q - ell);
        }
      }
    }
    add("loss_lipschitz_constant", std::max(0.0, worst), worst <= 1e-8);
  }
  {
    // The p-norm divergence is not strongly smooth: the near-axis ratio grows without bound.
    bool ok = true;
    double growth = 0.0;
    for (double p : {1.2, 1.5, 1.8}) {
      for (std::size_t d : {2u, 3u, 5u}) {
        double prev = 0.0;
        for (double a : {1.0, 10.0, 100.0, 1000.0, 10000.0}) {
          const double r = nonsmoothness_axis_witness(p, d, a);
          ok = ok && r > prev;
          prev = r;
        }
        // Growth is about a^(2-p): a tenfold rise over the grid needs p <= 1.75.
        const double g = prev / nonsmoothness_axis_witness(p, d, 1.0);
        if (p <= 1.5) {
          ok = ok && g > 10.0;
          growth = growth == 0.0 ? g : std::min(growth, g);
        }
      }
    }
    add("nonsmoothness_axis_witness", growth, ok);
  }
  {
    CounterRng rng(114);
    double worst = 0.0;
    const MirrorMap map = MirrorMap::euclidean();
    const LossModel model(Loss{LossKind::LeastSquares}, 0.0);
    for (int i = 0; i < 10000; ++i) {
      const Vector w = random_vector(rng, 4, -2.0, 2.0);
      const Sample z{random_vector(rng, 4, -1.0, 1.0), -2.0 + 4.0 * rng.uniform()};
      const double eta = rng.uniform();
      const Vector omd = omd_step(map, model, w, z, eta);
      double residual = -z.y;
      for (std::size_t j = 0; j < 4; ++j) residual += w[j] * z.x[j];
      // Differences are measured in units of the largest operand; 1e-15 absolute is below one ulp past 4.
      for (std::size_t j = 0; j < 4; ++j) {
        const double step = eta * residual * z.x[j];
        const double scale = std::max({1.0, std::abs(w[j]), std::abs(step)});
        worst = std::max(worst, std::abs(omd[j] - (w[j] - step)) / scale);
      }
    }
    add("kaczmarz_equivalence", worst, worst <= 1e-15);
  }
  {
    // E D(w*, w_next) <= D(w*, w) + (eta^2 / sigma) E||grad f(w*, z)||_*^2 for eta <= sigma / (2L).
    CounterRng rng(115);
    double worst = 0.0;
    const LossModel model(Loss{LossKind::LeastSquares}, 0.0);
    for (const auto& map : {MirrorMap::euclidean(), MirrorMap::smoothed_l1(0.5, 1.0), MirrorMap::p_norm(2.0)}) {
      const SampleSource source(detail::four_atom_source(), map.reference_norm());
      const Vector w_star = minimizer(source, model);
      const double sigma = strong_convexity_modulus(map);
      const double L = sharp_smoothness_bound(model, source.radius());
      const double eta = sigma / (2.0 * L);
      const double noise = mean_squared_gradient_norm(source, model, w_star);
      for (int i = 0; i < 1000; ++i) {
        const Vector w = random_vector(rng, 3, -3.0, 3.0);
        const double next = expectation(source.support(), [&](const Sample& z) {
          return bregman(map, w_star, omd_step(map, model, w, z, eta)).value;
        });
        worst = std::max(worst, next - bregman(map, w_star, w).value - eta * eta / sigma * noise);
      }
    }
    add("one_step_distance_contract", std::max(0.0, worst), worst <= 1e-10);
  }
  {
    double worst_join = 0.0;
    double worst_convex = 0.0;
    for (double p : {4.0 / 3.0, 1.5, 2.0}) {
      const double tau = tau_p(p);
      worst_join = std::max(worst_join, std::abs(omega_p(p, 1.0) - std::pow(1.0, tau) / tau));
      for (int i = 1; i < 300; ++i) {
        const double u = 0.01 * i;
        worst_convex = std::max(worst_convex, -(omega_p(p, u + 0.01) - 2.0 * omega_p(p, u) + omega_p(p, u - 0.01)));
      }
    }
    add("omega_continuity", worst_join, worst_join <= 1e-15);
    add("omega_convexity", std::max(0.0, worst_convex), worst_convex <= 1e-12);
  }
  {
    // Monte Carlo population gradient agrees with the exact weighted sum.
    const LossModel model(Loss{LossKind::LeastSquares}, 0.1);
    const SampleSource source(detail::four_atom_source(), NormSpec::euclidean());
    const Vector w{0.3, -0.2, 0.5};
    const Vector exact = population_gradient(source, model, w);
    CounterRng rng(116);
    const std::size_t n = 100000;
    std::vector<double> sum(3, 0.0);
    std::vector<double> sq(3, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const Vector g = sample_gradient(model, w, draw(source, rng));
      for (std::size_t j = 0; j < 3; ++j) {
        sum[j] += g[j];
        sq[j] += g[j] * g[j];
      }
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < 3; ++j) {
      const double mean = sum[j] / n;
      const double se = std::sqrt((sq[j] / n - mean * mean) / (n - 1));
      worst = std::max(worst, std::abs(mean - exact[j]) / se);
    }
    add("population_gradient_monte_carlo", worst, worst <= 4.0);
  }
  return out;
}

[[nodiscard]] inline std::string format_verify_report(const std::vector<CheckResult>& checks) {
  std::string s = "name,status,max_residual\n";
  for (const auto& c : checks) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", c.max_residual);
    s += c.name + ',' + (c.passed ? "pass" : "fail") + ',' + buf + '\n';
  }
  return s;
}

}  // namespace omd
