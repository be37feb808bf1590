#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "omd/data_stream.hpp"
#include "omd/engine.hpp"
#include "omd/error.hpp"
#include "omd/geometry.hpp"
#include "omd/loss.hpp"
#include "omd/mirror_map.hpp"

namespace omd {

// ---------------------------------------------------------------- rate fits

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::uint64_t t_min = 0;
  std::uint64_t t_max = 0;
  std::size_t points = 0;
  /// Delta-method error of the slope from the per-point std_err (0 for exact curves).
  double slope_std_err = 0.0;
};

namespace detail {

/// Ordinary least squares of y on x; sy are standard errors of y used only
/// for slope_std_err.
inline RateFit ols(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& sy) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("rate fit needs distinct abscissae");
  RateFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ssr += r * r;
    const double c = (x[i] - mx) / sxx;
    var += c * c * sy[i] * sy[i];
  }
  f.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  f.slope_std_err = std::sqrt(var);
  f.points = x.size();
  return f;
}

template <class AbscissaFn>
RateFit fit_log_mean(const ExpectationCurve& curve, std::uint64_t t_min, std::uint64_t t_max, AbscissaFn abscissa) {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> sy;
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  for (const auto& p : curve.points) {
    if (p.t < t_min || p.t > t_max) continue;
    if (!(p.mean > 0.0) || !std::isfinite(p.mean)) throw DomainError("rate fit needs positive finite means in range");
    if (x.empty()) lo = p.t;
    hi = p.t;
    x.push_back(abscissa(p.t));
    y.push_back(std::log(p.mean));
    sy.push_back(p.std_err / p.mean);
  }
  if (x.size() < 4) throw DomainError("rate fit needs at least 4 checkpoints in range");
  RateFit f = ols(x, y, sy);
  f.t_min = lo;
  f.t_max = hi;
  return f;
}

}  // namespace detail

/// Least-squares line through (log t, log mean) over checkpoints in [t_min, t_max].
[[nodiscard]] inline RateFit fit_rate(const ExpectationCurve& curve, std::uint64_t t_min, std::uint64_t t_max) {
  return detail::fit_log_mean(curve, t_min, t_max, [](std::uint64_t t) { return std::log(static_cast<double>(t)); });
}

/// Least-squares line through (t, log mean): the slope is a per-step log contraction.
[[nodiscard]] inline RateFit fit_linear_rate(const ExpectationCurve& curve, std::uint64_t t_min, std::uint64_t t_max) {
  return detail::fit_log_mean(curve, t_min, t_max, [](std::uint64_t t) { return static_cast<double>(t); });
}

// ------------------------------------------------------------ bound curves

struct BracketConstants {
  double sigma_psi;
  double L;
  double sigma_f;
  double eta1;
  double d1;
};

struct BoundBracket {
  std::vector<std::uint64_t> steps;
  std::vector<double> lower;
  std::vector<double> upper;
  BracketConstants constants;
};

/// (1 - 2 L eta1 / sigma_Psi)^T D1 <= E D(w*, w) <= (1 - sigma_F eta1 / 2)^T D1,
/// with T counted in steps taken, so T = 0 is the initial point.
[[nodiscard]] inline BoundBracket linear_rate_bracket(const BracketConstants& c, const std::vector<std::uint64_t>& steps) {
  if (!(c.sigma_psi > 0.0) || !(c.L > 0.0) || !(c.sigma_f > 0.0) || !(c.eta1 > 0.0) || !(c.d1 >= 0.0)) {
    throw DomainError("bracket constants must be positive");
  }
  if (!(c.eta1 < c.sigma_psi / (2.0 * c.L))) throw RegimeViolation("bracket needs eta1 < sigma_Psi / (2 L)");
  if (!(c.sigma_f * c.eta1 < 2.0)) throw RegimeViolation("bracket needs sigma_F eta1 < 2");
  const double lo = 1.0 - 2.0 * c.L * c.eta1 / c.sigma_psi;
  const double hi = 1.0 - 0.5 * c.sigma_f * c.eta1;
  if (lo > hi) throw DomainError("inconsistent constants: lower contraction exceeds upper");
  BoundBracket b{steps, {}, {}, c};
  for (std::uint64_t T : steps) {
    b.lower.push_back(std::pow(lo, static_cast<double>(T)) * c.d1);
    b.upper.push_back(std::pow(hi, static_cast<double>(T)) * c.d1);
  }
  return b;
}

/// exp(-2a sum_{t=t0+1}^{T} eta_t) D_ref, certified while eta_t <= 1/(3a) for t >= t0.
[[nodiscard]] inline double nonconvergence_floor(double a, const StepSchedule& schedule, double d_ref, std::uint64_t t0,
                                                 std::uint64_t T) {
  if (!(a > 0.0)) throw DomainError("floor constant a must be positive");
  if (!(d_ref >= 0.0)) throw DomainError("reference distance must be nonnegative");
  if (schedule.sup_from(t0) > 1.0 / (3.0 * a)) {
    throw RegimeViolation("nonconvergence floor needs eta_t <= 1/(3a) from t0 on");
  }
  return std::exp(-2.0 * a * schedule.partial_sum(t0 + 1, T)) * d_ref;
}

// ------------------------------------------------------------ identities

/// Bregman distance of 1/2 ||.||_q^2 for any q > 1.
[[nodiscard]] inline double norm_square_bregman(double q, const Vector& target, const Vector& base) {
  const double nt = p_norm(target, q);
  const double nb = p_norm(base, q);
  return 0.5 * nt * nt - 0.5 * nb * nb - inner(target - base, norm_square_gradient(base, q));
}

/// |E D(w*, w_next) - D(w*, w) - eta <w* - w, grad F(w)> - E D(w, w_next)|, all
/// expectations exact over the discrete support.
[[nodiscard]] inline double key_identity_residual(const MirrorMap& map, const LossModel& model,
                                                  const SampleSource& source, const Vector& w_star, const Vector& w,
                                                  double eta) {
  const auto& support = source.support();
  double next_to_opt = 0.0;
  double step_len = 0.0;
  for (const auto& a : support.atoms) {
    const Vector next = omd_step(map, model, w, a.z, eta);
    next_to_opt += a.prob * bregman(map, w_star, next).value;
    step_len += a.prob * bregman(map, w, next).value;
  }
  const double lhs = next_to_opt - bregman(map, w_star, w).value;
  const double rhs = eta * inner(w_star - w, population_gradient(source, model, w)) + step_len;
  return std::abs(lhs - rhs);
}

/// |D_{Psi_p}(w, w~) - D_{Psi_p*}(grad Psi_p(w~), grad Psi_p(w))|.
[[nodiscard]] inline double duality_residual(double p, const Vector& w, const Vector& w_tilde) {
  if (!(p > 1.0 && p <= 2.0)) throw DomainError("duality_residual needs 1 < p <= 2");
  const double q = dual_exponent(p);
  const double primal = norm_square_bregman(p, w, w_tilde);
  const double dual = norm_square_bregman(q, norm_square_gradient(w_tilde, p), norm_square_gradient(w, p));
  return std::abs(primal - dual);
}

/// |D(w, w~) + D(w~, w) - <w - w~, grad Psi(w) - grad Psi(w~)>|.
[[nodiscard]] inline double bregman_sum_residual(const MirrorMap& map, const Vector& w, const Vector& w_tilde) {
  const double lhs = bregman(map, w, w_tilde).value + bregman(map, w_tilde, w).value;
  const double rhs = inner(w - w_tilde, psi_grad(map, w) - psi_grad(map, w_tilde));
  return std::abs(lhs - rhs);
}

/// | ||grad Psi_p(w)||_{p*} - ||w||_p |.
[[nodiscard]] inline double gradient_norm_residual(double p, const Vector& w) {
  return std::abs(p_norm(norm_square_gradient(w, p), dual_exponent(p)) - p_norm(w, p));
}

/// Upper bound on D_{Psi_p}(w~, w) in terms of ||w~ - w||_p; returns bound - D.
[[nodiscard]] inline double psip_upper_slack(double p, const Vector& w_tilde, const Vector& w) {
  const double nt = p_norm(w_tilde, p);
  const double nd = p_norm(w_tilde - w, p);
  const double bound = (std::pow(2.0 * nt, 2.0 - p) + std::pow(nt, p - 1.0) + 1.0) *
                       (nd * nd + std::pow(nd, std::min(p, 3.0 - p)));
  return bound - norm_square_bregman(p, w_tilde, w);
}

/// ||w~ - w||_p^2 - B_p Omega_p(D_{Psi_p}(w~, w)) for 1 < p < 2.
[[nodiscard]] inline double psip_control_slack(double p, const Vector& w_tilde, const Vector& w) {
  const double nd = p_norm(w_tilde - w, p);
  const double d = std::max(0.0, norm_square_bregman(p, w_tilde, w));
  return nd * nd - b_p_constant(p, p_norm(w_tilde, p)) * omega_p(p, d);
}

/// <w - w~, g(w) - g(w~)> - ||g(w) - g(w~)||_*^2 / L with g = grad f(., z).
[[nodiscard]] inline double cocoercivity_margin(const LossModel& model, const Sample& z, const Vector& w,
                                                const Vector& w_tilde, double L,
                                                const NormSpec& norm = NormSpec::euclidean()) {
  if (!model.loss.convex()) throw DomainError("co-coercivity needs a convex loss");
  if (!(L > 0.0)) throw DomainError("co-coercivity needs L > 0");
  const Vector diff = sample_gradient(model, w, z) - sample_gradient(model, w_tilde, z);
  const double n = dual_norm(diff, norm);
  return inner(w - w_tilde, diff) - n * n / L;
}

// ---------------------------------------------------- non-smoothness witness

/// D_{Psi_p}(w~, w) / ||w - w~||_p^2 for w = (a+1, a-1, ...), w~ = (a-1, a+1, ...),
/// with a trailing coordinate a on both when d is odd.
[[nodiscard]] inline double nonsmoothness_witness(double p, std::size_t d, double a) {
  if (!(p > 1.0 && p < 2.0)) throw DomainError("witness needs 1 < p < 2");
  if (d < 2) throw DomainError("witness needs d >= 2");
  if (!(a >= 1.0)) throw DomainError("witness needs a >= 1");
  Vector w(d);
  Vector wt(d);
  const std::size_t paired = d - d % 2;
  for (std::size_t j = 0; j < paired; ++j) {
    w[j] = j % 2 == 0 ? a + 1.0 : a - 1.0;
    wt[j] = j % 2 == 0 ? a - 1.0 : a + 1.0;
  }
  if (d % 2 == 1) {
    w[d - 1] = a;
    wt[d - 1] = a;
  }
  const double n = p_norm(w - wt, p);
  return norm_square_bregman(p, wt, w) / (n * n);
}

/// Same ratio for the near-axis pair w = e1 + e2/a, w~ = e1 - e2/a.
[[nodiscard]] inline double nonsmoothness_axis_witness(double p, std::size_t d, double a) {
  if (!(p > 1.0 && p < 2.0)) throw DomainError("witness needs 1 < p < 2");
  if (d < 2) throw DomainError("witness needs d >= 2");
  if (!(a >= 1.0)) throw DomainError("witness needs a >= 1");
  Vector w(d);
  Vector wt(d);
  w[0] = wt[0] = 1.0;
  w[1] = 1.0 / a;
  wt[1] = -1.0 / a;
  const double n = p_norm(w - wt, p);
  return norm_square_bregman(p, wt, w) / (n * n);
}

// ------------------------------------------------------------------ verdicts

enum class TheoremTag {
  LinearRate,
  OneOverT,
  LowerRate,
  Sufficiency,
  NecessityProbe,
  ConstantProbe,
  AlmostSure,
};

enum class Verdict { Pass, Fail, Inconclusive };

[[nodiscard]] inline std::string_view to_string(TheoremTag tag) {
  switch (tag) {
    case TheoremTag::LinearRate: return "Thm3-linear-rate";
    case TheoremTag::OneOverT: return "Thm2b-rate";
    case TheoremTag::LowerRate: return "Thm2a-lower-rate";
    case TheoremTag::Sufficiency: return "Thm2-sufficiency";
    case TheoremTag::NecessityProbe: return "Thm2-necessity-probe";
    case TheoremTag::ConstantProbe: return "Thm2-constant-probe";
    case TheoremTag::AlmostSure: return "Thm4-as";
  }
  return "unknown";
}

[[nodiscard]] inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

[[nodiscard]] inline TheoremTag parse_theorem_tag(std::string_view s) {
  for (auto tag : {TheoremTag::LinearRate, TheoremTag::OneOverT, TheoremTag::LowerRate, TheoremTag::Sufficiency,
                   TheoremTag::NecessityProbe, TheoremTag::ConstantProbe, TheoremTag::AlmostSure}) {
    if (to_string(tag) == s) return tag;
  }
  throw DomainError("unknown theorem tag '" + std::string(s) + "'");
}

/// Reference checkpoint each rule compares against unless the experiment overrides it.
/// For the necessity probe it is t0.
[[nodiscard]] inline std::uint64_t default_ref_t(TheoremTag tag) {
  switch (tag) {
    case TheoremTag::LowerRate: return 256;
    case TheoremTag::NecessityProbe: return 1;
    case TheoremTag::AlmostSure: return 16;
    default: return 8;
  }
}

/// Constants derived from the experiment's specs.
struct ExperimentConstants {
  double sigma_psi = 1.0;
  std::optional<double> l_psi;
  double L = 1.0;  // smoothness of f(., z), sharp bound for least squares
  double radius = 1.0;
  std::optional<double> sigma_f;  // Bregman strong convexity of F, when Psi is strongly smooth
  double a = 2.0;                 // 2 L / sigma_Psi
  double d1 = 0.0;                // D(w*, w1)
  VarianceClass variance = VarianceClass::PositiveVariance;
};

struct ExperimentResult {
  ExpectationCurve curve;
  std::vector<std::vector<double>> per_run;
  std::size_t diverged_count = 0;
  ExperimentConstants constants;
  StepSchedule schedule = StepSchedule::constant(0.1);
  std::uint64_t T = 1;
  std::uint64_t fit_t_min = 32;
  std::uint64_t ref_t = 0;  // 0: the tag's default
};

struct VerdictReport {
  Verdict verdict;
  std::string detail;
};

namespace detail {

/// Three-way comparison of a measured `value` against `threshold` for the claim
/// value <= threshold, with a 2 std_err band.
inline Verdict claim_at_most(double value, double threshold, double se) {
  if (value + 2.0 * se <= threshold) return Verdict::Pass;
  if (value - 2.0 * se > threshold) return Verdict::Fail;
  return Verdict::Inconclusive;
}

inline Verdict combine(std::initializer_list<Verdict> vs) {
  bool inconclusive = false;
  for (auto v : vs) {
    if (v == Verdict::Fail) return Verdict::Fail;
    inconclusive = inconclusive || v == Verdict::Inconclusive;
  }
  return inconclusive ? Verdict::Inconclusive : Verdict::Pass;
}

inline Verdict slope_in_band(const RateFit& f, double lo, double hi) {
  const double m = 2.0 * f.slope_std_err;
  if (f.slope - m >= lo && f.slope + m <= hi) return Verdict::Pass;
  if (f.slope + m < lo || f.slope - m > hi) return Verdict::Fail;
  return Verdict::Inconclusive;
}

inline std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace detail

/// Applies the acceptance rule registered for `tag` to a finished experiment.
[[nodiscard]] inline VerdictReport theorem_verdict(const ExperimentResult& r, TheoremTag tag) {
  using detail::num;
  const auto& curve = r.curve;
  if (curve.points.empty()) throw DomainError("empty curve");
  const std::uint64_t ref = r.ref_t != 0 ? r.ref_t : default_ref_t(tag);
  const CurvePoint& last = curve.points.back();

  switch (tag) {
    case TheoremTag::LinearRate: {
      if (!r.constants.sigma_f) throw Unsupported("linear-rate bracket needs a strongly smooth map");
      const auto* k = std::get_if<ConstantStep>(&r.schedule.kind());
      if (!k) throw RegimeViolation("linear-rate bracket needs a constant schedule");
      const BracketConstants bc{r.constants.sigma_psi, r.constants.L, *r.constants.sigma_f, k->eta, r.constants.d1};
      const RateFit fit = fit_linear_rate(curve, r.fit_t_min, r.T);
      const double lo = std::log(1.0 - 2.0 * bc.L * bc.eta1 / bc.sigma_psi) - 0.02;
      const double hi = std::log(1.0 - 0.5 * bc.sigma_f * bc.eta1) + 0.02;
      Verdict v = detail::slope_in_band(fit, lo, hi);
      std::size_t outside = 0;
      for (const auto& p : curve.points) {
        if (p.t < r.fit_t_min) continue;
        const auto b = linear_rate_bracket(bc, {p.t - 1});
        const Verdict below_upper = detail::claim_at_most(p.mean, b.upper[0], p.std_err);
        const Verdict above_lower = detail::claim_at_most(-p.mean, -b.lower[0], p.std_err);
        if (below_upper == Verdict::Fail || above_lower == Verdict::Fail) ++outside;
        v = detail::combine({v, below_upper, above_lower});
      }
      return {v, "slope=" + num(fit.slope) + " band=[" + num(lo) + "," + num(hi) + "] points_outside_bracket=" +
                     std::to_string(outside)};
    }
    case TheoremTag::OneOverT: {
      const RateFit fit = fit_rate(curve, r.fit_t_min, r.T);
      Verdict v = detail::slope_in_band(fit, -1.25, -0.75);
      if (fit.r_squared < 0.95) v = Verdict::Fail;
      return {v, "slope=" + num(fit.slope) + " r2=" + num(fit.r_squared)};
    }
    case TheoremTag::LowerRate: {
      const CurvePoint& base = curve.at(ref);
      const double target = 0.5 * static_cast<double>(ref) * base.mean;
      Verdict v = Verdict::Pass;
      double worst = std::numeric_limits<double>::infinity();
      for (const auto& p : curve.points) {
        if (p.t < ref) continue;
        const double scaled = static_cast<double>(p.t) * p.mean;
        const double se = std::hypot(static_cast<double>(p.t) * p.std_err, 0.5 * static_cast<double>(ref) * base.std_err);
        worst = std::min(worst, scaled);
        v = detail::combine({v, detail::claim_at_most(target, scaled, se)});
      }
      return {v, "min_t_mean=" + num(worst) + " threshold=" + num(target)};
    }
    case TheoremTag::Sufficiency: {
      const CurvePoint& base = curve.at(ref);
      const double se = std::hypot(last.std_err, 0.1 * base.std_err);
      return {detail::claim_at_most(last.mean, 0.1 * base.mean, se),
              "ratio=" + num(last.mean / base.mean) + " threshold=0.1"};
    }
    case TheoremTag::NecessityProbe: {
      const std::uint64_t t0 = ref;
      const CurvePoint& base = curve.at(t0 + 1);
      // The floor bounds E D(w*, w_{T'+1}) by the step sum up to T'; the last iterate is w_T.
      const double floor = nonconvergence_floor(r.constants.a, r.schedule, base.mean, t0, r.T - 1);
      const double scale = base.mean > 0.0 ? floor / base.mean : 0.0;
      const double se = std::hypot(last.std_err, 0.9 * scale * base.std_err);
      return {detail::claim_at_most(0.9 * floor, last.mean, se),
              "mean_T=" + num(last.mean) + " floor=" + num(floor)};
    }
    case TheoremTag::ConstantProbe: {
      const CurvePoint& base = curve.at(ref);
      const double threshold = 0.25 * base.mean;
      Verdict v = Verdict::Pass;
      double lowest = std::numeric_limits<double>::infinity();
      for (const auto& p : curve.points) {
        if (p.t < r.fit_t_min) continue;
        lowest = std::min(lowest, p.mean);
        v = detail::combine({v, detail::claim_at_most(threshold, p.mean, std::hypot(p.std_err, 0.25 * base.std_err))});
      }
      return {v, "min_plateau_mean=" + num(lowest) + " threshold=" + num(threshold)};
    }
    case TheoremTag::AlmostSure: {
      if (r.per_run.empty()) throw DomainError("almost-sure rule needs per-run values");
      std::size_t k_ref = curve.points.size();
      std::size_t k_mid = curve.points.size();
      for (std::size_t k = 0; k < curve.points.size(); ++k) {
        if (curve.points[k].t == ref) k_ref = k;
        if (k_mid == curve.points.size() && curve.points[k].t >= r.fit_t_min) k_mid = k;
      }
      if (k_ref == curve.points.size()) throw DomainError("no checkpoint at t = " + std::to_string(ref));
      if (k_mid == curve.points.size()) throw DomainError("no checkpoint at or after fit_t_min");
      const std::size_t k_last = curve.points.size() - 1;
      std::size_t good = 0;
      double max_mid = 0.0;
      double max_last = 0.0;
      for (const auto& row : r.per_run) {
        if (row[k_last] <= 0.05 * row[k_ref]) ++good;
        max_mid = std::max(max_mid, row[k_mid]);
        max_last = std::max(max_last, row[k_last]);
      }
      const double frac = static_cast<double>(good) / static_cast<double>(r.per_run.size());
      const bool ok = frac >= 0.95 && max_last < max_mid;
      return {ok ? Verdict::Pass : Verdict::Fail,
              "fraction=" + num(frac) + " max_mid=" + num(max_mid) + " max_T=" + num(max_last)};
    }
  }
  throw DomainError("unknown theorem tag");
}

/// The step-size regime each tag needs before it may run. Probe tags need the
/// violated predicate they probe.
inline void assert_regime(TheoremTag tag, const ExperimentConstants& c, const StepSchedule& s, double kappa,
                          bool convex) {
  if (!convex) throw RegimeViolation("theorem experiments need a convex loss");
  if (!(kappa > 0.0)) throw RegimeViolation("kappa must be positive");
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw RegimeViolation(what);
  };
  switch (tag) {
    case TheoremTag::LinearRate: {
      need(c.variance == VarianceClass::ZeroVariance, "linear rate needs a zero-variance source");
      need(c.l_psi.has_value() && c.sigma_f.has_value(), "linear rate needs a strongly smooth map");
      const auto* k = std::get_if<ConstantStep>(&s.kind());
      need(k != nullptr, "linear rate needs a constant schedule");
      need(k->eta <= c.sigma_psi / ((2.0 + kappa) * c.L), "eta exceeds sigma_Psi / ((2 + kappa) L)");
      break;
    }
    case TheoremTag::OneOverT: {
      need(c.variance == VarianceClass::PositiveVariance, "1/T rate needs a positive-variance source");
      need(c.sigma_f.has_value(), "1/T rate needs sigma_F");
      const auto* k = std::get_if<TheoremRate>(&s.kind());
      need(k != nullptr, "1/T rate needs the schedule 4/((t+1) sigma_F)");
      need(k->sigma_f <= *c.sigma_f * (1.0 + 1e-12), "schedule sigma_F exceeds the certified sigma_F");
      break;
    }
    case TheoremTag::LowerRate:
      need(c.variance == VarianceClass::PositiveVariance, "lower rate needs a positive-variance source");
      need(c.l_psi.has_value(), "lower rate needs a strongly smooth map");
      need(s.limit_zero(), "lower rate needs eta_t -> 0");
      break;
    case TheoremTag::Sufficiency:
      need(s.limit_zero() && s.sum_infinite(), "sufficiency needs eta_t -> 0 and sum eta_t = inf");
      break;
    case TheoremTag::NecessityProbe:
      need(c.variance == VarianceClass::PositiveVariance, "necessity probe needs a positive-variance source");
      need(!s.sum_infinite(), "necessity probe needs sum eta_t < inf");
      break;
    case TheoremTag::ConstantProbe:
      need(c.variance == VarianceClass::PositiveVariance, "constant-step probe needs a positive-variance source");
      need(!s.limit_zero(), "constant-step probe needs eta_t not tending to 0");
      break;
    case TheoremTag::AlmostSure:
      need(s.sum_infinite() && s.sum_squares_finite(), "almost-sure rule needs sum eta = inf and sum eta^2 < inf");
      break;
  }
}

}  // namespace omd
