#pragma once

#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "omd/config.hpp"
#include "omd/data_stream.hpp"
#include "omd/diagnostics.hpp"
#include "omd/engine.hpp"
#include "omd/error.hpp"
#include "omd/mirror_map.hpp"

namespace omd {

/// A config with every constant worked out, ready to run.
struct ResolvedExperiment {
  ExperimentConfig config;
  ExperimentSetup setup;
  ExperimentConstants constants;
};

namespace detail {

inline StepSchedule make_schedule(const ScheduleSpec& s, const std::optional<double>& sigma_f) {
  switch (s.kind) {
    case ScheduleSpec::Kind::Constant: return StepSchedule::constant(s.eta);
    case ScheduleSpec::Kind::Polynomial: return StepSchedule::polynomial(s.c, s.theta);
    case ScheduleSpec::Kind::TheoremRate:
      if (s.sigma_f) return StepSchedule::theorem_rate(*s.sigma_f);
      if (!sigma_f) throw ConfigError("schedule.sigma_f = auto, but sigma_F is not available for this map");
      return StepSchedule::theorem_rate(*sigma_f);
  }
  throw ConfigError("unknown schedule");
}

inline std::vector<std::uint64_t> required_checkpoints(TheoremTag tag, std::uint64_t ref) {
  switch (tag) {
    case TheoremTag::LowerRate:
    case TheoremTag::Sufficiency:
    case TheoremTag::ConstantProbe:
    case TheoremTag::AlmostSure: return {ref};
    case TheoremTag::NecessityProbe: return {ref + 1};
    default: return {};
  }
}

}  // namespace detail

/// Builds the setup and derives sigma_Psi, L_Psi, L, R, sigma_F, a, D1 and the
/// variance class. Errors in the description surface as ConfigError; a theorem
/// tag run outside its regime raises RegimeViolation.
[[nodiscard]] inline ResolvedExperiment resolve(const ExperimentConfig& cfg) {
  validate_config(cfg);
  try {
    ResolvedExperiment r{cfg, {}, {}};
    const MirrorMap map(cfg.map);
    SampleSource source(cfg.source, map.reference_norm(), cfg.radius);
    auto& k = r.constants;
    k.sigma_psi = strong_convexity_modulus(map);
    k.l_psi = smoothness_modulus(map);
    k.radius = source.radius();
    k.L = sharp_smoothness_bound(cfg.model, k.radius);
    k.a = 2.0 * k.L / k.sigma_psi;

    const Vector w_star = cfg.w_star ? *cfg.w_star : minimizer(source, cfg.model);
    if (cfg.model.loss.convex()) k.variance = classify_variance(source, cfg.model, w_star);

    if (k.l_psi) {
      // F is mu-strongly convex in l2 with mu = lambda_min(C_X) + 2 lambda (least
      // squares) or 2 lambda; Bregman form sigma_F = 2 mu / L_Psi.
      double mu = 2.0 * cfg.model.lambda;
      if (cfg.model.loss.kind == LossKind::LeastSquares) mu += covariance_spectrum(source).min;
      if (mu > 1e-12) k.sigma_f = 2.0 * mu / *k.l_psi;
    }

    r.setup.map = map;
    r.setup.model = cfg.model;
    r.setup.source = source;
    r.setup.schedule = detail::make_schedule(cfg.schedule, k.sigma_f);
    r.setup.w1 = cfg.w1;
    r.setup.w_star = w_star;
    r.setup.T = cfg.T;
    r.setup.checkpoints = cfg.checkpoints ? *cfg.checkpoints : geometric_checkpoints(cfg.T);
    r.setup.exclude_diverged = cfg.exclude_diverged;
    k.d1 = bregman(map, w_star, cfg.w1).value;

    if (cfg.theorem_tag) {
      const TheoremTag tag = *cfg.theorem_tag;
      const std::uint64_t ref = cfg.ref_t != 0 ? cfg.ref_t : default_ref_t(tag);
      for (std::uint64_t t : detail::required_checkpoints(tag, ref)) {
        if (std::find(r.setup.checkpoints.begin(), r.setup.checkpoints.end(), t) == r.setup.checkpoints.end()) {
          throw ConfigError(std::string(to_string(tag)) + " needs a checkpoint at t = " + std::to_string(t));
        }
      }
      if (!cfg.violation_probe) {
        assert_regime(tag, k, r.setup.schedule, cfg.kappa, cfg.model.loss.convex());
        if (tag == TheoremTag::NecessityProbe && r.setup.schedule.sup_from(ref) > 1.0 / (3.0 * k.a)) {
          throw RegimeViolation("necessity probe needs eta_t <= 1/(3a) from t0 on");
        }
      }
    }
    return r;
  } catch (const ConfigError&) {
    throw;
  } catch (const RegimeViolation&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

struct RunOutput {
  ExperimentResult result;
  std::optional<VerdictReport> verdict;
};

[[nodiscard]] inline RunOutput run_experiment(const ResolvedExperiment& r, unsigned threads = default_thread_count()) {
  const MonteCarloResult mc = monte_carlo(r.setup, r.config.n_runs, r.config.base_seed, threads);
  RunOutput out;
  out.result.curve = mc.curve;
  out.result.per_run = mc.per_run;
  out.result.diverged_count = mc.diverged_count;
  out.result.constants = r.constants;
  out.result.schedule = r.setup.schedule;
  out.result.T = r.config.T;
  out.result.fit_t_min = r.config.fit_t_min;
  out.result.ref_t = r.config.ref_t;
  if (r.config.theorem_tag) out.verdict = theorem_verdict(out.result, *r.config.theorem_tag);
  return out;
}

[[nodiscard]] inline std::string curve_csv(const ExpectationCurve& curve) {
  std::string s = "t,mean,std_err,run_count\n";
  for (const auto& p : curve.points) {
    s += std::to_string(p.t) + ',' + format_double(p.mean) + ',' + format_double(p.std_err) + ',' +
         std::to_string(p.run_count) + '\n';
  }
  return s;
}

/// `key: value` lines; the same config and seeds give the same bytes.
[[nodiscard]] inline std::string report_text(const ResolvedExperiment& r, const RunOutput& out) {
  const auto& k = r.constants;
  const auto& s = r.setup.schedule;
  std::ostringstream o;
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("none"); };
  auto yes = [](bool b) { return b ? "true" : "false"; };
  o << "name: " << r.config.name << "\n";
  o << "map: " << r.setup.map.name() << "\n";
  o << "reference_norm_p: " << format_double(r.setup.map.reference_norm().p()) << "\n";
  o << "loss: " << to_string(r.setup.model.loss.kind) << "\n";
  o << "loss_lambda: " << format_double(r.setup.model.lambda) << "\n";
  o << "source: " << (r.setup.source.discrete() ? "discrete" : "gaussian") << "\n";
  o << "dim: " << r.setup.source.dim() << "\n";
  o << "radius: " << format_double(k.radius) << "\n";
  o << "schedule: " << s.name() << "\n";
  o << "eta_1: " << format_double(s(1)) << "\n";
  o << "limit_zero: " << yes(s.limit_zero()) << "\n";
  o << "sum_infinite: " << yes(s.sum_infinite()) << "\n";
  o << "sum_squares_finite: " << yes(s.sum_squares_finite()) << "\n";
  o << "sigma_psi: " << format_double(k.sigma_psi) << "\n";
  o << "l_psi: " << opt(k.l_psi) << "\n";
  o << "smoothness_L: " << format_double(k.L) << "\n";
  o << "sigma_f: " << opt(k.sigma_f) << "\n";
  o << "a: " << format_double(k.a) << "\n";
  o << "d1: " << format_double(k.d1) << "\n";
  o << "variance: " << (r.setup.model.loss.convex() ? to_string(k.variance) : "unclassified") << "\n";
  o << "w_star: " << format_vector(r.setup.w_star) << "\n";
  o << "T: " << r.config.T << "\n";
  o << "n_runs: " << r.config.n_runs << "\n";
  o << "base_seed: " << r.config.base_seed << "\n";
  o << "diverged_runs: " << out.result.diverged_count << "\n";
  o << "theorem_tag: " << (r.config.theorem_tag ? std::string(to_string(*r.config.theorem_tag)) : "none") << "\n";
  o << "violation_probe: " << yes(r.config.violation_probe) << "\n";
  if (out.verdict) {
    o << "verdict: " << to_string(out.verdict->verdict) << "\n";
    o << "verdict_detail: " << out.verdict->detail << "\n";
  } else {
    o << "verdict: none\n";
  }
  return o.str();
}

/// Rows `u,omega_{p1},...` for u = start + (stop - start) i / n, i = 0..n.
[[nodiscard]] inline std::string omega_table(const std::vector<double>& ps, double start, double stop, std::size_t n) {
  if (ps.empty()) throw DomainError("omega needs at least one p");
  if (!(start >= 0.0) || !(stop > start) || n == 0) throw DomainError("omega grid needs 0 <= start < stop and n >= 1");
  for (double p : ps) (void)tau_p(p);
  std::string s = "u";
  for (double p : ps) s += ",omega_" + format_double(p);
  s += '\n';
  for (std::size_t i = 0; i <= n; ++i) {
    const double u = i == n ? stop : start + (stop - start) * static_cast<double>(i) / static_cast<double>(n);
    s += format_double(u);
    for (double p : ps) s += ',' + format_double(omega_p(p, u));
    s += '\n';
  }
  return s;
}

}  // namespace omd
