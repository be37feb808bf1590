#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "omd/data_stream.hpp"
#include "omd/error.hpp"
#include "omd/geometry.hpp"
#include "omd/loss.hpp"
#include "omd/mirror_map.hpp"
#include "omd/rng.hpp"

namespace omd {

struct ConstantStep {
  double eta;
  friend bool operator==(const ConstantStep&, const ConstantStep&) = default;
};

/// eta_t = c * t^{-theta}
struct PolynomialDecay {
  double c;
  double theta;
  friend bool operator==(const PolynomialDecay&, const PolynomialDecay&) = default;
};

/// eta_t = 4 / ((t + 1) sigma_F)
struct TheoremRate {
  double sigma_f;
  friend bool operator==(const TheoremRate&, const TheoremRate&) = default;
};

using ScheduleKind = std::variant<ConstantStep, PolynomialDecay, TheoremRate>;

class StepSchedule {
 public:
  explicit StepSchedule(ScheduleKind kind) : kind_(kind) {
    std::visit(detail::overloaded{
                   [](const ConstantStep& k) { require_positive(k.eta, "constant step"); },
                   [](const PolynomialDecay& k) {
                     require_positive(k.c, "decay coefficient c");
                     if (!(k.theta >= 0.0) || !std::isfinite(k.theta)) throw DomainError("decay exponent must be >= 0");
                   },
                   [](const TheoremRate& k) { require_positive(k.sigma_f, "sigma_F"); },
               },
               kind_);
  }

  static StepSchedule constant(double eta) { return StepSchedule(ConstantStep{eta}); }
  static StepSchedule polynomial(double c, double theta) { return StepSchedule(PolynomialDecay{c, theta}); }
  static StepSchedule theorem_rate(double sigma_f) { return StepSchedule(TheoremRate{sigma_f}); }

  [[nodiscard]] const ScheduleKind& kind() const noexcept { return kind_; }

  [[nodiscard]] double operator()(std::uint64_t t) const {
    if (t == 0) throw DomainError("step index starts at t = 1");
    const double tt = static_cast<double>(t);
    return std::visit(detail::overloaded{
                          [](const ConstantStep& k) { return k.eta; },
                          [&](const PolynomialDecay& k) { return k.c * std::pow(tt, -k.theta); },
                          [&](const TheoremRate& k) { return 4.0 / ((tt + 1.0) * k.sigma_f); },
                      },
                      kind_);
  }

  [[nodiscard]] bool limit_zero() const {
    return std::visit(detail::overloaded{
                          [](const ConstantStep&) { return false; },
                          [](const PolynomialDecay& k) { return k.theta > 0.0; },
                          [](const TheoremRate&) { return true; },
                      },
                      kind_);
  }

  [[nodiscard]] bool sum_infinite() const {
    if (const auto* k = std::get_if<PolynomialDecay>(&kind_)) return k->theta <= 1.0;
    return true;
  }

  [[nodiscard]] bool sum_squares_finite() const {
    return std::visit(detail::overloaded{
                          [](const ConstantStep&) { return false; },
                          [](const PolynomialDecay& k) { return k.theta > 0.5; },
                          [](const TheoremRate&) { return true; },
                      },
                      kind_);
  }

  /// sum_{t=from}^{to} eta_t; 0 when from > to.
  [[nodiscard]] double partial_sum(std::uint64_t from, std::uint64_t to) const {
    double s = 0.0;
    for (std::uint64_t t = std::max<std::uint64_t>(from, 1); t <= to; ++t) s += (*this)(t);
    return s;
  }

  /// sup_{t >= from} eta_t. Every kind is nonincreasing in t.
  [[nodiscard]] double sup_from(std::uint64_t from) const { return (*this)(std::max<std::uint64_t>(from, 1)); }

  [[nodiscard]] std::string name() const {
    return std::visit(detail::overloaded{
                          [](const ConstantStep&) { return std::string("constant"); },
                          [](const PolynomialDecay&) { return std::string("polynomial"); },
                          [](const TheoremRate&) { return std::string("theorem_rate"); },
                      },
                      kind_);
  }

  friend bool operator==(const StepSchedule&, const StepSchedule&) = default;

 private:
  static void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive and finite");
  }

  ScheduleKind kind_;
};

/// grad Psi(w_next) = grad Psi(w) - eta grad f(w, z).
[[nodiscard]] inline Vector omd_step(const MirrorMap& map, const LossModel& model, const Vector& w, const Sample& z,
                                     double eta) {
  if (!(eta > 0.0)) throw DomainError("step size must be positive");
  Vector dual = psi_grad(map, w);
  dual.axpy(-eta, sample_gradient(model, w, z));
  return psi_grad_inverse(map, dual);
}

/// Everything a trajectory needs; w_star is computed beforehand.
struct ExperimentSetup {
  MirrorMap map = MirrorMap::euclidean();
  LossModel model;
  SampleSource source{DiscreteFinite{{Atom{Sample{Vector{1.0}, 0.0}, 1.0}}}, NormSpec::euclidean()};
  StepSchedule schedule = StepSchedule::constant(0.1);
  Vector w1;
  Vector w_star;
  std::uint64_t T = 1;
  std::vector<std::uint64_t> checkpoints;
  bool exclude_diverged = false;
};

/// {1, 2, 4, ..., T} together with T itself.
[[nodiscard]] inline std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t T) {
  if (T == 0) throw DomainError("T must be at least 1");
  std::vector<std::uint64_t> out;
  for (std::uint64_t t = 1; t <= T; t *= 2) {
    out.push_back(t);
    if (t > T / 2) break;
  }
  if (out.back() != T) out.push_back(T);
  return out;
}

inline void validate_checkpoints(const std::vector<std::uint64_t>& cps, std::uint64_t T) {
  if (cps.empty()) throw DomainError("at least one checkpoint is required");
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i] < 1 || cps[i] > T) throw DomainError("checkpoint outside [1, T]");
    if (i > 0 && cps[i] <= cps[i - 1]) throw DomainError("checkpoints must be strictly increasing");
  }
}

struct TrajectoryPoint {
  std::uint64_t t;
  double bregman_to_optimum;
  double iterate_norm;

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

struct Trajectory {
  std::vector<TrajectoryPoint> checkpoints;
  std::uint64_t seed = 0;
  Vector final_iterate;
  bool diverged = false;
  std::uint64_t diverged_at = 0;  // first t whose iterate tripped the guard

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

inline constexpr double kDivergenceNorm = 1e12;

/// Iterates w_1, ..., w_T and records D(w*, w_t) at the checkpoints. A run whose
/// iterate leaves the 1e12 ball (or turns non-finite) stops; its later
/// checkpoints read +inf.
[[nodiscard]] inline Trajectory run_trajectory(const ExperimentSetup& s, std::uint64_t seed) {
  if (s.T < 1) throw DomainError("T must be at least 1");
  validate_checkpoints(s.checkpoints, s.T);
  s.w1.require_same_size(s.w_star);
  if (s.w1.size() != s.source.dim()) throw DimensionMismatch(s.w1.size(), s.source.dim());

  const NormSpec& norm = s.map.reference_norm();
  constexpr double inf = std::numeric_limits<double>::infinity();
  Trajectory tr;
  tr.seed = seed;
  tr.checkpoints.reserve(s.checkpoints.size());
  CounterRng rng(seed);
  Vector w = s.w1;
  std::size_t next = 0;
  for (std::uint64_t t = 1; t <= s.T; ++t) {
    if (next < s.checkpoints.size() && s.checkpoints[next] == t) {
      tr.checkpoints.push_back({t, bregman(s.map, s.w_star, w).value, p_norm(w, norm)});
      ++next;
    }
    if (t == s.T) break;
    const Sample z = draw(s.source, rng);
    w = omd_step(s.map, s.model, w, z, s.schedule(t));
    if (!w.all_finite() || p_norm(w, norm) > kDivergenceNorm) {
      tr.diverged = true;
      tr.diverged_at = t + 1;
      for (; next < s.checkpoints.size(); ++next) tr.checkpoints.push_back({s.checkpoints[next], inf, inf});
      break;
    }
  }
  tr.final_iterate = w;
  return tr;
}

struct CurvePoint {
  std::uint64_t t;
  double mean;
  double std_err;
  std::size_t run_count;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

struct ExpectationCurve {
  std::vector<CurvePoint> points;

  [[nodiscard]] const CurvePoint& at(std::uint64_t t) const {
    for (const auto& p : points) {
      if (p.t == t) return p;
    }
    throw DomainError("no checkpoint at t = " + std::to_string(t));
  }
  [[nodiscard]] bool has(std::uint64_t t) const {
    return std::any_of(points.begin(), points.end(), [t](const CurvePoint& p) { return p.t == t; });
  }

  friend bool operator==(const ExpectationCurve&, const ExpectationCurve&) = default;
};

struct MonteCarloResult {
  ExpectationCurve curve;
  /// per_run[i][k]: D(w*, w_t) of run i at checkpoint k, in run-index order.
  std::vector<std::vector<double>> per_run;
  std::vector<bool> diverged;
  std::size_t diverged_count = 0;
};

/// OMD_THREADS if set to a positive integer, else the hardware concurrency.
[[nodiscard]] inline unsigned default_thread_count() {
  if (const char* env = std::getenv("OMD_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Run i uses seed base_seed + i. Runs are scheduled on `threads` workers; the
/// fold over runs happens afterwards in index order, so the result does not
/// depend on the interleaving.
[[nodiscard]] inline MonteCarloResult monte_carlo(const ExperimentSetup& s, std::size_t n_runs, std::uint64_t base_seed,
                                                  unsigned threads = default_thread_count()) {
  if (n_runs < 2) throw DomainError("Monte Carlo needs at least 2 runs");
  validate_checkpoints(s.checkpoints, s.T);
  std::vector<Trajectory> runs(n_runs);
  std::atomic<std::size_t> cursor{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i; !failed && (i = cursor.fetch_add(1)) < n_runs;) {
      try {
        runs[i] = run_trajectory(s, base_seed + i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
      }
    }
  };
  const unsigned n_threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), n_runs));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  MonteCarloResult out;
  out.per_run.reserve(n_runs);
  out.diverged.reserve(n_runs);
  for (const auto& r : runs) {
    std::vector<double> row;
    row.reserve(r.checkpoints.size());
    for (const auto& c : r.checkpoints) row.push_back(c.bregman_to_optimum);
    out.per_run.push_back(std::move(row));
    out.diverged.push_back(r.diverged);
    out.diverged_count += r.diverged ? 1 : 0;
  }
  if (out.diverged_count == n_runs) throw AllRunsDiverged("all " + std::to_string(n_runs) + " runs diverged");

  const std::size_t counted = s.exclude_diverged ? n_runs - out.diverged_count : n_runs;
  for (std::size_t k = 0; k < s.checkpoints.size(); ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n_runs; ++i) {
      if (s.exclude_diverged && out.diverged[i]) continue;
      sum += out.per_run[i][k];
    }
    const double mean = sum / static_cast<double>(counted);
    double ss = 0.0;
    for (std::size_t i = 0; i < n_runs; ++i) {
      if (s.exclude_diverged && out.diverged[i]) continue;
      const double d = out.per_run[i][k] - mean;
      ss += d * d;
    }
    double se = 0.0;
    if (counted >= 2) se = std::sqrt(ss / static_cast<double>(counted - 1) / static_cast<double>(counted));
    if (!std::isfinite(mean)) se = std::numeric_limits<double>::infinity();
    out.curve.points.push_back({s.checkpoints[k], mean, se, counted});
  }
  return out;
}

}  // namespace omd
