#pragma once

#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "omd/data_stream.hpp"
#include "omd/diagnostics.hpp"
#include "omd/engine.hpp"
#include "omd/error.hpp"
#include "omd/geometry.hpp"
#include "omd/loss.hpp"
#include "omd/mirror_map.hpp"

namespace omd {

struct ScheduleSpec {
  enum class Kind { Constant, Polynomial, TheoremRate };
  Kind kind = Kind::Constant;
  double eta = 0.1;
  double c = 1.0;
  double theta = 1.0;
  std::optional<double> sigma_f;  // theorem_rate only; empty means derived from the experiment

  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

/// One experiment, as read from a flat `key = value` file.
struct ExperimentConfig {
  std::string name = "experiment";
  MirrorKind map = Euclidean{};
  LossModel model;
  SourceKind source;
  std::optional<double> radius;
  ScheduleSpec schedule;
  Vector w1;
  std::optional<Vector> w_star;  // required for non-convex losses
  std::uint64_t T = 1;
  std::optional<std::vector<std::uint64_t>> checkpoints;  // empty: geometric grid
  std::size_t n_runs = 100;
  std::uint64_t base_seed = 0;
  std::optional<TheoremTag> theorem_tag;
  bool violation_probe = false;
  double kappa = 1.0;
  bool exclude_diverged = false;
  std::uint64_t fit_t_min = 32;
  std::uint64_t ref_t = 0;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

// ------------------------------------------------------------ formatting

/// Shortest decimal text that reads back to the same double.
[[nodiscard]] inline std::string format_double(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

[[nodiscard]] inline std::string format_vector(const Vector& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += format_double(v[i]);
  }
  return s;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

class Reader {
 public:
  Reader(std::string key, std::size_t line) : key_(std::move(key)), line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("line " + std::to_string(line_) + ": " + key_ + ": " + what);
  }

  double real(std::string_view v) const {
    double out = 0.0;
    const auto* first = v.data();
    const auto* last = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (v.empty() || ec != std::errc() || ptr != last) fail("expected a number, got '" + std::string(v) + "'");
    if (!std::isfinite(out)) fail("number must be finite");
    return out;
  }

  std::uint64_t integer(std::string_view v) const {
    std::uint64_t out = 0;
    const auto* last = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), last, out);
    if (v.empty() || ec != std::errc() || ptr != last) fail("expected a nonnegative integer, got '" + std::string(v) + "'");
    return out;
  }

  bool boolean(std::string_view v) const {
    if (v == "true") return true;
    if (v == "false") return false;
    fail("expected true or false");
  }

  Vector vector(std::string_view v) const {
    std::vector<double> xs;
    for (auto part : split(v, ',')) xs.push_back(real(part));
    try {
      return Vector(std::move(xs));
    } catch (const Error& e) {
      fail(e.what());
    }
  }

 private:
  std::string key_;
  std::size_t line_;
};

}  // namespace detail

// ---------------------------------------------------------------- parsing

/// Checks that the config describes a runnable experiment; throws ConfigError.
inline void validate_config(const ExperimentConfig& c) {
  try {
    const MirrorMap map(c.map);
    const SampleSource source(c.source, map.reference_norm(), c.radius);
    source.check_labels_for(c.model.loss);
    if (c.w1.empty()) throw ConfigError("w1 is required");
    if (c.w1.size() != source.dim()) throw ConfigError("w1 dimension does not match the source");
    if (c.w_star && c.w_star->size() != source.dim()) throw ConfigError("w_star dimension does not match the source");
    if (!c.model.loss.convex() && !c.w_star) throw ConfigError("non-convex losses need an explicit w_star");
    if (c.T < 1) throw ConfigError("T must be at least 1");
    if (c.n_runs < 2) throw ConfigError("n_runs must be at least 2");
    if (c.checkpoints) validate_checkpoints(*c.checkpoints, c.T);
    if (!(c.kappa > 0.0)) throw ConfigError("kappa must be positive");
    switch (c.schedule.kind) {
      case ScheduleSpec::Kind::Constant: (void)StepSchedule::constant(c.schedule.eta); break;
      case ScheduleSpec::Kind::Polynomial: (void)StepSchedule::polynomial(c.schedule.c, c.schedule.theta); break;
      case ScheduleSpec::Kind::TheoremRate:
        if (c.schedule.sigma_f) (void)StepSchedule::theorem_rate(*c.schedule.sigma_f);
        break;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

[[nodiscard]] inline ExperimentConfig parse_config(std::string_view text) {
  struct Entry {
    std::string value;
    std::size_t line;
  };
  std::map<std::string, Entry, std::less<>> kv;
  std::vector<Entry> atoms;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (key == "source.atom") {
      atoms.push_back({value, line_no});
      continue;
    }
    if (!kv.emplace(key, Entry{value, line_no}).second) {
      throw ConfigError("line " + std::to_string(line_no) + ": duplicate key " + key);
    }
  }

  std::set<std::string, std::less<>> used;
  auto get = [&](std::string_view key) -> const Entry* {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    used.insert(std::string(key));
    return &it->second;
  };
  auto require = [&](std::string_view key) -> const Entry& {
    const Entry* e = get(key);
    if (!e) throw ConfigError("missing required key " + std::string(key));
    return *e;
  };
  auto reader = [](std::string_view key, const Entry& e) { return detail::Reader(std::string(key), e.line); };

  ExperimentConfig c;
  if (const auto* e = get("name")) {
    if (e->value.empty()) throw ConfigError("name must not be empty");
    c.name = e->value;
  }

  {
    const auto& e = require("map");
    if (e.value == "euclidean") {
      c.map = Euclidean{};
    } else if (e.value == "pnorm") {
      c.map = PNormDivergence{reader("map.p", require("map.p")).real(require("map.p").value)};
    } else if (e.value == "smoothed_l1") {
      const auto& eps = require("map.epsilon");
      const auto& lam = require("map.lambda");
      c.map = SmoothedL1{reader("map.epsilon", eps).real(eps.value), reader("map.lambda", lam).real(lam.value)};
    } else {
      reader("map", e).fail("unknown map '" + e.value + "'");
    }
  }

  {
    const auto& e = require("loss");
    Loss loss;
    try {
      loss.kind = parse_loss_kind(e.value);
    } catch (const Error& err) {
      reader("loss", e).fail(err.what());
    }
    double lambda = 0.0;
    if (const auto* l = get("loss.lambda")) lambda = reader("loss.lambda", *l).real(l->value);
    try {
      c.model = LossModel(loss, lambda);
    } catch (const Error& err) {
      throw ConfigError(err.what());
    }
  }

  {
    const auto& e = require("source");
    if (const auto* r = get("source.radius")) c.radius = reader("source.radius", *r).real(r->value);
    if (e.value == "discrete") {
      DiscreteFinite d;
      for (const auto& a : atoms) {
        const detail::Reader rd("source.atom", a.line);
        const auto parts = detail::split(a.value, ';');
        if (parts.size() != 3) rd.fail("expected 'x1,...,xd; y; prob'");
        d.atoms.push_back(Atom{Sample{rd.vector(parts[0]), rd.real(parts[1])}, rd.real(parts[2])});
      }
      if (d.atoms.empty()) throw ConfigError("discrete source needs at least one source.atom");
      c.source = std::move(d);
    } else if (e.value == "gaussian") {
      if (!atoms.empty()) throw ConfigError("source.atom only applies to discrete sources");
      const auto& wt = require("source.w_true");
      GaussianLinear g{reader("source.w_true", wt).vector(wt.value), 0.0, 1.0};
      if (const auto* n = get("source.noise_sd")) g.noise_sd = reader("source.noise_sd", *n).real(n->value);
      if (const auto* s = get("source.feature_scale")) g.feature_scale = reader("source.feature_scale", *s).real(s->value);
      c.source = std::move(g);
    } else {
      reader("source", e).fail("unknown source '" + e.value + "'");
    }
  }

  {
    const auto& e = require("schedule");
    if (e.value == "constant") {
      c.schedule.kind = ScheduleSpec::Kind::Constant;
      const auto& v = require("schedule.eta");
      c.schedule.eta = reader("schedule.eta", v).real(v.value);
    } else if (e.value == "polynomial") {
      c.schedule.kind = ScheduleSpec::Kind::Polynomial;
      const auto& cc = require("schedule.c");
      const auto& th = require("schedule.theta");
      c.schedule.c = reader("schedule.c", cc).real(cc.value);
      c.schedule.theta = reader("schedule.theta", th).real(th.value);
    } else if (e.value == "theorem_rate") {
      c.schedule.kind = ScheduleSpec::Kind::TheoremRate;
      const auto& s = require("schedule.sigma_f");
      if (s.value != "auto") c.schedule.sigma_f = reader("schedule.sigma_f", s).real(s.value);
    } else {
      reader("schedule", e).fail("unknown schedule '" + e.value + "'");
    }
  }

  {
    const auto& e = require("w1");
    c.w1 = reader("w1", e).vector(e.value);
  }
  if (const auto* e = get("w_star")) c.w_star = reader("w_star", *e).vector(e->value);
  {
    const auto& e = require("T");
    c.T = reader("T", e).integer(e.value);
  }
  if (const auto* e = get("checkpoints")) {
    if (e->value != "geometric") {
      std::vector<std::uint64_t> cps;
      const auto rd = reader("checkpoints", *e);
      for (auto part : detail::split(e->value, ',')) cps.push_back(rd.integer(part));
      c.checkpoints = std::move(cps);
    }
  }
  if (const auto* e = get("n_runs")) c.n_runs = reader("n_runs", *e).integer(e->value);
  if (const auto* e = get("base_seed")) c.base_seed = reader("base_seed", *e).integer(e->value);
  if (const auto* e = get("theorem_tag")) {
    if (e->value != "none") {
      try {
        c.theorem_tag = parse_theorem_tag(e->value);
      } catch (const Error& err) {
        reader("theorem_tag", *e).fail(err.what());
      }
    }
  }
  if (const auto* e = get("violation_probe")) c.violation_probe = reader("violation_probe", *e).boolean(e->value);
  if (const auto* e = get("kappa")) c.kappa = reader("kappa", *e).real(e->value);
  if (const auto* e = get("exclude_diverged")) c.exclude_diverged = reader("exclude_diverged", *e).boolean(e->value);
  if (const auto* e = get("fit_t_min")) c.fit_t_min = reader("fit_t_min", *e).integer(e->value);
  if (const auto* e = get("ref_t")) c.ref_t = reader("ref_t", *e).integer(e->value);

  for (const auto& [key, entry] : kv) {
    if (!used.count(key)) {
      throw ConfigError("line " + std::to_string(entry.line) + ": unknown or inapplicable key " + key);
    }
  }
  validate_config(c);
  return c;
}

[[nodiscard]] inline std::string dump_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "name = " << c.name << "\n";
  std::visit(detail::overloaded{
                 [&](const Euclidean&) { o << "map = euclidean\n"; },
                 [&](const PNormDivergence& k) { o << "map = pnorm\nmap.p = " << format_double(k.p) << "\n"; },
                 [&](const SmoothedL1& k) {
                   o << "map = smoothed_l1\nmap.epsilon = " << format_double(k.epsilon)
                     << "\nmap.lambda = " << format_double(k.lambda) << "\n";
                 },
             },
             c.map);
  o << "loss = " << to_string(c.model.loss.kind) << "\n";
  o << "loss.lambda = " << format_double(c.model.lambda) << "\n";
  std::visit(detail::overloaded{
                 [&](const DiscreteFinite& d) {
                   o << "source = discrete\n";
                   for (const auto& a : d.atoms) {
                     o << "source.atom = " << format_vector(a.z.x) << "; " << format_double(a.z.y) << "; "
                       << format_double(a.prob) << "\n";
                   }
                 },
                 [&](const GaussianLinear& g) {
                   o << "source = gaussian\nsource.w_true = " << format_vector(g.w_true)
                     << "\nsource.noise_sd = " << format_double(g.noise_sd)
                     << "\nsource.feature_scale = " << format_double(g.feature_scale) << "\n";
                 },
             },
             c.source);
  if (c.radius) o << "source.radius = " << format_double(*c.radius) << "\n";
  switch (c.schedule.kind) {
    case ScheduleSpec::Kind::Constant:
      o << "schedule = constant\nschedule.eta = " << format_double(c.schedule.eta) << "\n";
      break;
    case ScheduleSpec::Kind::Polynomial:
      o << "schedule = polynomial\nschedule.c = " << format_double(c.schedule.c)
        << "\nschedule.theta = " << format_double(c.schedule.theta) << "\n";
      break;
    case ScheduleSpec::Kind::TheoremRate:
      o << "schedule = theorem_rate\nschedule.sigma_f = "
        << (c.schedule.sigma_f ? format_double(*c.schedule.sigma_f) : std::string("auto")) << "\n";
      break;
  }
  o << "w1 = " << format_vector(c.w1) << "\n";
  if (c.w_star) o << "w_star = " << format_vector(*c.w_star) << "\n";
  o << "T = " << c.T << "\n";
  o << "checkpoints = ";
  if (c.checkpoints) {
    for (std::size_t i = 0; i < c.checkpoints->size(); ++i) o << (i ? "," : "") << (*c.checkpoints)[i];
  } else {
    o << "geometric";
  }
  o << "\n";
  o << "n_runs = " << c.n_runs << "\n";
  o << "base_seed = " << c.base_seed << "\n";
  o << "theorem_tag = " << (c.theorem_tag ? std::string(to_string(*c.theorem_tag)) : std::string("none")) << "\n";
  o << "violation_probe = " << (c.violation_probe ? "true" : "false") << "\n";
  o << "kappa = " << format_double(c.kappa) << "\n";
  o << "exclude_diverged = " << (c.exclude_diverged ? "true" : "false") << "\n";
  o << "fit_t_min = " << c.fit_t_min << "\n";
  o << "ref_t = " << c.ref_t << "\n";
  return o.str();
}

/// Rows of the 4x4 Sylvester-Hadamard matrix scaled by 1/2: unit l2 norm, and
/// the 8 atoms +-h_i give C_X = I/4.
[[nodiscard]] inline std::vector<Vector> hadamard_features(double scale = 1.0) {
  const double h[4][4] = {{1, 1, 1, 1}, {1, -1, 1, -1}, {1, 1, -1, -1}, {1, -1, -1, 1}};
  std::vector<Vector> out;
  for (const auto& row : h) {
    for (double sign : {1.0, -1.0}) {
      Vector x(4);
      for (std::size_t j = 0; j < 4; ++j) x[j] = sign * 0.5 * scale * row[j];
      out.push_back(x);
    }
  }
  return out;
}

/// Uniform discrete source on the Hadamard features with labels <w_true, x> + e,
/// e in {+noise, -noise} (8 atoms when noise = 0, else 16).
[[nodiscard]] inline DiscreteFinite hadamard_source(const Vector& w_true, double noise, double scale = 1.0) {
  DiscreteFinite d;
  const auto xs = hadamard_features(scale);
  const double prob = noise > 0.0 ? 1.0 / 16.0 : 1.0 / 8.0;
  for (const auto& x : xs) {
    const double y = inner(w_true, x);
    if (noise > 0.0) {
      d.atoms.push_back({Sample{x, y + noise}, prob});
      d.atoms.push_back({Sample{x, y - noise}, prob});
    } else {
      d.atoms.push_back({Sample{x, y}, prob});
    }
  }
  return d;
}

/// Zero-variance randomized Kaczmarz on the Hadamard source.
[[nodiscard]] inline ExperimentConfig default_config() {
  ExperimentConfig c;
  c.name = "kaczmarz_zero_variance";
  c.map = Euclidean{};
  c.model = LossModel(Loss{LossKind::LeastSquares}, 0.0);
  c.source = hadamard_source(Vector{1.0, -0.5, 0.5, 0.25}, 0.0);
  c.radius = 1.0;
  c.schedule = ScheduleSpec{ScheduleSpec::Kind::Constant, 0.1, 1.0, 1.0, std::nullopt};
  c.w1 = zeros(4);
  c.T = 100;
  c.n_runs = 500;
  c.base_seed = 20240101;
  c.theorem_tag = TheoremTag::LinearRate;
  c.fit_t_min = 8;
  return c;
}

}  // namespace omd
