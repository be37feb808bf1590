// Acceptance checks, one per criterion. Prints `criterion N: PASS|FAIL <detail>`
// and exits nonzero if any selected criterion fails.
//
//   omd_acceptance                 all criteria
//   omd_acceptance --criterion 4   just one

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "omd/omd.hpp"

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Loaded {
  omd::ResolvedExperiment r;
  omd::RunOutput out;
};

Loaded load_and_run(const std::string& name) {
  std::ifstream in(std::string(OMD_CONFIG_DIR) + "/" + name + ".cfg");
  if (!in) throw std::runtime_error("missing config " + name);
  std::stringstream ss;
  ss << in.rdbuf();
  auto r = omd::resolve(omd::parse_config(ss.str()));
  auto out = omd::run_experiment(r);
  return {std::move(r), std::move(out)};
}

bool is_hadamard_design(const omd::SampleSource& s, double scale, bool noisy) {
  if (!s.discrete() || s.dim() != 4) return false;
  const auto& atoms = s.support().atoms;
  if (atoms.size() != (noisy ? 16u : 8u)) return false;
  const auto xs = omd::hadamard_features(scale);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!(atoms[i].z.x == xs[noisy ? i / 2 : i])) return false;
  }
  return true;
}

double lambda_min(const omd::SampleSource& s) { return omd::covariance_spectrum(s).min; }

// ------------------------------------------------------------------ criteria

Outcome c1() {
  const auto checks = omd::run_verify_suite();
  std::vector<std::string> required = {"key_identity",       "bregman_duality",          "bregman_sum_identity",
                                       "gradient_norm_identity", "pnorm_bregman_upper_bound", "pnorm_control_lower_bound",
                                       "cocoercivity",       "fenchel_conjugate_search"};
  std::string failed;
  for (const auto& c : checks) {
    if (!c.passed) failed += c.name + " ";
  }
  std::string missing;
  for (const auto& name : required) {
    bool found = false;
    for (const auto& c : checks) found = found || c.name == name;
    if (!found) missing += name + " ";
  }
  const bool ok = failed.empty() && missing.empty() && checks.size() >= 9;
  return {ok, std::to_string(checks.size()) + " checks" + (failed.empty() ? "" : ", failed: " + failed) +
                  (missing.empty() ? "" : ", missing: " + missing)};
}

Outcome c2() {
  const auto [r, out] = load_and_run("linear_rate");
  const auto& s = r.setup;
  const double lmin = lambda_min(s.source);
  const double eta = s.schedule(1);
  const bool setup_ok = r.setup.map.name() == "euclidean" && s.model.loss.kind == omd::LossKind::LeastSquares &&
                        s.model.lambda == 0.0 && is_hadamard_design(s.source, 1.0, false) &&
                        s.source.radius() == 1.0 && lmin >= 0.1 && eta == 0.1 && !s.schedule.limit_zero() &&
                        r.config.T == 100 && r.config.n_runs == 500 &&
                        r.constants.variance == omd::VarianceClass::ZeroVariance;
  const double sigma = 1.0;
  const double L = 1.0;  // R^2 for least squares with R = 1
  const double sigma_f = 2.0 * lmin;
  const double lo = std::log(1.0 - 2.0 * L * eta / sigma);
  const double hi = std::log(1.0 - sigma_f * eta / 2.0);
  const auto fit = omd::fit_linear_rate(out.result.curve, 8, 100);
  const bool slope_ok = fit.slope >= lo - 0.02 && fit.slope <= hi + 0.02;
  int outside = 0;
  const double d1 = r.constants.d1;
  for (const auto& p : out.result.curve.points) {
    if (p.t < 8) continue;
    const double steps = static_cast<double>(p.t - 1);
    const double lower = std::pow(1.0 - 2.0 * L * eta / sigma, steps) * d1;
    const double upper = std::pow(1.0 - sigma_f * eta / 2.0, steps) * d1;
    if (p.mean < lower - 2 * p.std_err || p.mean > upper + 2 * p.std_err) ++outside;
  }
  return {setup_ok && slope_ok && outside == 0,
          "slope=" + fmt("%.5f", fit.slope) + " band=[" + fmt("%.5f", lo - 0.02) + "," + fmt("%.5f", hi + 0.02) +
              "] lambda_min=" + fmt("%.4g", lmin) + " points_outside_bracket=" + std::to_string(outside) +
              (setup_ok ? "" : " SETUP-MISMATCH")};
}

bool noisy_setup_ok(const omd::ResolvedExperiment& r, double scale) {
  const auto& s = r.setup;
  return r.setup.map.name() == "euclidean" && s.model.loss.kind == omd::LossKind::LeastSquares &&
         s.model.lambda == 0.0 && is_hadamard_design(s.source, scale, true) &&
         omd::classify_variance(s.source, s.model, s.w_star) == omd::VarianceClass::PositiveVariance;
}

Outcome c3() {
  const auto [r, out] = load_and_run("one_over_t");
  const auto* k = std::get_if<omd::TheoremRate>(&r.setup.schedule.kind());
  const bool setup_ok = noisy_setup_ok(r, 1.0) && k && std::abs(k->sigma_f - 2.0 * lambda_min(r.setup.source)) < 1e-12 &&
                        r.config.T == 2048 && r.config.n_runs == 1000;
  const auto fit = omd::fit_rate(out.result.curve, 128, 2048);
  const bool ok = fit.slope >= -1.25 && fit.slope <= -0.75 && fit.r_squared >= 0.95;
  return {setup_ok && ok, "slope=" + fmt("%.4f", fit.slope) + " r2=" + fmt("%.5f", fit.r_squared) +
                              " positive_variance=yes" + (setup_ok ? "" : " SETUP-MISMATCH")};
}

Outcome c4() {
  const auto [r, out] = load_and_run("lower_rate");
  const bool setup_ok = noisy_setup_ok(r, 1.0) && r.config.T == 2048;
  const auto& c = out.result.curve;
  const double base = 256.0 * c.at(256).mean;
  double worst = INFINITY;
  for (std::uint64_t t : {256, 512, 1024, 2048}) worst = std::min(worst, static_cast<double>(t) * c.at(t).mean);
  return {setup_ok && worst >= 0.5 * base, "min_t_mean=" + fmt("%.4g", worst) + " threshold=" + fmt("%.4g", 0.5 * base) +
                                               (setup_ok ? "" : " SETUP-MISMATCH")};
}

Outcome c5() {
  const auto [r, out] = load_and_run("necessity_summable");
  const auto& s = r.setup.schedule;
  const auto* k = std::get_if<omd::PolynomialDecay>(&s.kind());
  const double a = 2.0 * r.constants.L / r.constants.sigma_psi;
  const bool setup_ok = noisy_setup_ok(r, 1.0) && k && k->c == 0.05 && k->theta == 2.0 && !s.sum_infinite() &&
                        s.sup_from(1) <= 1.0 / (3.0 * a) && r.config.T == 2048;
  const auto& c = out.result.curve;
  const std::uint64_t t0 = 1;
  // Floor for the iterate w_2048 uses the step sum over t = t0+1 .. 2047.
  double sum = 0.0;
  for (std::uint64_t t = t0 + 1; t <= 2047; ++t) sum += 0.05 / (static_cast<double>(t) * static_cast<double>(t));
  const double floor = std::exp(-2.0 * a * sum) * c.at(t0 + 1).mean;
  const auto& last = c.at(2048);
  const bool ok = last.mean >= 0.9 * floor - 2.0 * last.std_err;
  return {setup_ok && ok, "mean_T=" + fmt("%.4g", last.mean) + " se=" + fmt("%.2g", last.std_err) + " floor=" +
                              fmt("%.4g", floor) + (setup_ok ? "" : " SETUP-MISMATCH")};
}

Outcome c6() {
  const auto [r, out] = load_and_run("constant_step_plateau");
  const auto* k = std::get_if<omd::ConstantStep>(&r.setup.schedule.kind());
  const bool setup_ok = noisy_setup_ok(r, 1.0) && k && k->eta == 0.2 && r.config.T == 2048;
  const auto& c = out.result.curve;
  const double threshold = 0.25 * c.at(8).mean;
  double lowest = INFINITY;
  int probed = 0;
  for (const auto& p : c.points) {
    if (p.t < 256 || p.t > 2048) continue;
    lowest = std::min(lowest, p.mean);
    ++probed;
  }
  return {setup_ok && probed >= 4 && lowest >= threshold,
          "min_mean=" + fmt("%.4g", lowest) + " threshold=" + fmt("%.4g", threshold) + " checkpoints=" +
              std::to_string(probed) + (setup_ok ? "" : " SETUP-MISMATCH")};
}

Outcome c7() {
  const auto [r, out] = load_and_run("almost_sure");
  const auto* k = std::get_if<omd::PolynomialDecay>(&r.setup.schedule.kind());
  const double sigma_f = 2.0 * lambda_min(r.setup.source);
  const bool setup_ok = noisy_setup_ok(r, 1.0) && k && k->theta == 1.0 && std::abs(k->c - 1.0 / sigma_f) < 1e-12 &&
                        r.config.n_runs == 200 && r.config.T == 4096;
  const auto& cps = r.setup.checkpoints;
  auto index = [&](std::uint64_t t) { return std::find(cps.begin(), cps.end(), t) - cps.begin(); };
  const auto i16 = index(16), i1024 = index(1024), iT = index(4096);
  std::size_t good = 0;
  double max_mid = 0.0, max_last = 0.0;
  for (const auto& row : out.result.per_run) {
    if (row[iT] <= 0.05 * row[i16]) ++good;
    max_mid = std::max(max_mid, row[i1024]);
    max_last = std::max(max_last, row[iT]);
  }
  const double frac = static_cast<double>(good) / static_cast<double>(out.result.per_run.size());
  return {setup_ok && frac >= 0.95 && max_last < max_mid,
          "fraction=" + fmt("%.3f", frac) + " max_1024=" + fmt("%.4g", max_mid) + " max_4096=" + fmt("%.4g", max_last) +
              (setup_ok ? "" : " SETUP-MISMATCH")};
}

Outcome c8() {
  std::string detail;
  bool ok = true;
  for (std::size_t d : {2u, 3u}) {
    std::vector<double> ratios;
    for (double a : {1.0, 10.0, 1e2, 1e3, 1e4}) ratios.push_back(omd::nonsmoothness_witness(1.5, d, a));
    bool increasing = true;
    for (std::size_t i = 1; i < ratios.size(); ++i) increasing = increasing && ratios[i] > ratios[i - 1];
    const double growth = ratios.back() / ratios.front();
    ok = ok && increasing && growth > 10.0;
    detail += "d=" + std::to_string(d) + ": ratio(1)=" + fmt("%.4f", ratios.front()) + " ratio(1e4)=" +
              fmt("%.4f", ratios.back()) + " increasing=" + (increasing ? "yes" : "no") + " growth=" +
              fmt("%.4f", growth) + "; ";
  }
  return {ok, detail};
}

Outcome c9() {
  const std::vector<double> ps{4.0 / 3.0, 1.5, 2.0};
  const std::string table = omd::omega_table(ps, 0.0, 3.0, 300);
  std::istringstream in(table);
  std::string line;
  std::getline(in, line);
  std::vector<double> us;
  std::vector<std::vector<double>> cols(ps.size());
  while (std::getline(in, line)) {
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    us.push_back(std::stod(cell));
    for (auto& col : cols) {
      std::getline(cells, cell, ',');
      col.push_back(std::stod(cell));
    }
  }
  double closed_err = 0.0, huber_err = 0.0, continuity = 0.0, min_second = INFINITY;
  for (std::size_t j = 0; j < ps.size(); ++j) {
    const double tau = 2.0 / std::min(ps[j], 3.0 - ps[j]);
    continuity = std::max(continuity, std::abs(std::pow(1.0, tau) / tau - (1.0 + 1.0 / tau - 1.0)));
    for (std::size_t i = 0; i < us.size(); ++i) {
      const double u = us[i];
      const double want = u < 1.0 ? std::pow(u, tau) / tau : u + 1.0 / tau - 1.0;
      closed_err = std::max(closed_err, std::abs(cols[j][i] - want));
      if (ps[j] == 2.0) huber_err = std::max(huber_err, std::abs(cols[j][i] - (u < 1.0 ? u * u / 2 : u - 0.5)));
      if (i > 0 && i + 1 < us.size()) min_second = std::min(min_second, cols[j][i + 1] - 2 * cols[j][i] + cols[j][i - 1]);
    }
  }
  const bool zero_row = cols[0][0] == 0.0 && cols[1][0] == 0.0 && cols[2][0] == 0.0;
  const bool ok = us.size() == 301 && zero_row && closed_err <= 1e-15 && huber_err <= 1e-15 && continuity <= 1e-15 &&
                  min_second >= -1e-12;
  return {ok, "rows=" + std::to_string(us.size()) + " max_closed_form_err=" + fmt("%.3g", closed_err) +
                  " huber_err=" + fmt("%.3g", huber_err) + " continuity_gap=" + fmt("%.3g", continuity) +
                  " min_second_difference=" + fmt("%.3g", min_second)};
}

Outcome c10() {
  const auto map = omd::MirrorMap::euclidean();
  const omd::LossModel ls(omd::Loss{omd::LossKind::LeastSquares}, 0.0);
  omd::CounterRng rng(2024);
  double worst_rel = 0.0, worst_abs = 0.0;
  for (int i = 0; i < 10000; ++i) {
    omd::Vector w(4), x(4);
    for (double& v : w) v = 10.0 * rng.uniform() - 5.0;
    for (double& v : x) v = 2.0 * rng.uniform() - 1.0;
    const double y = 6.0 * rng.uniform() - 3.0;
    const double eta = 0.01 + rng.uniform();
    const omd::Vector got = omd::omd_step(map, ls, w, omd::Sample{x, y}, eta);
    double residual = 0.0;
    for (int j = 0; j < 4; ++j) residual += w[j] * x[j];
    residual -= y;
    for (int j = 0; j < 4; ++j) {
      const double step = eta * residual * x[j];
      const double err = std::abs(got[j] - (w[j] - step));
      worst_abs = std::max(worst_abs, err);
      worst_rel = std::max(worst_rel, err / std::max({1.0, std::abs(w[j]), std::abs(step)}));
    }
  }
  return {worst_rel <= 1e-15,
          "max_scaled_err=" + fmt("%.3g", worst_rel) + " max_abs_err=" + fmt("%.3g", worst_abs) + " steps=10000"};
}

Outcome c11() {
  const auto [r, out] = load_and_run("pnorm_convergence");
  const auto* pn = std::get_if<omd::PNormDivergence>(&r.setup.map.kind());
  const auto* k = std::get_if<omd::PolynomialDecay>(&r.setup.schedule.kind());
  const bool setup_ok = pn && pn->p == 1.5 && k && k->c == 0.1 && k->theta == 1.0 && r.config.T == 2048 &&
                        omd::classify_variance(r.setup.source, r.setup.model, r.setup.w_star) ==
                            omd::VarianceClass::PositiveVariance;
  const auto& c = out.result.curve;
  const double ratio = c.at(2048).mean / c.at(8).mean;
  return {setup_ok && ratio <= 0.1, "ratio=" + fmt("%.4g", ratio) + " threshold=0.1" + (setup_ok ? "" : " SETUP-MISMATCH")};
}

struct Criterion {
  std::function<Outcome()> fn;
  double limit_s;  // 0: no stated limit
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {{c1, 30}, {c2, 10}, {c3, 60}, {c4, 60}, {c5, 60}, {c6, 0},
                                      {c7, 90}, {c8, 1},  {c9, 0},  {c10, 1}, {c11, 60}};
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      selected.push_back(std::atoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  if (selected.empty()) {
    for (int n = 1; n <= static_cast<int>(all.size()); ++n) selected.push_back(n);
  }

  int failures = 0;
  for (int n : selected) {
    if (n < 1 || n > static_cast<int>(all.size())) {
      std::fprintf(stderr, "no criterion %d\n", n);
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[n - 1].fn();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double limit = all[n - 1].limit_s;
    const bool in_time = limit == 0 || secs < limit;
    const bool pass = o.pass && in_time;
    std::printf("criterion %d: %s %s runtime=%.3fs%s\n", n, pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
                limit == 0 ? "" : (in_time ? "" : " (over time limit)"));
    failures += pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
