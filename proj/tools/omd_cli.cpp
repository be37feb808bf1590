// omd: run experiment configs, the identity suite, and the Omega_p table.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "omd/omd.hpp"

namespace {

enum Exit : int { kOk = 0, kVerifyFailed = 1, kSchema = 2, kRegime = 3, kDiverged = 4 };

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw omd::ConfigError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Writes every file or none: contents go to temporaries first, then get renamed.
void write_all(const std::vector<std::pair<std::string, std::string>>& files) {
  std::vector<std::string> tmps;
  for (const auto& [path, body] : files) {
    const std::string tmp = path + ".tmp";
    std::ofstream out(tmp, std::ios::binary);
    out << body;
    if (!out) {
      for (const auto& t : tmps) std::filesystem::remove(t);
      std::filesystem::remove(tmp);
      throw std::runtime_error("cannot write " + path);
    }
    tmps.push_back(tmp);
  }
  for (std::size_t i = 0; i < files.size(); ++i) std::filesystem::rename(tmps[i], files[i].first);
}

void emit(const std::string& body, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << body;
  } else {
    write_all({{path, body}});
  }
}

double parse_fraction(const std::string& s) {
  const auto slash = s.find('/');
  std::size_t used = 0;
  if (slash == std::string::npos) {
    const double v = std::stod(s, &used);
    if (used != s.size()) throw omd::DomainError("bad number '" + s + "'");
    return v;
  }
  const std::string num = s.substr(0, slash);
  const std::string den = s.substr(slash + 1);
  return parse_fraction(num) / parse_fraction(den);
}

int cmd_run(const std::string& config_path, std::string curve_path, std::string report_path) {
  const auto t0 = std::chrono::steady_clock::now();
  const omd::ExperimentConfig cfg = omd::parse_config(read_file(config_path));
  const omd::ResolvedExperiment resolved = omd::resolve(cfg);
  const omd::RunOutput out = omd::run_experiment(resolved);
  if (curve_path.empty()) curve_path = cfg.name + ".curve.csv";
  if (report_path.empty()) report_path = cfg.name + ".report.txt";
  write_all({{curve_path, omd::curve_csv(out.result.curve)}, {report_path, omd::report_text(resolved, out)}});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << cfg.name << ": verdict " << (out.verdict ? omd::to_string(out.verdict->verdict) : "none")
            << ", runtime " << secs << " s\n";
  return kOk;
}

int cmd_verify(const std::string& out_path) {
  const auto checks = omd::run_verify_suite();
  emit(omd::format_verify_report(checks), out_path);
  int code = kOk;
  for (const auto& c : checks) {
    if (!c.passed) {
      std::cerr << "failed: " << c.name << "\n";
      code = kVerifyFailed;
    }
  }
  return code;
}

int cmd_omega(const std::vector<std::string>& ps_text, const std::string& grid, const std::string& out_path) {
  std::vector<double> ps;
  for (const auto& p : ps_text) ps.push_back(parse_fraction(p));
  std::vector<std::string> parts;
  std::stringstream ss(grid);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  if (parts.size() != 3) throw omd::DomainError("grid must be start:stop:step");
  const double start = parse_fraction(parts[0]);
  const double stop = parse_fraction(parts[1]);
  const double step = parse_fraction(parts[2]);
  if (!(step > 0.0)) throw omd::DomainError("grid step must be positive");
  const auto n = static_cast<std::size_t>(std::llround((stop - start) / step));
  emit(omd::omega_table(ps, start, stop, n), out_path);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online mirror descent experiments"};
  app.require_subcommand(0, 1);
  bool dump_defaults = false;
  app.add_flag("--dump-defaults", dump_defaults, "print the default experiment config and exit");

  std::string config_path;
  std::string curve_path;
  std::string report_path;
  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "experiment config file")->required();
  run->add_option("--curve", curve_path, "curve output (default <name>.curve.csv)");
  run->add_option("--report", report_path, "report output (default <name>.report.txt)");

  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "run the identity and inequality suite");
  verify->add_option("--out", verify_out, "report file (default stdout)");

  std::vector<std::string> ps{"4/3", "3/2", "2"};
  std::string grid = "0:3:0.01";
  std::string omega_out;
  auto* omega = app.add_subcommand("omega", "tabulate the control function Omega_p");
  omega->add_option("--p", ps, "exponents in (1, 2], fractions allowed")->delimiter(',');
  omega->add_option("--grid", grid, "start:stop:step");
  omega->add_option("--out", omega_out, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kSchema;
  }

  try {
    if (dump_defaults) {
      std::cout << omd::dump_config(omd::default_config());
      return kOk;
    }
    if (*run) return cmd_run(config_path, curve_path, report_path);
    if (*verify) return cmd_verify(verify_out);
    if (*omega) return cmd_omega(ps, grid, omega_out);
    std::cout << app.help();
    return kSchema;
  } catch (const omd::RegimeViolation& e) {
    std::cerr << "regime violation: " << e.what() << "\n";
    return kRegime;
  } catch (const omd::AllRunsDiverged& e) {
    std::cerr << "diverged: " << e.what() << "\n";
    return kDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSchema;
  }
}
