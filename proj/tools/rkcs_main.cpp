// SPDX-License-Identifier: Apache-2.0
//
// rkcs: simulate, verify, sweep-c and wasserstein subcommands.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rkcs/rkcs.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum Exit : int { kOk = 0, kConfig = 1, kNumeric = 2, kVerifyFail = 3 };

json checks_json(const std::vector<rkcs::Check>& cs) {
  json a = json::array();
  for (const auto& c : cs) a.push_back(rkcs::to_json(c));
  return a;
}

json theorem_json(const rkcs::TheoremReport& r) {
  return json{{"checks", checks_json(r.checks)}, {"details", r.details}, {"pass", rkcs::all_pass(r.checks)}};
}

int cmd_simulate(const std::string& config_path, const std::string& out_flag) {
  const std::string text = rkcs::read_text_file(config_path);
  const rkcs::RunConfig cfg = rkcs::parse_run_config_text(text);
  const std::string out_dir = !out_flag.empty() ? out_flag : cfg.output_dir;
  if (out_dir.empty()) throw rkcs::ConfigError("missing required field 'output_dir' (or pass --out)");
  fs::create_directories(out_dir);

  const auto t0 = std::chrono::steady_clock::now();
  const rkcs::Ensemble e0 = rkcs::sample_ensemble(cfg.init_x, cfg.init_w, cfg.n, cfg.dim, cfg.seed, cfg.d_max);
  std::string snapshots;
  rkcs::RecordHook hook;
  if (cfg.write_snapshots) {
    snapshots = rkcs::snapshot_header(cfg.dim) + "\r\n";
    hook = [&](std::size_t, double t, const rkcs::Ensemble& e) { rkcs::append_snapshot(snapshots, t, e); };
  }
  const auto res = rkcs::simulate(e0, cfg.sim, cfg.gauges, hook);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::optional<double> fail_t;
  if (res.failure) fail_t = res.failure->t;
  const std::string csv = rkcs::series_to_csv(res.rows, fail_t);
  rkcs::write_text_file((fs::path(out_dir) / "series.csv").string(), csv);
  rkcs::write_text_file((fs::path(out_dir) / "config.json").string(), text);
  if (cfg.write_snapshots) rkcs::write_text_file((fs::path(out_dir) / "snapshots.csv").string(), snapshots);

  double r_w = 0.0;
  for (std::size_t i = 0; i < e0.size(); ++i) r_w = std::max(r_w, rkcs::norm(e0.w(i)));
  const auto coer = rkcs::measure_coercivity(r_w, cfg.sim.c, cfg.dim, 2000, cfg.seed, cfg.sim.solver);

  json manifest;
  manifest["artifact"] = "rkcs";
  manifest["version"] = rkcs::kVersion;
  manifest["config"] = rkcs::to_json(cfg);
  manifest["config_fnv1a"] = rkcs::hex64(rkcs::fnv1a(text));
  manifest["series_fnv1a"] = rkcs::hex64(rkcs::fnv1a(csv));
  manifest["wall_clock_seconds"] = wall;
  manifest["threads"] = rkcs::default_pool().size();
  manifest["rows"] = res.rows.size();
  manifest["initial_moments"] = {
      {"M_p", std::isfinite(res.gauges.moment_p0) ? json(res.gauges.moment_p0) : json(nullptr)},
      {"M_e", std::isfinite(res.gauges.moment_e0) ? json(res.gauges.moment_e0) : json(nullptr)}};
  manifest["conventions"] = {
      {"cohesion_drift_velocity", "w_c(0) / F~(|w_c(0)|)"},
      {"phi_lower", "phi(2 R_x(t)), exact infimum over the R_x(t)-ball"},
      {"tail_slack", "3 binomial standard errors, q = clamp(bound, 0, 1)"},
      {"coercivity_order_constant", 1.0},
      {"csv_number_format", "scientific, 17 significant digits"}};
  json adm = json::array();
  for (const auto& v : rkcs::check_params(cfg.gauges, cfg.sim.beta, cfg.sim.c.value())) adm.push_back(v);
  manifest["admissibility"] = {{"violations", adm}, {"admissible", adm.empty()}};
  if (cfg.gauges.regime() == rkcs::Regime::polynomial) {
    const double lambda = rkcs::theorem31_exponent(cfg.gauges);
    manifest["admissibility"]["lambda"] = lambda;
    manifest["admissibility"]["cohesion_condition_lambda_gt_2"] = lambda > 2.0;
  }
  manifest["coercivity"] = {{"radius", coer.radius},
                            {"worst_sampled_ratio", std::isfinite(coer.worst_sampled_ratio)
                                                        ? json(coer.worst_sampled_ratio)
                                                        : json(nullptr)},
                            {"sharp_over_order_one_ratio", coer.analytic_ratio},
                            {"samples", coer.samples}};
  manifest["invariants"] = checks_json(rkcs::lemma_checks(res.rows, cfg, fail_t));
  if (!res.rows.empty()) {
    manifest["theorem"] = cfg.gauges.regime() == rkcs::Regime::polynomial
                              ? theorem_json(rkcs::theorem31_report(res.rows, cfg))
                              : theorem_json(rkcs::theorem32_report(res.rows, cfg));
  }
  if (res.failure) {
    manifest["failure"] = {{"message", res.failure->message}, {"t", res.failure->t}};
  }
  rkcs::write_text_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");

  if (res.failure) {
    std::cerr << "numeric failure at t = " << res.failure->t << ": " << res.failure->message << "\n";
    return kNumeric;
  }
  return kOk;
}

int cmd_verify(const std::string& run_dir, const std::string& theorem) {
  const fs::path dir(run_dir);
  rkcs::RunConfig cfg;
  rkcs::SeriesData data;
  try {
    cfg = rkcs::parse_run_config_text(rkcs::read_text_file((dir / "config.json").string()));
    data = rkcs::parse_series_csv(rkcs::read_file_or_data_error((dir / "series.csv").string()));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  json report{{"run_dir", run_dir}, {"suite", theorem}};
  bool pass = false;
  if (theorem == "lemmas") {
    const auto checks = rkcs::lemma_checks(data.rows, cfg, data.failure_time);
    report["checks"] = checks_json(checks);
    pass = rkcs::all_pass(checks);
  } else {
    rkcs::TheoremReport rep = theorem == "3.1" ? rkcs::theorem31_report(data.rows, cfg)
                                               : rkcs::theorem32_report(data.rows, cfg);
    if (data.failure_time) rep.checks.push_back({"run_completed", *data.failure_time, cfg.sim.t_end, 0.0, false, ""});
    report["checks"] = checks_json(rep.checks);
    report["details"] = rep.details;
    pass = rkcs::all_pass(rep.checks);
  }
  report["pass"] = pass;
  rkcs::write_text_file((dir / "report.json").string(), report.dump(2) + "\n");
  std::cout << (pass ? "PASS" : "FAIL") << " " << theorem << " " << run_dir << "\n";
  return pass ? kOk : kVerifyFail;
}

std::vector<double> parse_c_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(rkcs::parse_double(item));
    } catch (const rkcs::DataError&) {
      throw rkcs::ConfigError("--c-values: '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw rkcs::ConfigError("--c-values must list at least one value");
  return out;
}

int cmd_sweep_c(const std::string& config_path, const std::string& c_values, const std::string& out_flag) {
  const rkcs::RunConfig cfg = rkcs::parse_run_config_text(rkcs::read_text_file(config_path));
  const auto cs = parse_c_list(c_values);
  const rkcs::Ensemble e0 = rkcs::sample_ensemble(cfg.init_x, cfg.init_w, cfg.n, cfg.dim, cfg.seed, cfg.d_max);

  std::vector<rkcs::Ensemble> classical;
  const auto cr = rkcs::simulate_classical(e0, cfg.sim, [&](std::size_t, double, const rkcs::Ensemble& e) {
    classical.push_back(e);
  });
  if (cr.failure) {
    std::cerr << "numeric failure in classical run: " << cr.failure->message << "\n";
    return kNumeric;
  }
  std::string csv = "c,distance\r\n";
  std::vector<double> dist;
  for (double c : cs) {
    rkcs::SimConfig sim = cfg.sim;
    sim.c = rkcs::LightSpeed(c);
    double sup = 0.0;
    std::size_t k = 0;
    const auto rr = rkcs::integrate(e0, sim, rkcs::relativistic_map(sim),
                                    [&](std::size_t, double, const rkcs::Ensemble& e) {
                                      sup = std::max(sup, rkcs::state_distance(e, classical[k++]));
                                    });
    if (rr.failure) {
      std::cerr << "numeric failure at c = " << c << ": " << rr.failure->message << "\n";
      return kNumeric;
    }
    dist.push_back(sup);
    csv += rkcs::format_double(c) + "," + rkcs::format_double(sup) + "\r\n";
  }
  const std::string out_dir = !out_flag.empty() ? out_flag : (cfg.output_dir.empty() ? "." : cfg.output_dir);
  fs::create_directories(out_dir);
  rkcs::write_text_file((fs::path(out_dir) / "sweep.csv").string(), csv);
  std::cout << csv;
  bool monotone = true;
  for (std::size_t k = 1; k < dist.size(); ++k) monotone = monotone && dist[k] <= dist[k - 1];
  if (!monotone) {
    std::cerr << "distances are not nonincreasing in c\n";
    return kVerifyFail;
  }
  return kOk;
}

int cmd_wasserstein(const std::string& a_dir, const std::string& b_dir, double p, const std::string& out_flag) {
  rkcs::SnapshotSeries A, B;
  try {
    A = rkcs::parse_snapshots_csv(rkcs::read_file_or_data_error((fs::path(a_dir) / "snapshots.csv").string()));
    B = rkcs::parse_snapshots_csv(rkcs::read_file_or_data_error((fs::path(b_dir) / "snapshots.csv").string()));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  if (A.times != B.times || A.states.empty() || A.states[0].size() != B.states[0].size() ||
      A.states[0].dim() != B.states[0].dim()) {
    std::cerr << "error: runs differ in time grid, N or dimension\n";
    return kConfig;
  }
  std::string csv = "t,W_p\r\n";
  std::vector<double> w;
  bool subsampled = false;
  std::size_t used = 0;
  for (std::size_t k = 0; k < A.times.size(); ++k) {
    const auto r = rkcs::wasserstein_ensembles(A.states[k], B.states[k], p);
    subsampled = r.subsampled;
    used = r.atoms_used;
    w.push_back(r.value);
    csv += rkcs::format_double(A.times[k]) + "," + rkcs::format_double(r.value) + "\r\n";
  }
  const double w0 = w.front();
  const double wmax = *std::max_element(w.begin(), w.end());
  json summary{{"p", p},
               {"w0", w0},
               {"w_max", wmax},
               {"degenerate", w0 == 0.0},
               {"ratio", w0 == 0.0 ? json(nullptr) : json(wmax / w0)},
               {"atoms_used", used},
               {"subsampled", subsampled}};
  const std::string out_dir = out_flag.empty() ? a_dir : out_flag;
  fs::create_directories(out_dir);
  rkcs::write_text_file((fs::path(out_dir) / "wasserstein.csv").string(), csv);
  rkcs::write_text_file((fs::path(out_dir) / "wasserstein_summary.json").string(), summary.dump(2) + "\n");
  std::cout << summary.dump() << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relativistic kinetic Cucker-Smale laboratory"};
  app.require_subcommand(1);

  std::string config, out, run_dir, theorem, c_values, run_a, run_b;
  double p = 2.0;

  auto* sim = app.add_subcommand("simulate", "Run one simulation and write series.csv + manifest.json");
  sim->add_option("--config", config, "Run configuration (JSON)")->required();
  sim->add_option("--out", out, "Output directory (overrides output_dir)");

  auto* ver = app.add_subcommand("verify", "Check a completed run directory");
  ver->add_option("run_dir", run_dir, "Run directory")->required();
  ver->add_option("--theorem", theorem, "Suite to check")->required()->check(CLI::IsMember({"3.1", "3.2", "lemmas"}));

  auto* sweep = app.add_subcommand("sweep-c", "Distance to the classical run for several c");
  sweep->add_option("--config", config, "Run configuration (JSON)")->required();
  sweep->add_option("--c-values", c_values, "Comma-separated list of c")->required();
  sweep->add_option("--out", out, "Output directory");

  auto* was = app.add_subcommand("wasserstein", "Per-time W_p between two runs with snapshots");
  was->add_option("run_a", run_a, "First run directory")->required();
  was->add_option("run_b", run_b, "Second run directory")->required();
  was->add_option("--p", p, "Order p >= 1")->check(CLI::Range(1.0, 1e6));
  was->add_option("--out", out, "Output directory (default: first run directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (*sim) return cmd_simulate(config, out);
    if (*ver) return cmd_verify(run_dir, theorem);
    if (*sweep) return cmd_sweep_c(config, c_values, out);
    if (*was) return cmd_wasserstein(run_a, run_b, p, out);
  } catch (const rkcs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const rkcs::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kConfig;
  } catch (const rkcs::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const rkcs::DomainError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const rkcs::SolverError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  }
  return kOk;
}
