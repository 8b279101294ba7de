// SPDX-License-Identifier: Apache-2.0
//
// Verdicts on a recorded diagnostics series: conservation and monotonicity
// identities, tail bounds, and the two decay theorems.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rkcs/bounds.hpp"
#include "rkcs/config.hpp"
#include "rkcs/diagnostics.hpp"
#include "rkcs/kernel.hpp"
#include "rkcs/relkin.hpp"
#include "rkcs/sampler.hpp"

namespace rkcs {

struct Check {
  std::string name;
  double measured = 0.0;
  double required = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

inline nlohmann::json to_json(const Check& c) {
  auto num = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  };
  nlohmann::json j{{"name", c.name},
                   {"measured", num(c.measured)},
                   {"required", num(c.required)},
                   {"tolerance", num(c.tolerance)},
                   {"pass", c.pass}};
  if (!c.note.empty()) j["note"] = c.note;
  return j;
}

inline bool all_pass(const std::vector<Check>& cs) {
  return std::all_of(cs.begin(), cs.end(), [](const Check& c) { return c.pass; });
}

// Pinned tolerances.
inline constexpr double kConservationTolPer1e4Steps = 1e-10;
inline constexpr double kDissipationSlack = 1e-12;
inline constexpr double kMomentRelSlack = 1e-10;
inline constexpr double kPositionGrowthSlack = 1e-6;
inline constexpr double kTailSigmas = 3.0;
inline constexpr double kRateSlack = 0.25;
inline constexpr double kCohesionFactor = 1.1;
inline constexpr double kEnvelopeCapFactor = 1e3;

namespace detail {

inline double nonincrease_violation_rel(const std::vector<DiagnosticsRow>& rows, double DiagnosticsRow::*field) {
  double worst = 0.0;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double prev = rows[k - 1].*field;
    const double cur = rows[k].*field;
    if (!std::isfinite(prev) || !std::isfinite(cur)) return std::numeric_limits<double>::infinity();
    const double scale = std::max(std::abs(prev), std::numeric_limits<double>::min());
    worst = std::max(worst, (cur - prev) / scale);
  }
  return worst;
}

}  // namespace detail

/// Conservation, dissipation, moment bounds, tail bounds and the speed limit.
inline std::vector<Check> lemma_checks(const std::vector<DiagnosticsRow>& rows, const RunConfig& cfg,
                                       std::optional<double> failure_time = {}) {
  std::vector<Check> out;
  const double c = cfg.sim.c.value();
  const std::size_t steps = cfg.sim.step_count();
  {
    Check k{"run_completed", failure_time ? *failure_time : cfg.sim.t_end, cfg.sim.t_end, 0.0, !failure_time, ""};
    if (failure_time) k.note = "numeric failure marker present";
    out.push_back(k);
  }
  if (rows.empty()) {
    out.push_back({"rows_present", 0.0, 1.0, 0.0, false, "series has no rows"});
    return out;
  }
  {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.wc_dev);
    const double tol = kConservationTolPer1e4Steps * std::max(1.0, static_cast<double>(steps) / 1e4);
    out.push_back({"momentum_mean_conservation", m, 0.0, tol, m <= tol, "max_t |w_c(t) - w_c(0)|"});
  }
  {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < rows.size(); ++k) m = std::max(m, rows[k].L - rows[k - 1].L);
    if (rows.size() < 2) m = 0.0;
    out.push_back({"velocity_alignment_dissipation", m, 0.0, kDissipationSlack, m <= kDissipationSlack,
                   "max_k L(t_{k+1}) - L(t_k)"});
  }
  {
    const double m = detail::nonincrease_violation_rel(rows, &DiagnosticsRow::mom_w_D);
    out.push_back({"momentum_moment_D_nonincreasing", m, 0.0, kMomentRelSlack, m <= kMomentRelSlack,
                   "max relative increase of (1/N) sum |w|^D"});
  }
  {
    const double m = detail::nonincrease_violation_rel(rows, &DiagnosticsRow::mom_exp_alpha);
    out.push_back({"momentum_exp_moment_nonincreasing", m, 0.0, kMomentRelSlack, m <= kMomentRelSlack,
                   "max relative increase of (1/N) sum exp(alpha |w|)"});
  }
  {
    const double D = cfg.gauges.D;
    const double base = std::pow(rows.front().mom_x_D, 1.0 / D);
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& r : rows) m = std::max(m, std::pow(r.mom_x_D, 1.0 / D) - (base + c * r.t));
    out.push_back({"position_moment_growth", m, 0.0, kPositionGrowthSlack, m <= kPositionGrowthSlack,
                   "max_t M_x(t)^{1/D} - M_x(0)^{1/D} - c t"});
  }
  const double n = static_cast<double>(cfg.n);
  auto tail_check = [&](const char* name, double DiagnosticsRow::*emp, double DiagnosticsRow::*bnd) {
    double m = -std::numeric_limits<double>::infinity();
    bool evaluable = true;
    for (const auto& r : rows) {
      const double b = r.*bnd;
      if (std::isnan(b)) {
        evaluable = false;
        break;
      }
      const double se = binomial_se(b, static_cast<std::size_t>(n));
      m = std::max(m, r.*emp - (b + kTailSigmas * se));
    }
    if (!evaluable) {
      out.push_back({name, std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0, false, "bound column missing"});
    } else {
      out.push_back({name, m, 0.0, 0.0, m <= 0.0, "max_t tail - bound - 3 binomial SE"});
    }
  };
  tail_check("tail_mass_w_bound", &DiagnosticsRow::tail_w, &DiagnosticsRow::bound_tail_w);
  tail_check("tail_mass_x_bound", &DiagnosticsRow::tail_x, &DiagnosticsRow::bound_tail_x);
  {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, r.max_speed);
    out.push_back({"speed_limit", m, c, 0.0, m < c, "max_t max_i |v_i| < c"});
  }
  {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, std::abs(r.phi_lower - phi_lower(r.t, cfg.gauges.gauge, cfg.sim.beta)));
    out.push_back({"phi_lower_consistency", m, 0.0, 0.0, m == 0.0, "recorded phi_lower vs closed form"});
  }
  return out;
}

/// max over t in [T/2, T] of cohesion_drift <= 1.1 max over [0, T/2].
inline Check cohesion_check(const std::vector<DiagnosticsRow>& rows, double t_end) {
  double early = 0.0;
  double late = 0.0;
  for (const auto& r : rows) {
    if (r.t <= 0.5 * t_end) early = std::max(early, r.cohesion_drift);
    if (r.t >= 0.5 * t_end) late = std::max(late, r.cohesion_drift);
  }
  const double req = kCohesionFactor * early;
  return {"spatial_cohesion_bounded", late, req, 0.0, late <= req, "max_[T/2,T] vs 1.1 max_[0,T/2]"};
}

struct TheoremReport {
  std::vector<Check> checks;
  nlohmann::json details = nlohmann::json::object();
};

inline Check admissibility_check(const RunConfig& cfg) {
  const auto bad = check_params(cfg.gauges, cfg.sim.beta, cfg.sim.c.value());
  std::string note;
  for (const auto& b : bad) note += (note.empty() ? "" : "; ") + b;
  return {"parameters_admissible", static_cast<double>(bad.size()), 0.0, 0.0, bad.empty(),
          bad.empty() ? "all conditions hold" : "violated: " + note};
}

/// Power-law rate of L over [T/10, T] against -lambda + 0.25, unless L has
/// reached the 1e-12 floor.
inline TheoremReport theorem31_report(const std::vector<DiagnosticsRow>& rows, const RunConfig& cfg) {
  TheoremReport rep;
  if (cfg.gauges.regime() != Regime::polynomial) {
    rep.checks.push_back({"regime_polynomial", 0.0, 1.0, 0.0, false, "run uses the exponential regime"});
    return rep;
  }
  rep.checks.push_back(admissibility_check(cfg));
  const double lambda = theorem31_exponent(cfg.gauges);
  rep.details["lambda"] = lambda;
  rep.details["cohesion_condition_lambda_gt_2"] = lambda > 2.0;
  const double T = cfg.sim.t_end;
  std::vector<double> t, v;
  bool floor_hit = false;
  for (const auto& r : rows) {
    if (r.t < T / 10.0 || r.t > T) continue;
    if (r.L < kDecayFloor) {
      floor_hit = true;
      continue;
    }
    t.push_back(r.t);
    v.push_back(r.L);
  }
  const double required = -lambda + kRateSlack;
  if (t.size() >= 8) {
    const auto fit = fit_decay_rate(t, v, T / 10.0, T, DecayModel::power_law);
    rep.details["power_law_fit"] = {{"exponent", fit.exponent},
                                    {"intercept", fit.intercept},
                                    {"residual", fit.residual},
                                    {"samples", fit.samples},
                                    {"window", {T / 10.0, T}}};
    const bool ok = fit.exponent <= required || floor_hit;
    rep.checks.push_back({"decay_rate_L", fit.exponent, required, 0.0, ok,
                          floor_hit ? "L reached the 1e-12 floor inside the window" : "fitted exponent <= -lambda + 0.25"});
  } else {
    rep.checks.push_back({"decay_rate_L", std::numeric_limits<double>::quiet_NaN(), required, 0.0, floor_hit,
                          floor_hit ? "L below the 1e-12 floor; fit skipped as converged"
                                    : "fewer than 8 samples in the fit window"});
  }
  rep.checks.push_back(cohesion_check(rows, T));
  return rep;
}

/// Envelope fit of the exponential-regime shape with C10 <= 1e3 L(0), plus a
/// stretched-exponential fit of L / L(0) for reference.
inline TheoremReport theorem32_report(const std::vector<DiagnosticsRow>& rows, const RunConfig& cfg) {
  TheoremReport rep;
  if (cfg.gauges.regime() != Regime::exponential) {
    rep.checks.push_back({"regime_exponential", 0.0, 1.0, 0.0, false, "run uses the polynomial regime"});
    return rep;
  }
  rep.checks.push_back(admissibility_check(cfg));
  std::vector<double> t, L;
  for (const auto& r : rows) {
    t.push_back(r.t);
    L.push_back(r.L);
  }
  if (rows.empty()) {
    rep.checks.push_back({"rows_present", 0.0, 1.0, 0.0, false, "series has no rows"});
    return rep;
  }
  const auto grid = default_c9_grid();
  const auto fit = fit_envelope(t, L, cfg.gauges, cfg.sim.beta, grid);
  rep.details["envelope"] = {{"C9", fit.constants.c9}, {"C10", fit.constants.c10}, {"C10_cap", fit.c10_cap}};
  rep.checks.push_back({"envelope_dominates_with_bounded_C10", fit.constants.c10, fit.c10_cap, 0.0, fit.within_cap,
                        "C10 <= 1e3 L(0), envelope >= L on every row by construction"});
  const double T = cfg.sim.t_end;
  std::vector<double> ts, vs;
  for (const auto& r : rows) {
    if (r.t < T / 10.0 || r.L < kDecayFloor || !(L[0] > 0.0)) continue;
    const double ratio = r.L / L[0];
    if (ratio < 1.0) {
      ts.push_back(r.t);
      vs.push_back(ratio);
    }
  }
  try {
    const auto sf = fit_decay_rate(ts, vs, T / 10.0, T, DecayModel::stretched_exp);
    rep.details["stretched_exp_fit"] = {{"exponent", sf.exponent},
                                        {"intercept", sf.intercept},
                                        {"residual", sf.residual},
                                        {"samples", sf.samples},
                                        {"normalization", "L(t)/L(0)"}};
  } catch (const DataError& e) {
    rep.details["stretched_exp_fit"] = {{"skipped", e.what()}};
  }
  rep.checks.push_back(cohesion_check(rows, T));
  return rep;
}

struct CoercivityMeasurement {
  double radius = 0.0;
  double worst_sampled_ratio = 0.0;  // min over sampled pairs of lhs / rhs
  double analytic_ratio = 0.0;       // sharp constant / Lambda(R)
  std::size_t samples = 0;
};

/// Samples pairs uniformly in the R-ball of R^dim and reports the smallest
/// lhs/rhs ratio of coercivity_check with the order constant 1.
inline CoercivityMeasurement measure_coercivity(double radius, LightSpeed c, std::size_t dim, std::size_t samples,
                                                std::uint64_t seed, const SpeedMapSolverOpts& opts = {}) {
  CoercivityMeasurement m;
  m.radius = radius;
  m.samples = samples;
  m.worst_sampled_ratio = std::numeric_limits<double>::infinity();
  if (radius > 0.0) m.analytic_ratio = sharp_coercivity_constant(radius, c, opts) / coercivity_constant(radius, c);
  const DistributionSpec ball = UniformBallSpec{radius, {}};
  std::vector<double> x(dim), y(dim);
  for (std::size_t s = 0; s < samples && radius > 0.0; ++s) {
    sample_point(ball, seed, s, 0, x);
    sample_point(ball, seed, s, 1, y);
    const auto r = coercivity_check(x, y, radius, c, opts);
    if (r.rhs > 0.0) m.worst_sampled_ratio = std::min(m.worst_sampled_ratio, r.lhs / r.rhs);
  }
  return m;
}

}  // namespace rkcs
