// SPDX-License-Identifier: Apache-2.0
//
// Run configuration: a single JSON document. Unknown keys are rejected so a
// typo can never silently fall back to a default.
#pragma once

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rkcs/bounds.hpp"
#include "rkcs/dynamics.hpp"
#include "rkcs/errors.hpp"
#include "rkcs/kernel.hpp"
#include "rkcs/sampler.hpp"

namespace rkcs {

using json = nlohmann::json;

struct RunConfig {
  SimConfig sim;
  GaugeParams gauges;
  DistributionSpec init_x = GaussianSpec{};
  DistributionSpec init_w = GaussianSpec{};
  std::size_t n = 1;
  std::size_t dim = 1;
  std::uint64_t seed = 0;
  double d_max = 8.0;
  std::string output_dir;
  bool write_snapshots = false;
};

namespace detail {

class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be a JSON object");
  }

  void allow(std::initializer_list<const char*> keys) {
    for (const char* k : keys) allowed_.insert(k);
  }

  /// Throws on any key not registered through allow().
  void reject_unknown() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!allowed_.count(it.key())) throw ConfigError("unknown key '" + path(it.key()) + "'");
    }
  }

  [[nodiscard]] bool has(const std::string& k) const { return j_.contains(k); }

  [[nodiscard]] const json& at(const std::string& k) const {
    if (!j_.contains(k)) throw ConfigError("missing required field '" + path(k) + "'");
    return j_.at(k);
  }

  [[nodiscard]] double number(const std::string& k) const {
    const json& v = at(k);
    if (!v.is_number()) throw ConfigError("field '" + path(k) + "' must be a number");
    return v.get<double>();
  }

  [[nodiscard]] double number_or(const std::string& k, double def) const { return has(k) ? number(k) : def; }

  [[nodiscard]] std::uint64_t unsigned_int(const std::string& k) const {
    const json& v = at(k);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ConfigError("field '" + path(k) + "' must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  }

  [[nodiscard]] std::string string(const std::string& k) const {
    const json& v = at(k);
    if (!v.is_string()) throw ConfigError("field '" + path(k) + "' must be a string");
    return v.get<std::string>();
  }

  [[nodiscard]] bool boolean_or(const std::string& k, bool def) const {
    if (!has(k)) return def;
    const json& v = at(k);
    if (!v.is_boolean()) throw ConfigError("field '" + path(k) + "' must be a boolean");
    return v.get<bool>();
  }

  [[nodiscard]] std::vector<double> vector_or_empty(const std::string& k) const {
    if (!has(k)) return {};
    return numbers(at(k), path(k));
  }

  /// A number becomes a one-element vector.
  [[nodiscard]] std::vector<double> scalar_or_vector(const std::string& k, std::vector<double> def) const {
    if (!has(k)) return def;
    const json& v = at(k);
    if (v.is_number()) return {v.get<double>()};
    return numbers(v, path(k));
  }

  [[nodiscard]] std::string path(const std::string& k) const { return where_.empty() ? k : where_ + "." + k; }

 private:
  static std::vector<double> numbers(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError("field '" + where + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError("field '" + where + "' must be an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  const json& j_;
  std::string where_;
  std::set<std::string> allowed_;
};

inline DistributionSpec parse_distribution(const json& j, const std::string& where) {
  ObjectReader r(j, where);
  const std::string kind = r.string("kind");
  if (kind == "gaussian") {
    r.allow({"kind", "mean", "sigma"});
    r.reject_unknown();
    return GaussianSpec{r.vector_or_empty("mean"), r.scalar_or_vector("sigma", {1.0})};
  }
  if (kind == "student_t") {
    r.allow({"kind", "dof", "scale", "center"});
    r.reject_unknown();
    return StudentTSpec{r.number("dof"), r.number_or("scale", 1.0), r.vector_or_empty("center")};
  }
  if (kind == "laplace") {
    r.allow({"kind", "rate", "center"});
    r.reject_unknown();
    return LaplaceSpec{r.number("rate"), r.vector_or_empty("center")};
  }
  if (kind == "uniform_ball") {
    r.allow({"kind", "radius", "center"});
    r.reject_unknown();
    return UniformBallSpec{r.number("radius"), r.vector_or_empty("center")};
  }
  if (kind == "dirac") {
    r.allow({"kind", "point"});
    r.reject_unknown();
    return DiracSpec{r.vector_or_empty("point")};
  }
  if (kind == "gaussian_mixture") {
    r.allow({"kind", "components"});
    r.reject_unknown();
    const json& comps = r.at("components");
    if (!comps.is_array()) throw ConfigError("field '" + r.path("components") + "' must be an array");
    GaussianMixtureSpec m;
    for (std::size_t c = 0; c < comps.size(); ++c) {
      ObjectReader cr(comps[c], r.path("components[" + std::to_string(c) + "]"));
      cr.allow({"weight", "mean", "sigma"});
      cr.reject_unknown();
      m.components.push_back({cr.number("weight"), cr.vector_or_empty("mean"), cr.scalar_or_vector("sigma", {1.0})});
    }
    return m;
  }
  throw ConfigError("field '" + r.path("kind") + "' has unknown distribution kind '" + kind + "'");
}

inline json distribution_to_json(const DistributionSpec& spec) {
  json j;
  j["kind"] = kind_name(spec);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianSpec>) {
          if (!s.mean.empty()) j["mean"] = s.mean;
          j["sigma"] = s.sigma;
        } else if constexpr (std::is_same_v<T, StudentTSpec>) {
          j["dof"] = s.dof;
          j["scale"] = s.scale;
          if (!s.center.empty()) j["center"] = s.center;
        } else if constexpr (std::is_same_v<T, LaplaceSpec>) {
          j["rate"] = s.rate;
          if (!s.center.empty()) j["center"] = s.center;
        } else if constexpr (std::is_same_v<T, UniformBallSpec>) {
          j["radius"] = s.radius;
          if (!s.center.empty()) j["center"] = s.center;
        } else if constexpr (std::is_same_v<T, DiracSpec>) {
          if (!s.point.empty()) j["point"] = s.point;
        } else {
          j["components"] = json::array();
          for (const auto& c : s.components) {
            json cj{{"weight", c.weight}, {"sigma", c.sigma}};
            if (!c.mean.empty()) cj["mean"] = c.mean;
            j["components"].push_back(cj);
          }
        }
      },
      spec);
  return j;
}

inline void require_positive(double v, const std::string& name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("field '" + name + "' must be positive and finite");
}

inline GaugeParams parse_gauges(const json& j, double c) {
  ObjectReader r(j, "gauges");
  const std::string regime = r.string("regime");
  GaugeParams g;
  r.allow({"regime", "r_x0", "r_w0", "D", "l1", "alpha"});
  g.D = r.number_or("D", 8.0);
  g.l1 = r.number_or("l1", 2.0);
  g.alpha = r.number_or("alpha", 1.0);
  require_positive(g.D, "gauges.D");
  require_positive(g.alpha, "gauges.alpha");
  if (regime == "polynomial") {
    r.allow({"gamma_p", "delta_p"});
    r.reject_unknown();
    GaugePolynomial p{r.number("r_x0"), r.number("gamma_p"), r.number("r_w0"), r.number("delta_p")};
    require_positive(p.r_x0, "gauges.r_x0");
    require_positive(p.r_w0, "gauges.r_w0");
    if (!(p.gamma_p > 1.0)) throw ConfigError("field 'gauges.gamma_p' must exceed 1");
    require_positive(p.delta_p, "gauges.delta_p");
    g.gauge = p;
  } else if (regime == "exponential") {
    r.allow({"gamma_e", "delta_e"});
    r.reject_unknown();
    GaugeExponential e{r.number("r_x0"), r.number("gamma_e"), r.number("r_w0"), r.number("delta_e")};
    require_positive(e.r_x0, "gauges.r_x0");
    require_positive(e.r_w0, "gauges.r_w0");
    if (!(e.gamma_e > c)) throw ConfigError("field 'gauges.gamma_e' must exceed c");
    require_positive(e.delta_e, "gauges.delta_e");
    g.gauge = e;
  } else {
    throw ConfigError("field 'gauges.regime' must be 'polynomial' or 'exponential'");
  }
  return g;
}

}  // namespace detail

inline RunConfig parse_run_config(const json& j) {
  detail::ObjectReader r(j, "");
  r.allow({"c", "beta", "kappa", "dt", "t_end", "record_every", "solver", "n", "dim", "seed", "init_x", "init_w",
           "gauges", "d_max", "output_dir", "write_snapshots"});
  r.reject_unknown();
  RunConfig cfg;
  const double c = r.number("c");
  detail::require_positive(c, "c");
  cfg.sim.c = LightSpeed(c);
  cfg.sim.beta = r.number("beta");
  cfg.sim.kappa = r.number_or("kappa", 1.0);
  cfg.sim.dt = r.has("dt") ? r.number("dt") : default_dt(cfg.sim.kappa);
  cfg.sim.t_end = r.number("t_end");
  cfg.sim.record_every = r.has("record_every") ? r.unsigned_int("record_every") : 1;
  if (r.has("solver")) {
    detail::ObjectReader s(r.at("solver"), "solver");
    s.allow({"rel_tol", "max_iter"});
    s.reject_unknown();
    cfg.sim.solver.rel_tol = s.number_or("rel_tol", cfg.sim.solver.rel_tol);
    if (s.has("max_iter")) cfg.sim.solver.max_iter = static_cast<int>(s.unsigned_int("max_iter"));
  }
  cfg.sim.validate();
  cfg.n = r.unsigned_int("n");
  cfg.dim = r.unsigned_int("dim");
  if (cfg.n == 0) throw ConfigError("field 'n' must be >= 1");
  if (cfg.dim == 0) throw ConfigError("field 'dim' must be >= 1");
  cfg.seed = r.unsigned_int("seed");
  cfg.gauges = detail::parse_gauges(r.at("gauges"), c);
  cfg.d_max = r.number_or("d_max", cfg.gauges.D);
  cfg.init_x = detail::parse_distribution(r.at("init_x"), "init_x");
  cfg.init_w = detail::parse_distribution(r.at("init_w"), "init_w");
  validate(cfg.init_x, cfg.dim, cfg.d_max);
  validate(cfg.init_w, cfg.dim, cfg.d_max);
  if (r.has("output_dir")) cfg.output_dir = r.string("output_dir");
  cfg.write_snapshots = r.boolean_or("write_snapshots", false);
  return cfg;
}

inline RunConfig parse_run_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_run_config(j);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json to_json(const RunConfig& cfg) {
  json g{{"regime", to_string(cfg.gauges.regime())}, {"D", cfg.gauges.D}, {"l1", cfg.gauges.l1},
         {"alpha", cfg.gauges.alpha}};
  if (const auto* p = std::get_if<GaugePolynomial>(&cfg.gauges.gauge)) {
    g["r_x0"] = p->r_x0;
    g["r_w0"] = p->r_w0;
    g["gamma_p"] = p->gamma_p;
    g["delta_p"] = p->delta_p;
  } else {
    const auto& e = std::get<GaugeExponential>(cfg.gauges.gauge);
    g["r_x0"] = e.r_x0;
    g["r_w0"] = e.r_w0;
    g["gamma_e"] = e.gamma_e;
    g["delta_e"] = e.delta_e;
  }
  json j{{"c", cfg.sim.c.value()},
         {"beta", cfg.sim.beta},
         {"kappa", cfg.sim.kappa},
         {"dt", cfg.sim.dt},
         {"t_end", cfg.sim.t_end},
         {"record_every", cfg.sim.record_every},
         {"solver", {{"rel_tol", cfg.sim.solver.rel_tol}, {"max_iter", cfg.sim.solver.max_iter}}},
         {"n", cfg.n},
         {"dim", cfg.dim},
         {"seed", cfg.seed},
         {"init_x", detail::distribution_to_json(cfg.init_x)},
         {"init_w", detail::distribution_to_json(cfg.init_w)},
         {"gauges", g},
         {"d_max", cfg.d_max},
         {"write_snapshots", cfg.write_snapshots}};
  if (!cfg.output_dir.empty()) j["output_dir"] = cfg.output_dir;
  return j;
}

}  // namespace rkcs
