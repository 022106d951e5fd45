#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "deconv/index_fn.hpp"
#include "deconv/io.hpp"
#include "deconv/kernels.hpp"
#include "deconv/models.hpp"
#include "deconv/numeric.hpp"
#include "deconv/regularization.hpp"
#include "deconv/risk.hpp"

namespace deconv {

// Flat view of an INI-style file: "section.key" -> raw value text.
using ConfigMap = std::map<std::string, std::string>;

inline ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = detail::trim(detail::strip_comment(line));
    if (s.empty()) continue;
    const std::string at = "config line " + std::to_string(lineno);
    if (s.front() == '[') {
      if (s.size() < 3 || s.back() != ']')
        throw ConfigError(at + ": malformed section header '" + s + "'");
      section = detail::trim(s.substr(1, s.size() - 2));
      if (section.empty())
        throw ConfigError(at + ": empty section name");
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(at + ": expected key=value, got '" + s + "'");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string val = detail::trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError(at + ": empty key");
    if (section.empty())
      throw ConfigError(at + ": key '" + key + "' appears before any [section]");
    if (!out.emplace(section + "." + key, val).second)
      throw ConfigError(at + ": duplicate key '" + section + "." + key + "'");
  }
  return out;
}

// Sorted key=value dump; the hash of this text identifies the run setup.
inline std::string canonical_config_text(const ConfigMap& m) {
  std::string out;
  for (const auto& [k, v] : m) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string config_hash(const ConfigMap& m) {
  const std::uint64_t h = fnv1a64(canonical_config_text(m));
  char buf[17] = {};
  for (int i = 0; i < 16; ++i) {
    const auto nib = static_cast<int>((h >> (60 - 4 * i)) & 0xF);
    buf[i] = static_cast<char>(nib < 10 ? '0' + nib : 'a' + nib - 10);
  }
  return std::string(buf, 16);
}

// Typed access that records which keys were read, so anything left over can
// be rejected as a hard error instead of being silently ignored.
class ConfigView {
 public:
  explicit ConfigView(const ConfigMap& map) : map_(&map) {}

  std::optional<std::string> get(const std::string& key) const {
    seen_.insert(key);
    const auto it = map_->find(key);
    if (it == map_->end()) return std::nullopt;
    return it->second;
  }

  std::string require(const std::string& key) const {
    auto v = get(key);
    if (!v) throw ConfigError("config: missing required key '" + key + "'");
    return *v;
  }

  std::string get_or(const std::string& key, const std::string& fb) const {
    auto v = get(key);
    return v ? *v : fb;
  }

  double require_double(const std::string& key) const {
    return to_double(key, require(key));
  }

  double get_double(const std::string& key, double fb) const {
    auto v = get(key);
    return v ? to_double(key, *v) : fb;
  }

  // NaN marks "not configured"; threshold rules report missing fields by name.
  double get_double_nan(const std::string& key) const {
    return get_double(key, std::numeric_limits<double>::quiet_NaN());
  }

  std::size_t get_size(const std::string& key, std::size_t fb) const {
    auto v = get(key);
    return v ? to_size(key, *v) : fb;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fb) const {
    auto v = get(key);
    return v ? to_u64(key, *v) : fb;
  }

  bool get_bool(const std::string& key, bool fb) const {
    auto v = get(key);
    if (!v) return fb;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw ConfigError("config: key '" + key + "' expects a boolean, got '" +
                      *v + "'");
  }

  std::vector<double> require_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const std::string& tok : split_list(key, require(key)))
      out.push_back(to_double(key, tok));
    return out;
  }

  std::vector<std::size_t> require_size_list(const std::string& key) const {
    std::vector<std::size_t> out;
    for (const std::string& tok : split_list(key, require(key)))
      out.push_back(to_size(key, tok));
    return out;
  }

  // Error-sample schedule: integers plus the token "known".
  std::vector<long long> get_m_list(const std::string& key) const {
    auto v = get(key);
    std::vector<long long> out;
    if (!v) {
      out.push_back(kKnownErrorTag);
      return out;
    }
    for (const std::string& tok : split_list(key, *v)) {
      if (tok == "known") {
        out.push_back(kKnownErrorTag);
      } else {
        const std::size_t m = to_size(key, tok);
        out.push_back(static_cast<long long>(m));
      }
    }
    return out;
  }

  // Marks a whole section as intentionally unread, for commands that only
  // consume part of a shared config file.
  void ignore_section(const std::string& section) const {
    const std::string prefix = section + ".";
    for (const auto& [k, v] : *map_) {
      (void)v;
      if (k.rfind(prefix, 0) == 0) seen_.insert(k);
    }
  }

  void finish() const {
    for (const auto& [k, v] : *map_) {
      (void)v;
      if (seen_.find(k) == seen_.end())
        throw ConfigError("config: unknown key '" + k + "'");
    }
  }

 private:
  static double to_double(const std::string& key, const std::string& val) {
    double out = 0.0;
    const char* first = val.data();
    const char* last = val.data() + val.size();
    const auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc() || res.ptr != last || val.empty())
      throw ConfigError("config: key '" + key + "' expects a real, got '" +
                        val + "'");
    return out;
  }

  static std::size_t to_size(const std::string& key, const std::string& val) {
    unsigned long long out = 0;
    const char* first = val.data();
    const char* last = val.data() + val.size();
    const auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc() || res.ptr != last || val.empty())
      throw ConfigError("config: key '" + key +
                        "' expects a nonnegative integer, got '" + val + "'");
    return static_cast<std::size_t>(out);
  }

  static std::uint64_t to_u64(const std::string& key, const std::string& val) {
    return static_cast<std::uint64_t>(to_size(key, val));
  }

  static std::vector<std::string> split_list(const std::string& key,
                                             const std::string& val) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos <= val.size()) {
      std::size_t end = val.find(',', pos);
      if (end == std::string::npos) end = val.size();
      const std::string tok = detail::trim(val.substr(pos, end - pos));
      if (tok.empty())
        throw ConfigError("config: key '" + key + "' has an empty list item");
      out.push_back(tok);
      pos = end + 1;
    }
    if (out.empty())
      throw ConfigError("config: key '" + key + "' has an empty list");
    return out;
  }

  const ConfigMap* map_;
  mutable std::set<std::string> seen_;
};

// Grammar mirrors the density one: kind ':' key=value pairs,
// e.g. "poly:beta=1", "log:beta=0.5", "sqrtlog:beta=2".
inline IndexFunction parse_index_spec(const std::string& spec) {
  const std::size_t colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string ctx = "index function '" + kind + "'";
  auto params = (colon == std::string::npos)
                    ? std::map<std::string, double>{}
                    : detail::parse_params(ctx, spec.substr(colon + 1));
  IndexFunction k;
  if (kind == "poly") {
    k = make_index_polynomial(detail::take_param(params, "beta", 1.0));
  } else if (kind == "log") {
    k = make_index_logarithmic(detail::take_param(params, "beta", 1.0));
  } else if (kind == "sqrtlog") {
    k = make_index_sqrt_log_exp(detail::take_param(params, "beta", 1.0));
  } else {
    throw ConfigError("unknown index function kind '" + kind + "'");
  }
  if (!params.empty())
    throw ConfigError(ctx + ": unknown parameter '" + params.begin()->first +
                      "'");
  return k;
}

inline RiskMetric parse_metric(const std::string& name) {
  if (name == "hs_risk") return RiskMetric::hs_risk;
  if (name == "mise_y") return RiskMetric::mise_y;
  throw ConfigError("unknown report metric '" + name + "'");
}

inline YMode parse_y_mode(const std::string& name) {
  if (name == "sample") return YMode::sample;
  if (name == "oracle") return YMode::oracle;
  throw ConfigError("unknown observation mode '" + name + "'");
}

struct SimulationPlan {
  ExperimentConfig experiment;
  bool do_fit = true;
  FitMode fit = FitMode::power;
  bool frontier = false;
};

inline GridPtr grid_from_config(const ConfigView& cfg) {
  return make_grid(cfg.get_double("grid.t_max", 64.0),
                   cfg.get_size("grid.n_points", 8193));
}

inline SimulationPlan build_simulation_plan(const ConfigView& cfg) {
  SimulationPlan plan;
  ExperimentConfig& e = plan.experiment;
  e.pair = convolve(parse_model(cfg.require("model.x")),
                    parse_model(cfg.require("model.eps")));
  e.kernel = parse_kernel(cfg.get_or("estimator.kernel", "sinc"));
  e.s = cfg.get_double("estimator.s", 0.0);
  e.bandwidth_c = cfg.get_double("estimator.bandwidth_c", 1.0);
  e.bandwidth_r = cfg.get_double("estimator.bandwidth_r", 2.0);
  e.rule.kind = parse_threshold_rule(cfg.get_or("rule.name", "fixed"));
  e.rule.c = cfg.get_double("rule.c", 1.0);
  e.rule_beta = cfg.get_double_nan("rule.beta");
  e.rule_a = cfg.get_double_nan("rule.a");
  e.rule_p = cfg.get_double_nan("rule.p");
  e.rule_r = cfg.get_double_nan("rule.r");
  if (auto kp = cfg.get("rule.kappa")) e.rule_kappa = parse_index_spec(*kp);
  e.schedule.n_values = cfg.require_size_list("schedule.n");
  e.schedule.m_values = cfg.get_m_list("schedule.m");
  e.schedule.replicates = cfg.get_size("schedule.replicates", 200);
  e.schedule.pilot_replicates = cfg.get_size("schedule.pilot_replicates", 100);
  e.schedule.y_mode = parse_y_mode(cfg.get_or("schedule.y_mode", "sample"));
  e.grid = grid_from_config(cfg);
  e.seed = cfg.get_u64("run.seed", 1);
  e.metric = parse_metric(cfg.get_or("report.metric", "hs_risk"));
  const std::string fit = cfg.get_or("report.fit", "power");
  if (fit == "power") {
    plan.fit = FitMode::power;
  } else if (fit == "log_power") {
    plan.fit = FitMode::log_power;
  } else if (fit == "none") {
    plan.do_fit = false;
  } else {
    throw ConfigError("unknown fit mode '" + fit + "'");
  }
  plan.frontier = cfg.get_bool("report.frontier", false);
  return plan;
}

enum class AuditKind { bias, stochastic, moments, profile };

struct AuditPlan {
  AuditKind kind = AuditKind::bias;
  std::optional<DensityModel> x;
  std::optional<DensityModel> eps;
  SourceCondition cond;
  double s = 0.0;
  std::vector<double> alphas;
  std::vector<std::size_t> m_values;
  std::size_t replicates = 200;
  std::optional<IndexFunction> kappa;
  GridPtr grid;
  std::uint64_t seed = 1;
};

namespace detail {

inline std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > lo))
    throw ConfigError("alpha sweep: needs 0 < alpha_lo < alpha_hi");
  if (count < 2) throw ConfigError("alpha sweep: needs at least 2 points");
  std::vector<double> out(count);
  const double llo = std::log(lo);
  const double lhi = std::log(hi);
  for (std::size_t j = 0; j < count; ++j)
    out[j] = std::exp(llo + (lhi - llo) * static_cast<double>(j) /
                                static_cast<double>(count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace detail

inline AuditPlan build_audit_plan(const ConfigView& cfg) {
  AuditPlan plan;
  const std::string kind = cfg.require("audit.kind");
  if (kind == "bias") {
    plan.kind = AuditKind::bias;
  } else if (kind == "stochastic") {
    plan.kind = AuditKind::stochastic;
  } else if (kind == "moments") {
    plan.kind = AuditKind::moments;
  } else if (kind == "profile") {
    plan.kind = AuditKind::profile;
  } else {
    throw ConfigError("unknown audit kind '" + kind + "'");
  }
  plan.grid = grid_from_config(cfg);
  plan.seed = cfg.get_u64("run.seed", 1);
  plan.s = cfg.get_double("estimator.s", 0.0);
  if (plan.kind != AuditKind::moments)
    plan.x = parse_model(cfg.require("model.x"));
  if (plan.kind != AuditKind::profile)
    plan.eps = parse_model(cfg.require("model.eps"));
  if (plan.kind == AuditKind::bias || plan.kind == AuditKind::stochastic) {
    const std::string cond = cfg.get_or("audit.cond", "poly");
    if (cond == "poly") {
      plan.cond = source_poly(cfg.get_double("audit.beta", 1.0));
    } else if (cond == "log") {
      plan.cond = source_log(cfg.get_double("audit.beta", 1.0));
    } else if (cond == "general") {
      plan.cond = source_general(parse_index_spec(cfg.require("audit.kappa")));
    } else {
      throw ConfigError("unknown source condition kind '" + cond + "'");
    }
    if (auto explicit_alphas = cfg.get("audit.alpha")) {
      plan.alphas = cfg.require_double_list("audit.alpha");
    } else {
      plan.alphas = detail::log_spaced(cfg.get_double("audit.alpha_lo", 1e-4),
                                       cfg.get_double("audit.alpha_hi", 1e-1),
                                       cfg.get_size("audit.alpha_count", 12));
    }
  }
  if (plan.kind == AuditKind::profile)
    plan.kappa = parse_index_spec(cfg.require("audit.kappa"));
  if (plan.kind != AuditKind::bias) {
    plan.m_values = cfg.require_size_list("audit.m");
    for (const std::size_t m : plan.m_values)
      if (m < 1) throw ConfigError("audit: m values must be positive");
  }
  plan.replicates = cfg.get_size(
      "audit.replicates", plan.kind == AuditKind::moments ? 1000 : 200);
  return plan;
}

}  // namespace deconv
