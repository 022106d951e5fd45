#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "deconv/estimators.hpp"
#include "deconv/grid.hpp"
#include "deconv/index_fn.hpp"
#include "deconv/models.hpp"
#include "deconv/numeric.hpp"
#include "deconv/rng.hpp"

namespace deconv {

enum class SourceKind { polynomial, logarithmic, general };

struct SourceCondition {
  SourceKind kind = SourceKind::polynomial;
  double beta = 1.0;     // polynomial and logarithmic kinds
  IndexFunction kappa;   // general kind
};

inline SourceCondition source_poly(double beta) {
  if (!(beta > 0.0)) throw ConfigError("source condition: beta must be positive");
  return SourceCondition{SourceKind::polynomial, beta, {}};
}

inline SourceCondition source_log(double beta) {
  if (!(beta > 0.0)) throw ConfigError("source condition: beta must be positive");
  return SourceCondition{SourceKind::logarithmic, beta, {}};
}

inline SourceCondition source_general(IndexFunction kappa) {
  return SourceCondition{SourceKind::general, 0.0, std::move(kappa)};
}

struct SourceReport {
  SourceKind kind = SourceKind::polynomial;
  double s = 0.0;
  double beta = 0.0;
  double rho_sq = 0.0;
  bool divergent = false;
  double partials[3] = {0.0, 0.0, 0.0};  // probe windows T = 64, 128, 256
};

namespace detail {

// log(l_s^2(t)) = s log(1 + t^2)
inline double log_weight_sq(double s, double t) {
  return (s == 0.0) ? 0.0 : s * std::log1p(t * t);
}

// One integrand sample of the source-constant integral
//   l_s^2 |Ff_X|^2 * g(|Ff_eps / l_s|^2)
// with g = u^{-beta}, |log u|^beta, or 1/kappa(u). Assembled from exact logs
// so that far-tail cf underflow cannot turn a divergent integrand into zero.
inline double rho_term(const DensityModel& x, const DensityModel& eps,
                       double s, const SourceCondition& cond, double t) {
  const double ll2 = log_weight_sq(s, t);
  const double lx2 = 2.0 * x.log_abs_cf(t);
  const double log_u = 2.0 * eps.log_abs_cf(t) - ll2;  // u < 1 always
  switch (cond.kind) {
    case SourceKind::polynomial:
      return std::exp(ll2 + lx2 - cond.beta * log_u);
    case SourceKind::logarithmic:
      return std::exp(ll2 + lx2) * std::pow(-log_u, cond.beta);
    case SourceKind::general: {
      const double base = std::exp(ll2 + lx2);
      const double u = std::exp(log_u);
      if (u <= 0.0)
        return (base == 0.0) ? 0.0
                             : std::numeric_limits<double>::infinity();
      return base / index_eval(cond.kappa, u);
    }
  }
  throw ConfigError("source condition: unknown kind");
}

}  // namespace detail

// The source constant rho^2 by nested quadrature on widening probe windows,
// with the same 1%-growth divergence rule as the membership probe. Takes the
// models rather than sampled spectra because the probe must evaluate the cfs
// beyond any fixed grid.
inline SourceReport rho_compute(const DensityModel& x, const DensityModel& eps,
                                double s, const SourceCondition& cond) {
  SourceReport rep;
  rep.kind = cond.kind;
  rep.s = s;
  rep.beta = cond.beta;
  const double dt = 0.015625;
  for (int probe = 0; probe < 3; ++probe) {
    const double t_max = 64.0 * static_cast<double>(1 << probe);
    const auto n = static_cast<std::size_t>(std::lround(2.0 * t_max / dt)) + 1;
    GridPtr g = make_grid(t_max, n);
    double acc = 0.0;
    for (std::size_t j = 0; j < g->size(); ++j)
      acc += g->qw(j) * detail::rho_term(x, eps, s, cond, g->node(j));
    rep.partials[probe] = acc;
  }
  if (!std::isfinite(rep.partials[2]) ||
      rep.partials[2] > 1.01 * rep.partials[1]) {
    rep.divergent = true;
    rep.rho_sq = 0.0;
  } else {
    rep.rho_sq = rep.partials[2];
  }
  return rep;
}

struct BiasAudit {
  double alpha = 0.0;
  double lhs = 0.0;       // weighted norm of the target outside the kept set
  double envelope = 0.0;  // rate factor times rho^2
  double ratio = 0.0;
  std::optional<bool> holds;  // only the polynomial kind is constant-free
  double rho_sq = 0.0;
};

namespace detail {

inline double truncated_tail_norm_sq(const DensityModel& x,
                                     const DensityModel& eps, double s,
                                     double alpha, const FrequencyGrid& g) {
  double acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double t = g.node(j);
    const double l2 = (s == 0.0) ? 1.0 : std::pow(1.0 + t * t, s);
    const double e = eps.cf(t);
    if (e * e < alpha * l2) {
      const double xc = x.cf(t);
      acc += g.qw(j) * l2 * xc * xc;
    }
  }
  return acc;
}

inline double bias_rate_factor(const SourceCondition& cond, double u) {
  switch (cond.kind) {
    case SourceKind::polynomial:
      return std::pow(u, cond.beta);
    case SourceKind::logarithmic:
      if (!(u < 1.0))
        throw ConfigError("bias audit: the log-kind envelope needs alpha < 1");
      return std::pow(-std::log(u), -cond.beta);
    case SourceKind::general:
      return index_eval(cond.kappa, std::min(u, 1.0));
  }
  throw ConfigError("source condition: unknown kind");
}

}  // namespace detail

// Compares the weighted norm of the target outside the kept set against the
// source-condition envelope. The polynomial kind is a constant-free
// inequality and gets a pass/fail; the other kinds carry unknown constants,
// so only the ratio is reported and tracked for boundedness across sweeps.
// The sweep form prices the source constant once.
inline std::vector<BiasAudit> bias_bound_sweep(const DensityModel& x,
                                               const DensityModel& eps,
                                               const SobolevWeight& w,
                                               const std::vector<double>& alphas,
                                               const SourceCondition& cond,
                                               const FrequencyGrid& grid) {
  for (const double a : alphas)
    if (!(a > 0.0)) throw ConfigError("bias audit: alpha must be positive");
  const SourceReport rho = rho_compute(x, eps, w.s, cond);
  if (rho.divergent)
    throw NumericError("bias audit: the source constant rho diverges");
  std::vector<BiasAudit> out;
  out.reserve(alphas.size());
  for (const double alpha : alphas) {
    BiasAudit row;
    row.alpha = alpha;
    row.rho_sq = rho.rho_sq;
    row.lhs = detail::truncated_tail_norm_sq(x, eps, w.s, alpha, grid);
    row.envelope = detail::bias_rate_factor(cond, alpha) * rho.rho_sq;
    row.ratio = (row.envelope > 0.0) ? row.lhs / row.envelope : 0.0;
    if (cond.kind == SourceKind::polynomial)
      row.holds = row.lhs <= row.envelope;
    out.push_back(row);
  }
  return out;
}

inline BiasAudit bias_bound_audit(const DensityModel& x,
                                  const DensityModel& eps,
                                  const SobolevWeight& w, double alpha,
                                  const SourceCondition& cond,
                                  const FrequencyGrid& grid) {
  return bias_bound_sweep(x, eps, w, {alpha}, cond, grid).front();
}

struct StochasticBiasAudit {
  double alpha = 0.0;
  std::size_t m = 0;
  double lhs_mc = 0.0;    // Monte Carlo mean over replicate error samples
  double se = 0.0;
  double rate_rhs = 0.0;  // sample-size-aware envelope times rho^2
  double ratio = 0.0;
};

// Monte Carlo version of the bias audit with the indicator driven by the
// empirical error transform of an m-sample. One ECF per replicate serves the
// whole alpha sweep.
inline std::vector<StochasticBiasAudit> stochastic_bias_audit(
    const DensityModel& x, const DensityModel& eps, const SobolevWeight& w,
    const std::vector<double>& alphas, const SourceCondition& cond,
    std::size_t m, std::size_t replicates, std::uint64_t seed, GridPtr grid) {
  if (m < 1) throw ConfigError("stochastic bias audit: m must be at least 1");
  if (replicates < 1)
    throw ConfigError("stochastic bias audit: needs at least 1 replicate");
  for (const double a : alphas)
    if (!(a > 0.0))
      throw ConfigError("stochastic bias audit: alpha must be positive");
  const SourceReport rho = rho_compute(x, eps, w.s, cond);
  if (rho.divergent)
    throw NumericError("stochastic bias audit: the source constant diverges");
  const FrequencyGrid& g = *grid;
  std::vector<double> base(g.size());
  std::vector<double> l2(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double t = g.node(j);
    l2[j] = (w.s == 0.0) ? 1.0 : std::pow(1.0 + t * t, w.s);
    const double xc = x.cf(t);
    base[j] = g.qw(j) * l2[j] * xc * xc;
  }
  std::vector<double> sum(alphas.size(), 0.0);
  std::vector<double> sum_sq(alphas.size(), 0.0);
  for (std::size_t rep = 0; rep < replicates; ++rep) {
    CounterRng rng(seed, stream_of(m, rep, 31));
    const std::vector<double> draws = draw_iid(eps, rng, m);
    const EcfEstimate e = ecf(draws, grid);
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
      double lhs = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j)
        if (std::norm(e.spectrum.values[j]) < alphas[ai] * l2[j])
          lhs += base[j];
      sum[ai] += lhs;
      sum_sq[ai] += lhs * lhs;
    }
  }
  std::vector<StochasticBiasAudit> out(alphas.size());
  const double md = static_cast<double>(m);
  const auto rd = static_cast<double>(replicates);
  for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
    StochasticBiasAudit& row = out[ai];
    row.alpha = alphas[ai];
    row.m = m;
    row.lhs_mc = sum[ai] / rd;
    const double var =
        (replicates > 1)
            ? std::max(0.0, (sum_sq[ai] - rd * row.lhs_mc * row.lhs_mc) /
                                (rd - 1.0))
            : 0.0;
    row.se = std::sqrt(var / rd);
    double factor = 0.0;
    switch (cond.kind) {
      case SourceKind::polynomial:
        factor = std::pow(alphas[ai], cond.beta) + std::pow(md, -cond.beta);
        break;
      case SourceKind::logarithmic:
        factor = detail::bias_rate_factor(cond, alphas[ai] + 1.0 / md);
        break;
      case SourceKind::general:
        factor = index_eval(cond.kappa, std::min(alphas[ai] + 1.0 / md, 1.0));
        break;
    }
    row.rate_rhs = factor * rho.rho_sq;
    row.ratio = (row.rate_rhs > 0.0) ? row.lhs_mc / row.rate_rhs : 0.0;
  }
  return out;
}

enum class ThresholdRuleKind {
  fixed,
  source_poly,
  source_log,
  source_general,
  sobolev_ordinary,
  sobolev_super,
  source_poly_m,
  source_log_m,
  source_general_m,
  sobolev_ordinary_m,
  sobolev_super_m
};

struct ThresholdRule {
  ThresholdRuleKind kind = ThresholdRuleKind::fixed;
  double c = 1.0;
};

// Everything any rule might consume; absent fields stay NaN and are reported
// by name when a rule that needs them finds them missing.
struct ThresholdInputs {
  double delta = std::numeric_limits<double>::quiet_NaN();
  double n = std::numeric_limits<double>::quiet_NaN();
  double m = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  double a = std::numeric_limits<double>::quiet_NaN();
  double p = std::numeric_limits<double>::quiet_NaN();
  double s = std::numeric_limits<double>::quiet_NaN();
  double r = std::numeric_limits<double>::quiet_NaN();
  const IndexFunction* kappa = nullptr;
};

inline const char* threshold_rule_name(ThresholdRuleKind k) {
  switch (k) {
    case ThresholdRuleKind::fixed: return "fixed";
    case ThresholdRuleKind::source_poly: return "source-poly";
    case ThresholdRuleKind::source_log: return "source-log";
    case ThresholdRuleKind::source_general: return "source-general";
    case ThresholdRuleKind::sobolev_ordinary: return "sobolev-ordinary";
    case ThresholdRuleKind::sobolev_super: return "sobolev-super";
    case ThresholdRuleKind::source_poly_m: return "source-poly-m";
    case ThresholdRuleKind::source_log_m: return "source-log-m";
    case ThresholdRuleKind::source_general_m: return "source-general-m";
    case ThresholdRuleKind::sobolev_ordinary_m: return "sobolev-ordinary-m";
    case ThresholdRuleKind::sobolev_super_m: return "sobolev-super-m";
  }
  return "?";
}

inline ThresholdRuleKind parse_threshold_rule(const std::string& name) {
  for (const auto k :
       {ThresholdRuleKind::fixed, ThresholdRuleKind::source_poly,
        ThresholdRuleKind::source_log, ThresholdRuleKind::source_general,
        ThresholdRuleKind::sobolev_ordinary, ThresholdRuleKind::sobolev_super,
        ThresholdRuleKind::source_poly_m, ThresholdRuleKind::source_log_m,
        ThresholdRuleKind::source_general_m,
        ThresholdRuleKind::sobolev_ordinary_m,
        ThresholdRuleKind::sobolev_super_m})
    if (name == threshold_rule_name(k)) return k;
  throw ConfigError("unknown threshold rule '" + name + "'");
}

namespace detail {

inline double need(const ThresholdRule& rule, double v, const char* field) {
  if (std::isnan(v))
    throw ConfigError(std::string("threshold rule '") +
                      threshold_rule_name(rule.kind) + "' requires " + field);
  return v;
}

inline double need_positive_delta(const ThresholdRule& rule, double v) {
  need(rule, v, "delta");
  if (!(v > 0.0))
    throw ConfigError(std::string("threshold rule '") +
                      threshold_rule_name(rule.kind) +
                      "' needs a positive delta");
  return v;
}

inline double need_count(const ThresholdRule& rule, double v,
                         const char* field) {
  need(rule, v, field);
  if (!(v >= 1.0))
    throw ConfigError(std::string("threshold rule '") +
                      threshold_rule_name(rule.kind) + "' needs " + field +
                      " >= 1");
  return v;
}

inline const IndexFunction& need_kappa(const ThresholdRule& rule,
                                       const ThresholdInputs& in) {
  if (in.kappa == nullptr)
    throw ConfigError(std::string("threshold rule '") +
                      threshold_rule_name(rule.kind) +
                      "' requires an index function");
  if (!in.kappa->concave)
    throw ConfigError(std::string("threshold rule '") +
                      threshold_rule_name(rule.kind) +
                      "' requires a concave index function");
  return *in.kappa;
}

}  // namespace detail

// The cut-off level for every supported calibration strategy. delta is the
// MISE proxy of the smoothed observation-density estimate; rules with an
// "-m" suffix add the error-sample term.
inline double threshold(const ThresholdRule& rule, const ThresholdInputs& in) {
  using K = ThresholdRuleKind;
  if (!(rule.c > 0.0)) throw ConfigError("threshold rule: c must be positive");
  const auto sobolev_ordinary_power = [&]() {
    const double a = detail::need(rule, in.a, "a");
    const double s = detail::need(rule, in.s, "s");
    const double p = detail::need(rule, in.p, "p");
    const double n = detail::need_count(rule, in.n, "n");
    return std::pow(n, -2.0 * (a + s) / (2.0 * (p + a) + 1.0));
  };
  const auto sobolev_super_power = [&]() {
    const double r = detail::need(rule, in.r, "r");
    const double n = detail::need_count(rule, in.n, "n");
    return std::pow(n, -r / (2.0 * r + 1.0));
  };
  double alpha = 0.0;
  switch (rule.kind) {
    case K::fixed:
      alpha = rule.c;
      break;
    case K::source_poly: {
      const double beta = detail::need(rule, in.beta, "beta");
      const double d = detail::need_positive_delta(rule, in.delta);
      alpha = rule.c * std::pow(d, 1.0 / (beta + 1.0));
      break;
    }
    case K::source_log: {
      const double d = detail::need_positive_delta(rule, in.delta);
      alpha = rule.c * std::sqrt(d);
      break;
    }
    case K::source_general: {
      const IndexFunction& kappa = detail::need_kappa(rule, in);
      const double d = detail::need_positive_delta(rule, in.delta);
      alpha = rule.c * d / omega_eval(kappa, rule.c * d);
      break;
    }
    case K::sobolev_ordinary:
      alpha = rule.c * sobolev_ordinary_power();
      break;
    case K::sobolev_super:
      alpha = rule.c * sobolev_super_power();
      break;
    case K::source_poly_m: {
      const double beta = detail::need(rule, in.beta, "beta");
      const double d = detail::need(rule, in.delta, "delta");
      const double m = detail::need_count(rule, in.m, "m");
      alpha = rule.c * (std::pow(d, 1.0 / (beta + 1.0)) + 1.0 / m);
      break;
    }
    case K::source_log_m: {
      const double d = detail::need(rule, in.delta, "delta");
      const double m = detail::need_count(rule, in.m, "m");
      alpha = rule.c * (std::sqrt(d) + 1.0 / std::sqrt(m));
      break;
    }
    case K::source_general_m: {
      const IndexFunction& kappa = detail::need_kappa(rule, in);
      const double d = detail::need(rule, in.delta, "delta");
      const double m = detail::need_count(rule, in.m, "m");
      const double dterm = (d > 0.0) ? d / omega_eval(kappa, d) : 0.0;
      alpha = rule.c * (dterm + 1.0 / m);
      break;
    }
    case K::sobolev_ordinary_m: {
      const double m = detail::need_count(rule, in.m, "m");
      alpha = rule.c * (sobolev_ordinary_power() + 1.0 / m);
      break;
    }
    case K::sobolev_super_m: {
      const double m = detail::need_count(rule, in.m, "m");
      alpha = rule.c * (sobolev_super_power() + 1.0 / std::sqrt(m));
      break;
    }
  }
  if (!(alpha > 0.0))
    throw NumericError("threshold rule produced a nonpositive alpha");
  return alpha;
}

// The theoretical MISE proxy used when no simulation estimate is available:
// the smoothing rate n^{-2r/(2r+1)} for a kernel of order r.
inline double delta_proxy_data_mode(std::size_t n, double r) {
  if (n < 1) throw ConfigError("delta proxy: n must be at least 1");
  if (!(r > 0.0)) throw ConfigError("delta proxy: r must be positive");
  return std::pow(static_cast<double>(n), -2.0 * r / (2.0 * r + 1.0));
}

}  // namespace deconv
