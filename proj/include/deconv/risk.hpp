#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "deconv/estimators.hpp"
#include "deconv/grid.hpp"
#include "deconv/index_fn.hpp"
#include "deconv/kernels.hpp"
#include "deconv/models.hpp"
#include "deconv/numeric.hpp"
#include "deconv/regularization.hpp"
#include "deconv/rng.hpp"
#include "deconv/thread_pool.hpp"

namespace deconv {

// Squared L2 distance between a spectral estimate and the exact observation
// transform. By unitarity this equals the integrated squared error of the
// density estimate itself.
inline double mise_y(const SpectralFunction& est, const ConvolutionPair& pair) {
  const FrequencyGrid& g = *est.grid;
  double acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j)
    acc += g.qw(j) * std::norm(est.values[j] - pair.y_cf_at(g.node(j)));
  return acc;
}

// Weighted squared distance between a deconvolution estimate and the signal
// transform, using the weight order the estimate was built with.
inline double hs_risk(const DeconvEstimate& est, const DensityModel& x) {
  const FrequencyGrid& g = *est.spectrum.grid;
  const double s = est.s;
  double acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double t = g.node(j);
    const double l2 = (s == 0.0) ? 1.0 : std::pow(1.0 + t * t, s);
    acc += g.qw(j) * l2 * std::norm(est.spectrum.values[j] - cplx(x.cf(t)));
  }
  return acc;
}

enum class RiskMetric { hs_risk, mise_y };
enum class YMode { sample, oracle };

inline constexpr long long kKnownErrorTag = -1;

struct ScheduleConfig {
  std::vector<std::size_t> n_values;
  std::vector<long long> m_values;  // kKnownErrorTag marks the known-density arm
  std::size_t replicates = 200;
  std::size_t pilot_replicates = 100;
  YMode y_mode = YMode::sample;
};

struct ExperimentConfig {
  ConvolutionPair pair;
  KernelSpec kernel = kernel_sinc();
  double s = 0.0;
  double bandwidth_c = 1.0;
  double bandwidth_r = 2.0;
  ThresholdRule rule;
  // rule inputs that are not derived per cell
  double rule_beta = std::numeric_limits<double>::quiet_NaN();
  double rule_a = std::numeric_limits<double>::quiet_NaN();
  double rule_p = std::numeric_limits<double>::quiet_NaN();
  double rule_r = std::numeric_limits<double>::quiet_NaN();
  std::optional<IndexFunction> rule_kappa;
  ScheduleConfig schedule;
  GridPtr grid;
  std::uint64_t seed = 1;
  RiskMetric metric = RiskMetric::hs_risk;
};

struct RiskCell {
  std::size_t n = 0;
  long long m = kKnownErrorTag;
  double alpha = 0.0;
  double delta = 0.0;
  double mean = 0.0;
  double se = 0.0;
  std::size_t replicates = 0;
};

namespace detail {

// Replicate roles keep every random stream distinct across the experiment.
inline constexpr std::uint64_t kStreamY = 1;
inline constexpr std::uint64_t kStreamEps = 2;
inline constexpr std::uint64_t kStreamPilot = 3;

inline bool rule_consumes_delta(ThresholdRuleKind k) {
  using K = ThresholdRuleKind;
  switch (k) {
    case K::source_poly:
    case K::source_log:
    case K::source_general:
    case K::source_poly_m:
    case K::source_log_m:
    case K::source_general_m:
      return true;
    default:
      return false;
  }
}

inline ThresholdInputs base_rule_inputs(const ExperimentConfig& cfg) {
  ThresholdInputs in;
  in.beta = cfg.rule_beta;
  in.a = cfg.rule_a;
  in.p = cfg.rule_p;
  in.s = cfg.s;
  in.r = std::isnan(cfg.rule_r) ? cfg.bandwidth_r : cfg.rule_r;
  if (cfg.rule_kappa) in.kappa = &*cfg.rule_kappa;
  return in;
}

inline SpectralFunction smoothed_sample_spectrum(const ExperimentConfig& cfg,
                                                 std::size_t n,
                                                 CounterRng& rng) {
  const std::vector<double> y = cfg.pair.sample_y(rng, n);
  const double h = bandwidth_rule(n, cfg.bandwidth_r, cfg.bandwidth_c);
  return kde_spectrum(y, cfg.kernel, h, cfg.grid);
}

inline double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (const double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

inline double se_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (const double x : v) acc += (x - mean) * (x - mean);
  const auto k = static_cast<double>(v.size());
  return std::sqrt(acc / (k - 1.0) / k);
}

// MISE proxy for one design size, averaged over dedicated pilot replicates.
inline double pilot_delta(const ExperimentConfig& cfg, std::size_t n,
                          std::size_t threads) {
  const std::size_t reps = cfg.schedule.pilot_replicates;
  if (reps < 1) throw ConfigError("pilot delta: needs at least 1 replicate");
  std::vector<double> vals(reps, 0.0);
  parallel_for(reps, threads, [&](std::size_t rep) {
    CounterRng rng(cfg.seed, stream_of(n, 0, rep, kStreamPilot));
    vals[rep] = mise_y(smoothed_sample_spectrum(cfg, n, rng), cfg.pair);
  });
  return mean_of(vals);
}

inline SpectralFunction exact_y_spectrum(const ExperimentConfig& cfg) {
  return tabulate(
      cfg.grid, [&](double t) { return cplx(cfg.pair.y_cf_at(t)); }, true);
}

}  // namespace detail

// Runs the full replication schedule. Replicates fill preassigned slots and
// all random streams are keyed by (n, m, replicate, role), so results do not
// depend on the thread count.
inline std::vector<RiskCell> run_experiment(const ExperimentConfig& cfg,
                                            std::size_t threads = 1) {
  if (cfg.schedule.n_values.empty())
    throw ConfigError("experiment: the n schedule is empty");
  if (cfg.schedule.replicates < 1)
    throw ConfigError("experiment: needs at least 1 replicate");
  std::vector<long long> m_values = cfg.schedule.m_values;
  if (m_values.empty()) m_values.push_back(kKnownErrorTag);
  for (const long long m : m_values)
    if (m != kKnownErrorTag && m < 1)
      throw ConfigError("experiment: error sample sizes must be positive");
  if (cfg.schedule.y_mode == YMode::oracle &&
      cfg.metric == RiskMetric::mise_y)
    throw ConfigError(
        "experiment: the oracle observation mode leaves nothing for the "
        "smoothing metric to measure");

  const bool needs_delta = detail::rule_consumes_delta(cfg.rule.kind);
  const SpectralFunction eps_exact = tabulate(
      cfg.grid, [&](double t) { return cplx(cfg.pair.eps_model.cf(t)); },
      true);
  const std::optional<SpectralFunction> y_exact =
      (cfg.schedule.y_mode == YMode::oracle)
          ? std::optional<SpectralFunction>(detail::exact_y_spectrum(cfg))
          : std::nullopt;

  std::vector<RiskCell> cells;
  cells.reserve(cfg.schedule.n_values.size() * m_values.size());
  for (const std::size_t n : cfg.schedule.n_values) {
    double delta = 0.0;
    if (cfg.schedule.y_mode == YMode::sample && needs_delta)
      delta = detail::pilot_delta(cfg, n, threads);
    for (const long long m : m_values) {
      ThresholdInputs in = detail::base_rule_inputs(cfg);
      in.delta = delta;
      in.n = static_cast<double>(n);
      // The known-error arm is the m = infinity limit: rules with an
      // error-sample penalty see that term vanish exactly.
      in.m = (m == kKnownErrorTag) ? std::numeric_limits<double>::infinity()
                                   : static_cast<double>(m);
      const double alpha = (cfg.metric == RiskMetric::mise_y)
                               ? 0.0
                               : threshold(cfg.rule, in);
      const std::size_t reps = cfg.schedule.replicates;
      std::vector<double> vals(reps, 0.0);
      const std::uint64_t m_tag =
          (m == kKnownErrorTag) ? 0 : static_cast<std::uint64_t>(m);
      parallel_for(reps, threads, [&](std::size_t rep) {
        if (cfg.metric == RiskMetric::mise_y) {
          CounterRng y_rng(cfg.seed, stream_of(n, m_tag, rep, detail::kStreamY));
          vals[rep] =
              mise_y(detail::smoothed_sample_spectrum(cfg, n, y_rng), cfg.pair);
          return;
        }
        SpectralFunction num = [&]() {
          if (y_exact) return *y_exact;
          CounterRng y_rng(cfg.seed, stream_of(n, m_tag, rep, detail::kStreamY));
          return detail::smoothed_sample_spectrum(cfg, n, y_rng);
        }();
        DeconvEstimate est = [&]() {
          if (m == kKnownErrorTag)
            return deconv_known(num, eps_exact, cfg.s, alpha);
          CounterRng e_rng(cfg.seed,
                           stream_of(n, m_tag, rep, detail::kStreamEps));
          const std::vector<double> draws =
              draw_iid(cfg.pair.eps_model, e_rng, static_cast<std::size_t>(m));
          const EcfEstimate e = ecf(draws, cfg.grid);
          return deconv_unknown(num, e, cfg.s, alpha);
        }();
        vals[rep] = hs_risk(est, cfg.pair.x_model);
      });
      RiskCell cell;
      cell.n = n;
      cell.m = m;
      cell.alpha = alpha;
      cell.delta = delta;
      cell.mean = detail::mean_of(vals);
      cell.se = detail::se_of(vals, cell.mean);
      cell.replicates = reps;
      cells.push_back(cell);
    }
  }
  return cells;
}

enum class FitMode { power, log_power };

struct RateFit {
  FitMode mode = FitMode::power;
  double exponent = 0.0;
  double intercept = 0.0;
  double se = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

// Least-squares slope of log risk against log n (power mode) or against
// log log n (log-power mode, for risks that decay only logarithmically).
inline RateFit rate_fit(const std::vector<double>& sizes,
                        const std::vector<double>& risks, FitMode mode) {
  if (sizes.size() != risks.size())
    throw ConfigError("rate fit: size and risk lists differ in length");
  if (sizes.size() < 4)
    throw ConfigError("rate fit: needs at least 4 points");
  const std::size_t k = sizes.size();
  std::vector<double> xs(k), ys(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (!(sizes[i] > 1.0))
      throw ConfigError("rate fit: sizes must exceed 1");
    if (!(risks[i] > 0.0) || !std::isfinite(risks[i]))
      throw NumericError("rate fit: risks must be positive and finite");
    const double ln = std::log(sizes[i]);
    xs[i] = (mode == FitMode::power) ? ln : std::log(ln);
    ys[i] = std::log(risks[i]);
  }
  const double xm = detail::mean_of(xs);
  const double ym = detail::mean_of(ys);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    sxx += (xs[i] - xm) * (xs[i] - xm);
    sxy += (xs[i] - xm) * (ys[i] - ym);
  }
  if (!(sxx > 0.0)) throw ConfigError("rate fit: sizes are degenerate");
  RateFit fit;
  fit.mode = mode;
  fit.points = k;
  fit.exponent = sxy / sxx;
  fit.intercept = ym - fit.exponent * xm;
  double rss = 0.0, tss = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double resid = ys[i] - (fit.intercept + fit.exponent * xs[i]);
    rss += resid * resid;
    tss += (ys[i] - ym) * (ys[i] - ym);
  }
  const auto kd = static_cast<double>(k);
  fit.se = std::sqrt(std::max(0.0, rss / (kd - 2.0)) / sxx);
  fit.r2 = (tss > 0.0) ? 1.0 - rss / tss : 1.0;
  return fit;
}

struct MomentAuditRow {
  std::size_t m = 0;
  double t = 0.0;
  double gamma = 0.0;
  double scaled = 0.0;  // m^gamma times the mean of |ECF - cf|^(2 gamma)
  double se = 0.0;
  double exact = std::numeric_limits<double>::quiet_NaN();  // gamma = 1 only
};

// Checks that centered moments of the empirical transform scale like m^-gamma
// uniformly in t. The gamma = 1 row carries the closed-form second moment.
inline std::vector<MomentAuditRow> moment_bound_audit(
    const DensityModel& eps, const std::vector<std::size_t>& m_values,
    std::size_t replicates, std::uint64_t seed,
    const std::vector<double>& probes = {0.0, 0.5, 1.0, 2.0, 5.0},
    const std::vector<double>& gammas = {0.5, 1.0, 2.0}) {
  if (replicates < 2)
    throw ConfigError("moment audit: needs at least 2 replicates");
  std::vector<MomentAuditRow> rows;
  for (const std::size_t m : m_values) {
    if (m < 1) throw ConfigError("moment audit: m must be at least 1");
    std::vector<std::vector<double>> sq(probes.size());
    for (auto& v : sq) v.resize(replicates);
    for (std::size_t rep = 0; rep < replicates; ++rep) {
      CounterRng rng(seed, stream_of(m, rep, 7));
      const std::vector<double> draws = draw_iid(eps, rng, m);
      for (std::size_t pi = 0; pi < probes.size(); ++pi)
        sq[pi][rep] =
            std::norm(ecf_at(draws, probes[pi]) - cplx(eps.cf(probes[pi])));
    }
    const double md = static_cast<double>(m);
    for (std::size_t pi = 0; pi < probes.size(); ++pi) {
      for (const double gamma : gammas) {
        std::vector<double> vals(replicates);
        for (std::size_t rep = 0; rep < replicates; ++rep)
          vals[rep] = std::pow(sq[pi][rep], gamma);
        MomentAuditRow row;
        row.m = m;
        row.t = probes[pi];
        row.gamma = gamma;
        const double mean = detail::mean_of(vals);
        const double scale = std::pow(md, gamma);
        row.scaled = scale * mean;
        row.se = scale * detail::se_of(vals, mean);
        if (gamma == 1.0) {
          const double c = eps.cf(probes[pi]);
          row.exact = (1.0 - kTwoPi * c * c) / kTwoPi;
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

struct ProfileDiagnostic {
  std::size_t m = 0;
  double value = 0.0;
  double argmax_t = 0.0;
};

// Profile whose peak location marks the frequency where an m-sample stops
// resolving the error transform: below saturation the index function of the
// squared transform, above it the same value damped by 1/(m u). Scanning
// left to right keeps the first node of any flat stretch, so the reported
// |argmax| is the left plateau edge.
inline ProfileDiagnostic lower_bound_diagnostic(const DensityModel& f,
                                                const IndexFunction& kappa,
                                                std::size_t m, GridPtr grid) {
  if (m < 1) throw ConfigError("profile diagnostic: m must be at least 1");
  const FrequencyGrid& g = *grid;
  const double md = static_cast<double>(m);
  ProfileDiagnostic out;
  out.m = m;
  double best = -1.0;
  double best_t = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double t = g.node(j);
    const double c = f.cf(t);
    const double u = c * c;
    double val = 0.0;
    if (u > 0.0) {
      const double k = index_eval(kappa, u);
      val = (md * u >= 1.0) ? (k / u) * (1.0 / md) : k;
    }
    if (val > best) {
      best = val;
      best_t = t;
    }
  }
  out.value = best;
  out.argmax_t = best_t;
  return out;
}

struct FrontierReport {
  bool attained = false;
  long long m = 0;
  double baseline_mean = 0.0;
  double baseline_se = 0.0;
};

// Smallest error-sample size whose risk is statistically indistinguishable
// from the known-density arm: within 10% plus two combined standard errors.
inline FrontierReport m_frontier(const std::vector<RiskCell>& cells) {
  const RiskCell* known = nullptr;
  for (const RiskCell& c : cells)
    if (c.m == kKnownErrorTag) {
      if (known != nullptr)
        throw ConfigError("frontier: several known-density cells");
      known = &c;
    }
  if (known == nullptr)
    throw ConfigError("frontier: needs a known-density baseline cell");
  std::vector<const RiskCell*> arms;
  for (const RiskCell& c : cells)
    if (c.m != kKnownErrorTag) {
      if (c.n != known->n)
        throw ConfigError("frontier: cells mix different design sizes");
      arms.push_back(&c);
    }
  std::sort(arms.begin(), arms.end(),
            [](const RiskCell* a, const RiskCell* b) { return a->m < b->m; });
  FrontierReport rep;
  rep.baseline_mean = known->mean;
  rep.baseline_se = known->se;
  for (const RiskCell* c : arms) {
    const double slack =
        2.0 * std::sqrt(c->se * c->se + known->se * known->se);
    if (c->mean <= 1.1 * known->mean + slack) {
      rep.attained = true;
      rep.m = c->m;
      return rep;
    }
  }
  return rep;
}

}  // namespace deconv
