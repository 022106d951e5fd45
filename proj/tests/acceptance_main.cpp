// End-to-end acceptance suite. Each criterion prints exactly one line:
//   PASS criterion N: <what held> [measurements]
//   FAIL criterion N: <what broke> [measurements]
// The process exits with the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "deconv/commands.hpp"
#include "deconv/config.hpp"
#include "deconv/estimators.hpp"
#include "deconv/grid.hpp"
#include "deconv/index_fn.hpp"
#include "deconv/models.hpp"
#include "deconv/presets.hpp"
#include "deconv/regularization.hpp"
#include "deconv/risk.hpp"
#include "deconv/rng.hpp"

using namespace deconv;

namespace {

int g_failures = 0;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

std::string fmt_secs(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1fs", s);
  return buf;
}

std::string num(double v) { return fmt_double(v); }

void run_criterion(int id, const std::string& label,
                   const std::function<Outcome()>& body) {
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("unexpected exception: ") + e.what();
  }
  std::printf("%s criterion %d: %s [%s]\n", out.pass ? "PASS" : "FAIL", id,
              label.c_str(), out.detail.c_str());
  std::fflush(stdout);
  if (!out.pass) ++g_failures;
}

SimulationPlan plan_from_preset(const std::string& name) {
  const ConfigMap map = parse_config_text(preset_text(name));
  const ConfigView view(map);
  SimulationPlan plan = build_simulation_plan(view);
  view.finish();
  return plan;
}

// cmd_* helpers narrate to std::cout; keep the acceptance log one line per
// criterion by parking that chatter in a scratch buffer.
struct CoutSilencer {
  std::ostringstream sink;
  std::streambuf* saved;
  CoutSilencer() : saved(std::cout.rdbuf(sink.rdbuf())) {}
  ~CoutSilencer() { std::cout.rdbuf(saved); }
};

Outcome criterion_convolution_identity() {
  const GridPtr grid = default_grid();
  struct Case {
    ConvolutionPair pair;
    DensityModel target;
  };
  std::vector<Case> cases;
  cases.push_back({convolve(sym_chi2(1), sym_chi2(2)), sym_chi2(3)});
  cases.push_back({convolve(sym_chi2(2), sym_chi2(3)), sym_chi2(5)});
  cases.push_back(
      {convolve(gaussian(1.0), gaussian(1.5)), gaussian(std::sqrt(3.25))});
  cases.push_back({convolve(cauchy(0.5), cauchy(1.25)), cauchy(1.75)});
  double worst = 0.0;
  for (const Case& c : cases)
    for (std::size_t j = 0; j < grid->size(); ++j) {
      const double t = grid->node(j);
      const double product =
          kSqrt2Pi * c.pair.x_model.cf(t) * c.pair.eps_model.cf(t);
      worst = std::max(worst, std::abs(c.pair.y_cf(t) - product));
      worst = std::max(worst, std::abs(c.pair.y_cf(t) - c.target.cf(t)));
    }

  CounterRng rng(2026, stream_of(8, 19));
  const std::vector<double> draws = draw_iid(laplace(1.0), rng, 2000);
  const EcfEstimate est = ecf(draws, grid);
  const bool pinned =
      est.spectrum.values[grid->center()] == cplx(kInvSqrt2Pi, 0.0);
  double excess = 0.0;
  for (const cplx& v : est.spectrum.values)
    excess = std::max(excess, std::abs(v) - (kInvSqrt2Pi + 1e-14));

  const bool pass = worst < 1e-12 && pinned && excess <= 0.0;
  return {pass, "max closed-form gap " + num(worst) + ", center pinned " +
                    (pinned ? "yes" : "no") + ", modulus excess " +
                    num(std::max(excess, 0.0))};
}

Outcome criterion_exact_data_inversion() {
  const GridPtr grid = default_grid();
  const DensityModel x = sym_chi2(3);
  const DensityModel e = laplace(1.0);
  const ConvolutionPair pair = convolve(x, e);
  const SpectralFunction x_exact =
      tabulate(grid, [&](double t) { return x.cf(t); }, true);
  const SpectralFunction e_exact =
      tabulate(grid, [&](double t) { return e.cf(t); }, true);
  const SpectralFunction y_exact =
      tabulate(grid, [&](double t) { return pair.y_cf(t); }, true);
  const SourceCondition cond = source_poly(1.0);
  double worst_rel = 0.0;
  double worst_risk_rel = 0.0;
  for (const double alpha : {1e-2, 1e-3, 1e-4}) {
    const DeconvEstimate est = deconv_known(y_exact, e_exact, 0.0, alpha);
    const DeconvEstimate target =
        regularized_target(x_exact, e_exact, 0.0, alpha);
    if (est.keep_mask != target.keep_mask)
      return {false, "keep masks differ at alpha " + num(alpha)};
    for (std::size_t j = 0; j < grid->size(); ++j) {
      const double d =
          std::abs(est.spectrum.values[j] - target.spectrum.values[j]);
      const double ref = std::abs(target.spectrum.values[j]);
      if (ref > 0.0)
        worst_rel = std::max(worst_rel, d / ref);
      else if (d != 0.0)
        return {false, "nonzero estimate on a discarded node"};
    }
    const double risk = hs_risk(est, x);
    const double lhs =
        bias_bound_audit(x, e, SobolevWeight{0.0}, alpha, cond, *grid).lhs;
    worst_risk_rel = std::max(worst_risk_rel, std::abs(risk - lhs) / lhs);
  }
  const bool pass = worst_rel < 1e-12 && worst_risk_rel < 1e-8;
  return {pass, "max kept-node deviation " + num(worst_rel) +
                    " rel, risk vs tail-norm gap " + num(worst_risk_rel) +
                    " rel"};
}

Outcome criterion_bias_envelope() {
  Timer timer;
  const GridPtr grid = default_grid();
  const std::vector<double> alphas = detail::log_spaced(1e-4, 1e-1, 12);
  double worst_ratio = 0.0;
  const auto sweep_holds = [&](const DensityModel& x, const DensityModel& e) {
    const std::vector<BiasAudit> rows = bias_bound_sweep(
        x, e, SobolevWeight{0.0}, alphas, source_poly(1.0), *grid);
    bool ok = rows.size() == alphas.size();
    for (const BiasAudit& r : rows) {
      ok = ok && r.holds.has_value() && *r.holds;
      worst_ratio = std::max(worst_ratio, r.ratio);
    }
    return ok;
  };
  bool pass = sweep_holds(sym_chi2(3), sym_chi2(1));
  pass = sweep_holds(sym_chi2(3), laplace(1.0)) && pass;
  const double secs = timer.seconds();
  pass = pass && secs < 60.0;
  return {pass, "max bias/envelope ratio " + num(worst_ratio) + ", " +
                    fmt_secs(secs) + " (budget 60s)"};
}

Outcome criterion_moment_bounds() {
  Timer timer;
  const std::vector<std::size_t> ms = {100, 1000, 10000};
  const std::vector<MomentAuditRow> rows =
      moment_bound_audit(gaussian(1.0), ms, 1000, 20260819);
  std::map<std::pair<double, double>, std::vector<const MomentAuditRow*>>
      groups;
  for (const MomentAuditRow& r : rows) groups[{r.t, r.gamma}].push_back(&r);
  bool pass = true;
  double worst_spread = 0.0;
  for (const auto& [key, g] : groups) {
    if (g.size() != ms.size()) return {false, "missing audit rows"};
    if (key.first == 0.0) {
      for (const MomentAuditRow* r : g) pass = pass && r->scaled == 0.0;
      continue;
    }
    double lo = g[0]->scaled, hi = g[0]->scaled;
    for (const MomentAuditRow* r : g) {
      lo = std::min(lo, r->scaled);
      hi = std::max(hi, r->scaled);
    }
    const double spread = hi / lo;
    worst_spread = std::max(worst_spread, spread);
    pass = pass && spread < 50.0;
  }
  double worst_margin = -1.0;
  for (const MomentAuditRow& r : rows) {
    if (r.gamma != 1.0) continue;
    const double margin =
        std::abs(r.scaled - r.exact) - (3.0 * r.se + 1e-12);
    worst_margin = std::max(worst_margin, margin);
    pass = pass && margin <= 0.0;
  }
  const double secs = timer.seconds();
  pass = pass && secs < 120.0;
  return {pass, "max spread " + num(worst_spread) +
                    "x (limit 50x), worst exact-match margin " +
                    num(worst_margin) + ", " + fmt_secs(secs) +
                    " (budget 120s)"};
}

Outcome criterion_smoothed_density_rate() {
  Timer timer;
  const SimulationPlan plan = plan_from_preset("rate-kde-gauss");
  const std::vector<RiskCell> cells = run_experiment(plan.experiment, 1);
  const detail::FitAxis axis = detail::fit_axis_from_cells(cells);
  const RateFit fit = rate_fit(axis.sizes, axis.risks, FitMode::power);
  const double secs = timer.seconds();
  const bool pass = std::abs(fit.exponent + 0.8) <= 0.15 && secs < 180.0;
  return {pass, "slope " + num(fit.exponent) + " (want -0.8 +- 0.15), " +
                    fmt_secs(secs) + " (budget 180s)"};
}

Outcome criterion_ordinary_smooth_rate() {
  Timer timer;
  const SimulationPlan plan = plan_from_preset("rate-ordinary-chisq-laplace");
  const std::vector<RiskCell> cells = run_experiment(plan.experiment, 1);
  const detail::FitAxis axis = detail::fit_axis_from_cells(cells);
  const RateFit fit = rate_fit(axis.sizes, axis.risks, FitMode::power);
  const double secs = timer.seconds();
  const double want = -0.494949494949495;
  const bool pass = std::abs(fit.exponent - want) <= 0.2 && secs < 300.0;
  return {pass, "slope " + num(fit.exponent) + " (want " + num(want) +
                    " +- 0.2), " + fmt_secs(secs) + " (budget 300s)"};
}

Outcome criterion_error_sample_rate() {
  Timer timer;
  const SimulationPlan plan = plan_from_preset("rate-mterm-chisq");
  const std::vector<RiskCell> cells = run_experiment(plan.experiment, 1);
  const detail::FitAxis axis = detail::fit_axis_from_cells(cells);
  const RateFit fit = rate_fit(axis.sizes, axis.risks, FitMode::power);
  const double secs = timer.seconds();
  const bool pass = axis.axis == "m" && std::abs(fit.exponent + 1.0) <= 0.25 &&
                    secs < 240.0;
  return {pass, "slope " + num(fit.exponent) + " vs m (want -1 +- 0.25), " +
                    fmt_secs(secs) + " (budget 240s)"};
}

Outcome criterion_supersmooth_decay() {
  const SimulationPlan plan = plan_from_preset("rate-super-laplace-gauss");
  const std::vector<RiskCell> cells = run_experiment(plan.experiment, 1);
  bool decreasing = true;
  for (std::size_t i = 0; i + 1 < cells.size(); ++i) {
    const double slack = 2.0 * std::sqrt(cells[i].se * cells[i].se +
                                         cells[i + 1].se * cells[i + 1].se);
    decreasing = decreasing && cells[i + 1].mean < cells[i].mean + slack;
  }
  const detail::FitAxis axis = detail::fit_axis_from_cells(cells);
  const RateFit power_fit = rate_fit(axis.sizes, axis.risks, FitMode::power);
  const RateFit log_fit = rate_fit(axis.sizes, axis.risks, FitMode::log_power);
  const bool log_wins = log_fit.r2 > power_fit.r2;

  ThresholdInputs in;
  in.n = 1024;
  in.r = 2.0;
  in.a = 2.0;
  in.s = 0.0;
  const ThresholdRule super{ThresholdRuleKind::sobolev_super, 1.0};
  const double bare = threshold(super, in);
  ThresholdInputs with_p = in;
  with_p.p = 2.45;
  const bool ignores_p = threshold(super, with_p) == bare;
  bool ordinary_names_p = false;
  try {
    threshold(ThresholdRule{ThresholdRuleKind::sobolev_ordinary, 1.0}, in);
  } catch (const ConfigError& ex) {
    ordinary_names_p =
        std::string(ex.what()).find("requires p") != std::string::npos;
  }
  const bool pass = decreasing && log_wins && ignores_p && ordinary_names_p;
  return {pass, std::string("risk decreasing ") + (decreasing ? "yes" : "no") +
                    ", r2 log-power " + num(log_fit.r2) + " vs power " +
                    num(power_fit.r2) + ", p bookkeeping " +
                    ((ignores_p && ordinary_names_p) ? "correct" : "wrong")};
}

Outcome criterion_inverse_modulus() {
  bool asym_ok = true;
  std::string ratios;
  for (const double beta : {0.5, 1.0, 2.0}) {
    const IndexFunction k = make_index_logarithmic(beta);
    const double delta = 1e-12;
    const double ratio =
        omega_eval(k, delta) * std::pow(std::abs(std::log(delta)), beta);
    asym_ok = asym_ok && std::abs(ratio - 1.0) <= 0.05;
    if (!ratios.empty()) ratios += ", ";
    ratios += "beta " + num(beta) + " ratio " + num(ratio);
  }

  const std::vector<IndexFunction> kinds = {
      make_index_polynomial(1.0), make_index_logarithmic(1.0),
      make_index_sqrt_log_exp(1.0),
      make_index_custom({{0.1, 0.3}, {0.5, 0.75}, {1.0, 1.0}}, true)};
  double worst_resid = 0.0;
  for (const IndexFunction& k : kinds) {
    const double top = 0.9 * index_domain_max_value(k);
    for (int i = 0; i < 50; ++i) {
      const double f = static_cast<double>(i) / 49.0;
      const double delta =
          std::exp((1.0 - f) * std::log(1e-12) + f * std::log(top));
      const double v = omega_eval(k, delta);
      const double recon = v * index_inverse(k, v);
      worst_resid = std::max(worst_resid, std::abs(recon - delta) / delta);
    }
  }
  const bool resid_ok = worst_resid < 1e-12;

  double worst_scale = -1.0;
  for (const IndexFunction& k : kinds) {
    const double top = index_domain_max_value(k);
    for (const double c : {0.25, 0.5, 2.0, 7.5}) {
      for (const double delta : {1e-10, 1e-6, 1e-3}) {
        if (c * delta > 0.9 * top) continue;
        const double lhs = omega_eval(k, c * delta);
        const double rhs = std::max(c, 1.0) * omega_eval(k, delta);
        worst_scale = std::max(worst_scale, lhs - rhs * (1.0 + 1e-12));
      }
      for (const double t : {0.01, 0.1}) {
        if (c * t > 1.0) continue;
        const double lhs = index_eval(k, c * t);
        const double rhs = std::max(c, 1.0) * index_eval(k, t);
        worst_scale = std::max(worst_scale, lhs - rhs * (1.0 + 1e-12));
      }
    }
  }
  const bool scale_ok = worst_scale <= 0.0;
  const bool pass = asym_ok && resid_ok && scale_ok;
  return {pass, ratios + " (want 1 +- 0.05); max inversion residual " +
                    num(worst_resid) + " rel; scaling law " +
                    (scale_ok ? "holds" : "violated")};
}

Outcome criterion_profile_peak() {
  const GridPtr grid = default_grid();
  const DensityModel x = sym_chi2(2);
  const IndexFunction k = make_index_polynomial(1.0);
  const double dt = grid->dt();
  const struct {
    std::size_t m;
    double t_star;
  } cases[] = {{100, 0.8644973689974896}, {10000, 3.1182618571947764}};
  bool pass = true;
  std::string detail;
  for (const auto& c : cases) {
    const ProfileDiagnostic d = lower_bound_diagnostic(x, k, c.m, grid);
    const bool value_exact = d.value == 1.0 / static_cast<double>(c.m);
    const double gap = std::abs(std::abs(d.argmax_t) - c.t_star);
    pass = pass && value_exact && d.argmax_t < 0.0 && gap <= dt;
    if (!detail.empty()) detail += "; ";
    detail += "m " + fmt_size(c.m) + ": peak " + num(d.value) +
              (value_exact ? " exact" : " WRONG") + ", argmax off by " +
              num(gap);
  }
  return {pass, detail};
}

Outcome criterion_thread_invariance() {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "deconv_acceptance";
  fs::remove_all(base);
  const std::string text = preset_text("smoke");
  CommandOptions one;
  one.out_dir = (base / "t1").string();
  one.threads = 1;
  CommandOptions eight;
  eight.out_dir = (base / "t8").string();
  eight.threads = 8;
  {
    CoutSilencer quiet;
    cmd_simulate(text, one);
    cmd_simulate(text, eight);
  }
  bool pass = true;
  for (const char* f : {"risk_cells.csv", "rate_fit.json"})
    pass = pass && read_text_file((base / "t1" / f).string()) ==
                       read_text_file((base / "t8" / f).string());
  return {pass, pass ? "risk_cells.csv and rate_fit.json byte-identical for "
                       "1 and 8 threads"
                     : "outputs differ between thread counts"};
}

}  // namespace

int main() {
  run_criterion(1, "convolution identity and empirical spectrum bounds",
                criterion_convolution_identity);
  run_criterion(2, "exact-data inversion reproduces the truncated target",
                criterion_exact_data_inversion);
  run_criterion(3, "source envelope dominates the truncation bias",
                criterion_bias_envelope);
  run_criterion(4, "scaled spectral moments stay bounded and match theory",
                criterion_moment_bounds);
  run_criterion(5, "smoothed observation density attains its rate",
                criterion_smoothed_density_rate);
  run_criterion(6, "deconvolution rate under polynomial spectral decay",
                criterion_ordinary_smooth_rate);
  run_criterion(7, "risk falls inversely with the error sample size",
                criterion_error_sample_rate);
  run_criterion(8, "exponential spectral decay slows the rate to log order",
                criterion_supersmooth_decay);
  run_criterion(9, "inverse modulus asymptote, residuals and scaling",
                criterion_inverse_modulus);
  run_criterion(10, "lower-bound profile peaks at the predicted frequency",
                criterion_profile_peak);
  run_criterion(11, "simulation outputs are independent of thread count",
                criterion_thread_invariance);
  if (g_failures == 0)
    std::printf("all 11 criteria passed\n");
  else
    std::printf("%d of 11 criteria failed\n", g_failures);
  return g_failures;
}
