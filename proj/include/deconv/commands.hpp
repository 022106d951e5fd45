#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "deconv/config.hpp"
#include "deconv/estimators.hpp"
#include "deconv/io.hpp"
#include "deconv/models.hpp"
#include "deconv/presets.hpp"
#include "deconv/regularization.hpp"
#include "deconv/risk.hpp"

namespace deconv {

struct CommandOptions {
  std::string out_dir = ".";
  std::size_t threads = 1;
  std::optional<std::uint64_t> seed;
  bool svg = false;
  // estimate inputs
  std::string y_path;
  std::string eps_path;    // error observations
  std::string known_eps;   // error density spec when the cf is known
};

namespace detail {

inline std::string iso8601_now() {
  const std::time_t tt =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::string join_path(const std::string& dir, const std::string& file) {
  if (dir.empty() || dir == ".") return file;
  return (dir.back() == '/') ? dir + file : dir + "/" + file;
}

// The one place wall-clock time may appear: everything else must be
// byte-reproducible for a fixed config and seed.
inline void write_manifest(const std::string& out_dir,
                           const std::string& command,
                           const std::string& hash, std::uint64_t seed,
                           std::size_t threads,
                           const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["command"] = command;
  j["config_hash"] = hash;
  j["seed"] = seed;
  j["threads"] = threads;
  j["outputs"] = outputs;
  j["generated_at"] = iso8601_now();
  write_text_file(join_path(out_dir, "run_manifest.json"), j.dump(2) + "\n");
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t end = line.find(',', pos);
    if (end == std::string::npos) end = line.size();
    out.push_back(line.substr(pos, end - pos));
    pos = end + 1;
  }
  return out;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  CsvTable table;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!have_header) {
      table.header = split_csv_line(line);
      have_header = true;
    } else {
      table.rows.push_back(split_csv_line(line));
    }
  }
  if (!have_header) throw DataError("'" + path + "' has no header row");
  return table;
}

inline std::size_t csv_column(const CsvTable& t, const std::string& name,
                              const std::string& path) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return i;
  throw DataError("'" + path + "' lacks a '" + name + "' column");
}

// Minimal deterministic line chart; only data and axis bounds vary.
inline std::string svg_chart(const std::vector<double>& xs,
                             const std::vector<std::vector<double>>& series,
                             const std::vector<std::string>& labels,
                             const std::string& x_label,
                             const std::string& y_label) {
  const double w = 640.0, h = 420.0, ml = 64.0, mr = 16.0, mt = 16.0,
               mb = 48.0;
  double x_lo = xs.front(), x_hi = xs.front();
  for (const double x : xs) {
    x_lo = std::min(x_lo, x);
    x_hi = std::max(x_hi, x);
  }
  double y_lo = 0.0, y_hi = 0.0;
  bool first = true;
  for (const auto& s : series)
    for (const double y : s) {
      if (std::isnan(y)) continue;
      if (first) {
        y_lo = y_hi = y;
        first = false;
      } else {
        y_lo = std::min(y_lo, y);
        y_hi = std::max(y_hi, y);
      }
    }
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  const double px = (w - ml - mr) / (x_hi - x_lo);
  const double py = (h - mt - mb) / (y_hi - y_lo);
  const auto map_x = [&](double x) { return ml + (x - x_lo) * px; };
  const auto map_y = [&](double y) { return h - mb - (y - y_lo) * py; };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" "
         "height=\"420\" viewBox=\"0 0 640 420\">\n";
  out += "<rect width=\"640\" height=\"420\" fill=\"white\"/>\n";
  out += "<line x1=\"" + fmt_double(ml) + "\" y1=\"" + fmt_double(h - mb) +
         "\" x2=\"" + fmt_double(w - mr) + "\" y2=\"" + fmt_double(h - mb) +
         "\" stroke=\"black\"/>\n";
  out += "<line x1=\"" + fmt_double(ml) + "\" y1=\"" + fmt_double(mt) +
         "\" x2=\"" + fmt_double(ml) + "\" y2=\"" + fmt_double(h - mb) +
         "\" stroke=\"black\"/>\n";
  for (std::size_t si = 0; si < series.size(); ++si) {
    std::string pts;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (std::isnan(series[si][i])) continue;
      if (!pts.empty()) pts += " ";
      pts += fmt_double(map_x(xs[i])) + "," + fmt_double(map_y(series[si][i]));
    }
    out += "<polyline fill=\"none\" stroke=\"" +
           std::string(colors[si % 4]) + "\" stroke-width=\"1.5\" points=\"" +
           pts + "\"/>\n";
    out += "<text x=\"" + fmt_double(w - mr - 150.0) + "\" y=\"" +
           fmt_double(mt + 16.0 + 16.0 * static_cast<double>(si)) +
           "\" fill=\"" + colors[si % 4] + "\" font-size=\"12\">" +
           labels[si] + "</text>\n";
  }
  out += "<text x=\"" + fmt_double((ml + w - mr) / 2.0) + "\" y=\"" +
         fmt_double(h - 12.0) + "\" text-anchor=\"middle\" font-size=\"12\">" +
         x_label + "</text>\n";
  out += "<text x=\"16\" y=\"" + fmt_double((mt + h - mb) / 2.0) +
         "\" font-size=\"12\" transform=\"rotate(-90 16 " +
         fmt_double((mt + h - mb) / 2.0) + ")\" text-anchor=\"middle\">" +
         y_label + "</text>\n";
  out += "<text x=\"" + fmt_double(ml) + "\" y=\"" + fmt_double(h - mb + 16) +
         "\" font-size=\"10\">" + fmt_double(x_lo) + "</text>\n";
  out += "<text x=\"" + fmt_double(w - mr) + "\" y=\"" +
         fmt_double(h - mb + 16) + "\" text-anchor=\"end\" font-size=\"10\">" +
         fmt_double(x_hi) + "</text>\n";
  out += "<text x=\"" + fmt_double(ml - 4) + "\" y=\"" + fmt_double(h - mb) +
         "\" text-anchor=\"end\" font-size=\"10\">" + fmt_double(y_lo) +
         "</text>\n";
  out += "<text x=\"" + fmt_double(ml - 4) + "\" y=\"" + fmt_double(mt + 10) +
         "\" text-anchor=\"end\" font-size=\"10\">" + fmt_double(y_hi) +
         "</text>\n";
  out += "</svg>\n";
  return out;
}

// Points along the single varying schedule dimension of a cell table.
struct FitAxis {
  std::string axis;  // "n" or "m"
  std::vector<double> sizes;
  std::vector<double> risks;
};

inline FitAxis fit_axis_from_cells(const std::vector<RiskCell>& cells) {
  std::set<std::size_t> ns;
  std::set<long long> ms;
  for (const RiskCell& c : cells) {
    ns.insert(c.n);
    ms.insert(c.m);
  }
  FitAxis out;
  if (ns.size() >= 2 && ms.size() == 1) {
    out.axis = "n";
    for (const RiskCell& c : cells) {
      out.sizes.push_back(static_cast<double>(c.n));
      out.risks.push_back(c.mean);
    }
  } else if (ns.size() == 1 && ms.size() >= 2) {
    out.axis = "m";
    for (const RiskCell& c : cells) {
      if (c.m == kKnownErrorTag) continue;
      out.sizes.push_back(static_cast<double>(c.m));
      out.risks.push_back(c.mean);
    }
  } else {
    throw ConfigError(
        "rate fit: the schedule must vary exactly one of n and m");
  }
  return out;
}

}  // namespace detail

inline std::string cells_to_csv(const std::vector<RiskCell>& cells,
                                const std::string& hash) {
  std::string out = "# manifest=" + hash + "\n";
  out += "n,m,mean,se,alpha,delta\n";
  for (const RiskCell& c : cells) {
    out += fmt_size(c.n);
    out += ',';
    out += (c.m == kKnownErrorTag) ? "known" : std::to_string(c.m);
    out += ',';
    out += fmt_double(c.mean);
    out += ',';
    out += fmt_double(c.se);
    out += ',';
    out += fmt_double(c.alpha);
    out += ',';
    out += fmt_double(c.delta);
    out += '\n';
  }
  return out;
}

// Monte Carlo risk study: cells, optional rate fit, optional frontier scan.
inline void cmd_simulate(const std::string& config_text,
                         const CommandOptions& opt) {
  const ConfigMap map = parse_config_text(config_text);
  const std::string hash = config_hash(map);
  const ConfigView view(map);
  SimulationPlan plan = build_simulation_plan(view);
  // Estimation output geometry means nothing here; tolerated so the same
  // config can later drive estimate against real data.
  view.ignore_section("output");
  view.finish();
  if (opt.seed) plan.experiment.seed = *opt.seed;
  const std::vector<RiskCell> cells =
      run_experiment(plan.experiment, opt.threads);
  ensure_directory(opt.out_dir);
  std::vector<std::string> outputs;
  write_text_file(detail::join_path(opt.out_dir, "risk_cells.csv"),
                  cells_to_csv(cells, hash));
  outputs.push_back("risk_cells.csv");
  if (plan.do_fit) {
    const detail::FitAxis axis = detail::fit_axis_from_cells(cells);
    const RateFit fit = rate_fit(axis.sizes, axis.risks, plan.fit);
    nlohmann::json j;
    j["axis"] = axis.axis;
    j["mode"] = (fit.mode == FitMode::power) ? "power" : "log_power";
    j["exponent"] = fit.exponent;
    j["intercept"] = fit.intercept;
    j["se"] = fit.se;
    j["r2"] = fit.r2;
    j["points"] = fit.points;
    j["config_hash"] = hash;
    write_text_file(detail::join_path(opt.out_dir, "rate_fit.json"),
                    j.dump(2) + "\n");
    outputs.push_back("rate_fit.json");
  }
  if (plan.frontier) {
    const FrontierReport rep = m_frontier(cells);
    nlohmann::json j;
    j["attained"] = rep.attained;
    if (rep.attained) j["m"] = rep.m;
    j["baseline_mean"] = rep.baseline_mean;
    j["baseline_se"] = rep.baseline_se;
    j["config_hash"] = hash;
    write_text_file(detail::join_path(opt.out_dir, "frontier.json"),
                    j.dump(2) + "\n");
    outputs.push_back("frontier.json");
  }
  detail::write_manifest(opt.out_dir, "simulate", hash, plan.experiment.seed,
                         opt.threads, outputs);
  std::cout << "simulate: wrote " << cells.size() << " cells to "
            << opt.out_dir << "\n";
}

// One-shot estimation from observation files.
inline void cmd_estimate(const std::string& config_text,
                         const CommandOptions& opt) {
  const ConfigMap map = parse_config_text(config_text);
  const std::string hash = config_hash(map);
  const ConfigView view(map);
  view.ignore_section("model");
  view.ignore_section("schedule");
  view.ignore_section("report");
  // No randomness here either; a shared pipeline config may carry a seed.
  view.ignore_section("run");
  const KernelSpec kernel = parse_kernel(view.get_or("estimator.kernel", "sinc"));
  const double s = view.get_double("estimator.s", 0.0);
  const double bandwidth_c = view.get_double("estimator.bandwidth_c", 1.0);
  const double bandwidth_r = view.get_double("estimator.bandwidth_r", 2.0);
  ThresholdRule rule;
  rule.kind = parse_threshold_rule(view.get_or("rule.name", "fixed"));
  rule.c = view.get_double("rule.c", 1.0);
  ThresholdInputs in;
  in.beta = view.get_double_nan("rule.beta");
  in.a = view.get_double_nan("rule.a");
  in.p = view.get_double_nan("rule.p");
  in.s = s;
  in.r = view.get_double("rule.r", bandwidth_r);
  std::optional<IndexFunction> kappa;
  if (auto kp = view.get("rule.kappa")) {
    kappa = parse_index_spec(*kp);
    in.kappa = &*kappa;
  }
  const GridPtr grid = grid_from_config(view);
  const double x_lo = view.get_double("output.x_lo", -8.0);
  const double x_hi = view.get_double("output.x_hi", 8.0);
  const std::size_t x_count = view.get_size("output.x_count", 321);
  view.finish();
  if (!(x_hi > x_lo) || x_count < 2)
    throw ConfigError("output grid: needs x_lo < x_hi and x_count >= 2");

  const std::vector<double> y = read_samples(opt.y_path);
  const std::size_t n = y.size();
  const double h = bandwidth_rule(n, bandwidth_r, bandwidth_c);
  const SpectralFunction num = kde_spectrum(y, kernel, h, grid);
  in.n = static_cast<double>(n);
  in.delta = delta_proxy_data_mode(n, bandwidth_r);

  std::optional<std::size_t> m;
  DeconvEstimate est = [&]() {
    if (!opt.known_eps.empty()) {
      const DensityModel eps = parse_model(opt.known_eps);
      const SpectralFunction den = tabulate(
          grid, [&](double t) { return cplx(eps.cf(t)); }, true);
      const double alpha = threshold(rule, in);
      return deconv_known(num, den, s, alpha);
    }
    const std::vector<double> eps_draws = read_samples(opt.eps_path);
    m = eps_draws.size();
    in.m = static_cast<double>(*m);
    const EcfEstimate e = ecf(eps_draws, grid);
    const double alpha = threshold(rule, in);
    return deconv_unknown(num, e, s, alpha);
  }();

  ensure_directory(opt.out_dir);
  std::vector<std::string> outputs;
  {
    std::string csv = "# manifest=" + hash + "\n";
    csv += "t,re,im,kept\n";
    const FrequencyGrid& g = *est.spectrum.grid;
    for (std::size_t j = 0; j < g.size(); ++j) {
      csv += fmt_double(g.node(j));
      csv += ',';
      csv += fmt_double(est.spectrum.values[j].real());
      csv += ',';
      csv += fmt_double(est.spectrum.values[j].imag());
      csv += ',';
      csv += est.keep_mask[j] ? '1' : '0';
      csv += '\n';
    }
    write_text_file(detail::join_path(opt.out_dir, "estimate_spectrum.csv"),
                    csv);
    outputs.push_back("estimate_spectrum.csv");
  }
  {
    std::vector<double> points(x_count);
    for (std::size_t i = 0; i < x_count; ++i)
      points[i] = x_lo + (x_hi - x_lo) * static_cast<double>(i) /
                             static_cast<double>(x_count - 1);
    const std::vector<double> values =
        inverse_transform_at(est.spectrum, points);
    std::string csv = "# manifest=" + hash + "\n";
    csv += "x,fx\n";
    for (std::size_t i = 0; i < x_count; ++i) {
      csv += fmt_double(points[i]);
      csv += ',';
      csv += fmt_double(values[i]);
      csv += '\n';
    }
    write_text_file(detail::join_path(opt.out_dir, "density_points.csv"), csv);
    outputs.push_back("density_points.csv");
  }
  {
    nlohmann::json j;
    j["n"] = n;
    if (m)
      j["m"] = *m;
    else
      j["m"] = "known";
    j["h"] = h;
    j["s"] = s;
    j["alpha"] = est.alpha;
    j["delta"] = in.delta;
    j["mask_fraction"] = est.mask_fraction();
    j["mask_edge"] = est.mask_edge();
    j["config_hash"] = hash;
    write_text_file(detail::join_path(opt.out_dir, "estimate_summary.json"),
                    j.dump(2) + "\n");
    outputs.push_back("estimate_summary.json");
  }
  detail::write_manifest(opt.out_dir, "estimate", hash,
                         opt.seed.value_or(0), opt.threads, outputs);
  std::cout << "estimate: n=" << n << " alpha=" << fmt_double(est.alpha)
            << " kept=" << fmt_double(est.mask_fraction()) << "\n";
}

// Structural checks: envelope audits, moment scaling, resolution profiles.
inline void cmd_audit(const std::string& config_text,
                      const CommandOptions& opt) {
  const ConfigMap map = parse_config_text(config_text);
  const std::string hash = config_hash(map);
  const ConfigView view(map);
  const AuditPlan plan = build_audit_plan(view);
  view.finish();
  const std::uint64_t seed = opt.seed.value_or(plan.seed);
  ensure_directory(opt.out_dir);
  std::vector<std::string> outputs;
  switch (plan.kind) {
    case AuditKind::bias: {
      const std::vector<BiasAudit> rows =
          bias_bound_sweep(*plan.x, *plan.eps, SobolevWeight{plan.s},
                           plan.alphas, plan.cond, *plan.grid);
      std::string csv = "# manifest=" + hash + "\n";
      csv += "alpha,lhs,envelope,ratio,holds\n";
      for (const BiasAudit& r : rows) {
        csv += fmt_double(r.alpha);
        csv += ',';
        csv += fmt_double(r.lhs);
        csv += ',';
        csv += fmt_double(r.envelope);
        csv += ',';
        csv += fmt_double(r.ratio);
        csv += ',';
        if (r.holds) csv += (*r.holds ? '1' : '0');
        csv += '\n';
      }
      write_text_file(detail::join_path(opt.out_dir, "bias_audit.csv"), csv);
      outputs.push_back("bias_audit.csv");
      break;
    }
    case AuditKind::stochastic: {
      std::string csv = "# manifest=" + hash + "\n";
      csv += "m,alpha,lhs_mc,se,rate_rhs,ratio\n";
      for (const std::size_t m : plan.m_values) {
        const std::vector<StochasticBiasAudit> rows = stochastic_bias_audit(
            *plan.x, *plan.eps, SobolevWeight{plan.s}, plan.alphas, plan.cond,
            m, plan.replicates, seed, plan.grid);
        for (const StochasticBiasAudit& r : rows) {
          csv += fmt_size(r.m);
          csv += ',';
          csv += fmt_double(r.alpha);
          csv += ',';
          csv += fmt_double(r.lhs_mc);
          csv += ',';
          csv += fmt_double(r.se);
          csv += ',';
          csv += fmt_double(r.rate_rhs);
          csv += ',';
          csv += fmt_double(r.ratio);
          csv += '\n';
        }
      }
      write_text_file(detail::join_path(opt.out_dir, "stochastic_audit.csv"),
                      csv);
      outputs.push_back("stochastic_audit.csv");
      break;
    }
    case AuditKind::moments: {
      const std::vector<MomentAuditRow> rows =
          moment_bound_audit(*plan.eps, plan.m_values, plan.replicates, seed);
      std::string csv = "# manifest=" + hash + "\n";
      csv += "m,t,gamma,scaled,se,exact\n";
      for (const MomentAuditRow& r : rows) {
        csv += fmt_size(r.m);
        csv += ',';
        csv += fmt_double(r.t);
        csv += ',';
        csv += fmt_double(r.gamma);
        csv += ',';
        csv += fmt_double(r.scaled);
        csv += ',';
        csv += fmt_double(r.se);
        csv += ',';
        if (!std::isnan(r.exact)) csv += fmt_double(r.exact);
        csv += '\n';
      }
      write_text_file(detail::join_path(opt.out_dir, "moment_audit.csv"), csv);
      outputs.push_back("moment_audit.csv");
      break;
    }
    case AuditKind::profile: {
      std::string csv = "# manifest=" + hash + "\n";
      csv += "m,value,argmax_t\n";
      for (const std::size_t m : plan.m_values) {
        const ProfileDiagnostic d =
            lower_bound_diagnostic(*plan.x, *plan.kappa, m, plan.grid);
        csv += fmt_size(d.m);
        csv += ',';
        csv += fmt_double(d.value);
        csv += ',';
        csv += fmt_double(d.argmax_t);
        csv += '\n';
      }
      write_text_file(detail::join_path(opt.out_dir, "profile.csv"), csv);
      outputs.push_back("profile.csv");
      break;
    }
  }
  detail::write_manifest(opt.out_dir, "audit", hash, seed, opt.threads,
                         outputs);
  std::cout << "audit: wrote " << outputs.front() << " to " << opt.out_dir
            << "\n";
}

// Converts a finished report in out-dir into plot-ready series (and an
// optional chart). Values pass through the shortest round-trip formatter, so
// replotting never perturbs them.
inline void cmd_plotdata(const std::string& config_text,
                         const CommandOptions& opt) {
  const ConfigMap map = parse_config_text(config_text);
  const std::string hash = config_hash(map);
  const ConfigView view(map);
  const std::string fit_name = view.get_or("report.fit", "power");
  // Plot conversion touches nothing else; full validation happened when the
  // report was produced.
  std::vector<std::string> outputs;
  const std::string risk_path =
      detail::join_path(opt.out_dir, "risk_cells.csv");
  const std::string bias_path =
      detail::join_path(opt.out_dir, "bias_audit.csv");
  if (std::filesystem::exists(risk_path)) {
    const detail::CsvTable t = detail::read_csv(risk_path);
    if (t.rows.empty())
      throw DataError("'" + risk_path + "' holds no cells to plot");
    const std::size_t ci_n = detail::csv_column(t, "n", risk_path);
    const std::size_t ci_m = detail::csv_column(t, "m", risk_path);
    const std::size_t ci_mean = detail::csv_column(t, "mean", risk_path);
    std::vector<RiskCell> cells;
    for (const auto& row : t.rows) {
      RiskCell c;
      c.n = static_cast<std::size_t>(
          parse_double_strict(row[ci_n], risk_path));
      c.m = (row[ci_m] == "known")
                ? kKnownErrorTag
                : static_cast<long long>(
                      parse_double_strict(row[ci_m], risk_path));
      c.mean = parse_double_strict(row[ci_mean], risk_path);
      cells.push_back(c);
    }
    const detail::FitAxis axis = detail::fit_axis_from_cells(cells);
    std::optional<RateFit> fit;
    if (fit_name != "none" && axis.sizes.size() >= 4)
      fit = rate_fit(axis.sizes, axis.risks,
                     fit_name == "log_power" ? FitMode::log_power
                                             : FitMode::power);
    std::string csv = "# manifest=" + hash + "\n";
    csv += "log_size,log_risk,fit\n";
    std::vector<double> xs, ys, fs;
    for (std::size_t i = 0; i < axis.sizes.size(); ++i) {
      const double lx = std::log(axis.sizes[i]);
      const double ly = std::log(axis.risks[i]);
      csv += fmt_double(lx);
      csv += ',';
      csv += fmt_double(ly);
      csv += ',';
      double fv = std::numeric_limits<double>::quiet_NaN();
      if (fit) {
        const double fx =
            (fit->mode == FitMode::power) ? lx : std::log(lx);
        fv = fit->intercept + fit->exponent * fx;
        csv += fmt_double(fv);
      }
      csv += '\n';
      xs.push_back(lx);
      ys.push_back(ly);
      fs.push_back(fv);
    }
    write_text_file(detail::join_path(opt.out_dir, "series_risk.csv"), csv);
    outputs.push_back("series_risk.csv");
    if (opt.svg) {
      std::vector<std::vector<double>> series = {ys};
      std::vector<std::string> labels = {"log risk"};
      if (fit) {
        series.push_back(fs);
        labels.push_back("fit");
      }
      write_text_file(
          detail::join_path(opt.out_dir, "risk.svg"),
          detail::svg_chart(xs, series, labels, "log " + axis.axis,
                            "log risk"));
      outputs.push_back("risk.svg");
    }
  } else if (std::filesystem::exists(bias_path)) {
    const detail::CsvTable t = detail::read_csv(bias_path);
    if (t.rows.empty())
      throw DataError("'" + bias_path + "' holds no rows to plot");
    const std::size_t ci_a = detail::csv_column(t, "alpha", bias_path);
    const std::size_t ci_l = detail::csv_column(t, "lhs", bias_path);
    const std::size_t ci_e = detail::csv_column(t, "envelope", bias_path);
    std::string csv = "# manifest=" + hash + "\n";
    csv += "log_alpha,log_lhs,log_envelope\n";
    std::vector<double> xs, ls, es;
    for (const auto& row : t.rows) {
      const double a = parse_double_strict(row[ci_a], bias_path);
      const double lhs = parse_double_strict(row[ci_l], bias_path);
      const double env = parse_double_strict(row[ci_e], bias_path);
      const double la = std::log(a);
      const double ll = (lhs > 0.0)
                            ? std::log(lhs)
                            : std::numeric_limits<double>::quiet_NaN();
      const double le = std::log(env);
      csv += fmt_double(la);
      csv += ',';
      if (!std::isnan(ll)) csv += fmt_double(ll);
      csv += ',';
      csv += fmt_double(le);
      csv += '\n';
      xs.push_back(la);
      ls.push_back(ll);
      es.push_back(le);
    }
    write_text_file(detail::join_path(opt.out_dir, "series_bias.csv"), csv);
    outputs.push_back("series_bias.csv");
    if (opt.svg) {
      write_text_file(detail::join_path(opt.out_dir, "bias.svg"),
                      detail::svg_chart(xs, {ls, es},
                                        {"log truncation bias", "log envelope"},
                                        "log alpha", "log value"));
      outputs.push_back("bias.svg");
    }
  } else {
    throw DataError("no report found in '" + opt.out_dir +
                    "' (expected risk_cells.csv or bias_audit.csv)");
  }
  detail::write_manifest(opt.out_dir, "plotdata", hash, opt.seed.value_or(0),
                         opt.threads, outputs);
  std::cout << "plotdata: wrote " << outputs.front() << " to " << opt.out_dir
            << "\n";
}

}  // namespace deconv
