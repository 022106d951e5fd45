#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "deconv/commands.hpp"
#include "deconv/models.hpp"
#include "deconv/rng.hpp"

using namespace deconv;
using Catch::Matchers::ContainsSubstring;

namespace {

std::filesystem::path fresh_dir(const std::string& leaf) {
  const auto dir =
      std::filesystem::temp_directory_path() / "deconv_cmd_test" / leaf;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

const std::string kSimText =
    "[model]\n"
    "x = gaussian:sigma=1\n"
    "eps = gaussian:sigma=1\n"
    "[estimator]\n"
    "kernel = sinc\n"
    "s = 0\n"
    "[rule]\n"
    "name = sobolev-super\n"
    "c = 1\n"
    "r = 2\n"
    "[schedule]\n"
    "n = 32,64,128,256\n"
    "replicates = 2\n"
    "[grid]\n"
    "t_max = 8\n"
    "n_points = 257\n"
    "[report]\n"
    "metric = hs_risk\n"
    "fit = power\n"
    "[run]\n"
    "seed = 11\n"
    // estimate-only section, tolerated by simulate
    "[output]\n"
    "x_count = 17\n";

nlohmann::json read_json(const std::filesystem::path& p) {
  return nlohmann::json::parse(read_text_file(p.string()));
}

}  // namespace

TEST_CASE("simulate writes cells, fit and manifest") {
  const auto dir = fresh_dir("sim");
  CommandOptions opt;
  opt.out_dir = dir.string();
  cmd_simulate(kSimText, opt);

  const auto cells = detail::read_csv((dir / "risk_cells.csv").string());
  REQUIRE(cells.header ==
          std::vector<std::string>{"n", "m", "mean", "se", "alpha", "delta"});
  REQUIRE(cells.rows.size() == 4);
  REQUIRE(cells.rows[0][0] == "32");
  REQUIRE(cells.rows[0][1] == "known");
  for (const auto& row : cells.rows)
    REQUIRE(parse_double_strict(row[2], "mean") > 0.0);

  const auto fit = read_json(dir / "rate_fit.json");
  REQUIRE(fit.at("axis") == "n");
  REQUIRE(fit.at("mode") == "power");
  REQUIRE(fit.at("points") == 4);
  REQUIRE(fit.at("exponent").get<double>() < 0.0);

  const auto manifest = read_json(dir / "run_manifest.json");
  REQUIRE(manifest.at("command") == "simulate");
  REQUIRE(manifest.at("seed") == 11);
  REQUIRE(manifest.at("outputs") ==
          nlohmann::json::array({"risk_cells.csv", "rate_fit.json"}));
  REQUIRE_FALSE(std::filesystem::exists(dir / "frontier.json"));
}

TEST_CASE("simulate output bytes do not depend on the thread count") {
  const auto one = fresh_dir("sim_t1");
  const auto two = fresh_dir("sim_t2");
  CommandOptions o1;
  o1.out_dir = one.string();
  o1.threads = 1;
  CommandOptions o2;
  o2.out_dir = two.string();
  o2.threads = 2;
  cmd_simulate(kSimText, o1);
  cmd_simulate(kSimText, o2);
  REQUIRE(read_text_file((one / "risk_cells.csv").string()) ==
          read_text_file((two / "risk_cells.csv").string()));
  REQUIRE(read_text_file((one / "rate_fit.json").string()) ==
          read_text_file((two / "rate_fit.json").string()));
}

TEST_CASE("simulate honors the seed override") {
  const auto dir = fresh_dir("sim_seed");
  CommandOptions opt;
  opt.out_dir = dir.string();
  opt.seed = 5;
  cmd_simulate(kSimText, opt);
  REQUIRE(read_json(dir / "run_manifest.json").at("seed") == 5);
}

TEST_CASE("simulate rejects configs with unknown keys") {
  const auto dir = fresh_dir("sim_bad");
  CommandOptions opt;
  opt.out_dir = dir.string();
  REQUIRE_THROWS_WITH(
      cmd_simulate(kSimText + "[extra]\nknob = 1\n", opt),
      ContainsSubstring("unknown key 'extra.knob'"));
}

TEST_CASE("estimate runs against sample files") {
  const auto dir = fresh_dir("est");
  const std::string y_path = (dir / "y.txt").string();
  const std::string e_path = (dir / "eps.txt").string();
  {
    CounterRng rng(21, stream_of(77));
    auto pair = convolve(gaussian(1.0), gaussian(1.0));
    std::string y_text;
    for (int i = 0; i < 200; ++i)
      y_text += fmt_double(pair.sample_y(rng)) + "\n";
    write_text_file(y_path, y_text);
    std::string e_text = "# error observations\n";
    for (int i = 0; i < 100; ++i)
      e_text += fmt_double(rng.normal()) + "\n";
    write_text_file(e_path, e_text);
  }
  const std::string cfg =
      "[estimator]\n"
      "kernel = sinc\n"
      "s = 0\n"
      "[rule]\n"
      "name = fixed\n"
      "c = 0.01\n"
      "[grid]\n"
      "t_max = 8\n"
      "n_points = 257\n"
      "[output]\n"
      "x_lo = -4\n"
      "x_hi = 4\n"
      "x_count = 41\n"
      // tolerated, so one pipeline config can also drive simulate
      "[run]\n"
      "seed = 3\n";

  CommandOptions known;
  known.out_dir = (dir / "known").string();
  known.y_path = y_path;
  known.known_eps = "gaussian:sigma=1";
  cmd_estimate(cfg, known);
  auto summary = read_json(dir / "known" / "estimate_summary.json");
  REQUIRE(summary.at("n") == 200);
  REQUIRE(summary.at("m") == "known");
  REQUIRE(summary.at("alpha").get<double>() == 0.01);
  REQUIRE(summary.at("mask_fraction").get<double>() > 0.0);
  REQUIRE(summary.at("mask_edge").get<double>() > 0.0);

  const auto spec =
      detail::read_csv((dir / "known" / "estimate_spectrum.csv").string());
  REQUIRE(spec.header == std::vector<std::string>{"t", "re", "im", "kept"});
  REQUIRE(spec.rows.size() == 257);
  const auto dens =
      detail::read_csv((dir / "known" / "density_points.csv").string());
  REQUIRE(dens.rows.size() == 41);
  for (const auto& row : dens.rows)
    REQUIRE(std::isfinite(parse_double_strict(row[1], "fx")));

  CommandOptions sampled;
  sampled.out_dir = (dir / "sampled").string();
  sampled.y_path = y_path;
  sampled.eps_path = e_path;
  cmd_estimate(cfg, sampled);
  auto summary2 = read_json(dir / "sampled" / "estimate_summary.json");
  REQUIRE(summary2.at("m") == 100);
}

TEST_CASE("audit writes the envelope table") {
  const auto dir = fresh_dir("audit_bias");
  const std::string cfg =
      "[model]\n"
      "x = sym_chi2:k=3\n"
      "eps = sym_chi2:k=1\n"
      "[estimator]\n"
      "s = 0\n"
      "[audit]\n"
      "kind = bias\n"
      "cond = poly\n"
      "beta = 1\n"
      "alpha_lo = 1e-4\n"
      "alpha_hi = 1e-1\n"
      "alpha_count = 4\n"
      "[grid]\n"
      "t_max = 32\n"
      "n_points = 2049\n";
  CommandOptions opt;
  opt.out_dir = dir.string();
  cmd_audit(cfg, opt);
  const auto t = detail::read_csv((dir / "bias_audit.csv").string());
  REQUIRE(t.header == std::vector<std::string>{"alpha", "lhs", "envelope",
                                               "ratio", "holds"});
  REQUIRE(t.rows.size() == 4);
  for (const auto& row : t.rows) REQUIRE(row[4] == "1");
}

TEST_CASE("audit covers moment and profile kinds") {
  const auto mdir = fresh_dir("audit_mom");
  CommandOptions mopt;
  mopt.out_dir = mdir.string();
  cmd_audit(
      "[model]\neps = gaussian:sigma=1\n"
      "[audit]\nkind = moments\nm = 100\nreplicates = 8\n",
      mopt);
  const auto mt = detail::read_csv((mdir / "moment_audit.csv").string());
  REQUIRE(mt.rows.size() == 15);
  bool saw_exact = false, saw_blank = false;
  for (const auto& row : mt.rows) {
    if (row[2] == "1" && !row[5].empty()) saw_exact = true;
    if (row[2] != "1" && row[5].empty()) saw_blank = true;
  }
  REQUIRE(saw_exact);
  REQUIRE(saw_blank);

  const auto pdir = fresh_dir("audit_prof");
  CommandOptions popt;
  popt.out_dir = pdir.string();
  cmd_audit(
      "[model]\nx = sym_chi2:k=2\n"
      "[audit]\nkind = profile\nkappa = poly:beta=1\nm = 100,10000\n"
      "[grid]\nt_max = 64\nn_points = 8193\n",
      popt);
  const auto pt = detail::read_csv((pdir / "profile.csv").string());
  REQUIRE(pt.rows.size() == 2);
  REQUIRE(parse_double_strict(pt.rows[0][1], "value") == 0.01);
  REQUIRE(parse_double_strict(pt.rows[1][1], "value") == 0.0001);

  const auto sdir = fresh_dir("audit_stoch");
  CommandOptions sopt;
  sopt.out_dir = sdir.string();
  cmd_audit(
      "[model]\nx = sym_chi2:k=3\neps = sym_chi2:k=1\n"
      "[audit]\nkind = stochastic\ncond = poly\nbeta = 1\n"
      "alpha = 0.1,0.01\nm = 50\nreplicates = 4\n"
      "[grid]\nt_max = 16\nn_points = 513\n",
      sopt);
  const auto st = detail::read_csv((sdir / "stochastic_audit.csv").string());
  REQUIRE(st.rows.size() == 2);
  for (const auto& row : st.rows)
    REQUIRE(parse_double_strict(row[4], "rate_rhs") > 0.0);
}

TEST_CASE("plotdata converts reports into plot series") {
  const auto dir = fresh_dir("plot_risk");
  CommandOptions opt;
  opt.out_dir = dir.string();
  cmd_simulate(kSimText, opt);
  opt.svg = true;
  cmd_plotdata(kSimText, opt);
  const auto t = detail::read_csv((dir / "series_risk.csv").string());
  REQUIRE(t.header ==
          std::vector<std::string>{"log_size", "log_risk", "fit"});
  REQUIRE(t.rows.size() == 4);
  for (const auto& row : t.rows)
    REQUIRE(std::isfinite(parse_double_strict(row[2], "fit")));
  const std::string svg = read_text_file((dir / "risk.svg").string());
  REQUIRE(svg.rfind("<svg", 0) == 0);

  const auto bdir = fresh_dir("plot_bias");
  CommandOptions bopt;
  bopt.out_dir = bdir.string();
  const std::string bias_cfg =
      "[model]\nx = sym_chi2:k=3\neps = sym_chi2:k=1\n"
      "[estimator]\ns = 0\n"
      "[audit]\nkind = bias\ncond = poly\nbeta = 1\n"
      "alpha_lo = 1e-3\nalpha_hi = 1e-1\nalpha_count = 4\n"
      "[grid]\nt_max = 16\nn_points = 513\n";
  cmd_audit(bias_cfg, bopt);
  cmd_plotdata(bias_cfg, bopt);
  const auto bt = detail::read_csv((bdir / "series_bias.csv").string());
  REQUIRE(bt.header == std::vector<std::string>{"log_alpha", "log_lhs",
                                                "log_envelope"});
  REQUIRE(bt.rows.size() == 4);

  const auto empty = fresh_dir("plot_empty");
  CommandOptions eopt;
  eopt.out_dir = empty.string();
  REQUIRE_THROWS_AS(cmd_plotdata(kSimText, eopt), DataError);
}

TEST_CASE("csv reader skips comments and locates columns") {
  const auto dir = fresh_dir("csv");
  const std::string p = (dir / "table.csv").string();
  write_text_file(p, "# comment\na,b\n1,2\n3,4\n");
  const auto t = detail::read_csv(p);
  REQUIRE(t.header == std::vector<std::string>{"a", "b"});
  REQUIRE(t.rows.size() == 2);
  REQUIRE(detail::csv_column(t, "b", p) == 1);
  REQUIRE_THROWS_AS(detail::csv_column(t, "c", p), DataError);
  REQUIRE_THROWS_AS(detail::read_csv((dir / "absent.csv").string()),
                    DataError);
}
