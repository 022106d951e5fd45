#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "deconv/commands.hpp"
#include "deconv/io.hpp"
#include "deconv/numeric.hpp"
#include "deconv/presets.hpp"

namespace {

struct Cli {
  std::string config_path;
  std::string preset;
  deconv::CommandOptions opt;
};

void add_common(CLI::App* cmd, Cli& cli, std::optional<std::uint64_t>& seed,
                bool with_setup = true) {
  if (with_setup) {
    cmd->add_option("--config", cli.config_path, "path to an INI config file");
    cmd->add_option("--preset", cli.preset, "name of a built-in setup");
  }
  cmd->add_option("--seed", seed, "override the configured random seed");
  cmd->add_option("--out-dir", cli.opt.out_dir, "directory for output files");
  cmd->add_option("--threads", cli.opt.threads, "worker thread count")
      ->check(CLI::Range(std::size_t{1}, std::size_t{256}));
}

std::string load_setup(const Cli& cli) {
  const bool has_config = !cli.config_path.empty();
  const bool has_preset = !cli.preset.empty();
  if (has_config == has_preset)
    throw deconv::ConfigError("pass exactly one of --config and --preset");
  return has_config ? deconv::read_text_file(cli.config_path)
                    : deconv::preset_text(cli.preset);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spectral cut-off density deconvolution laboratory"};
  app.require_subcommand(1);
  Cli cli;
  std::optional<std::uint64_t> seed;

  CLI::App* c_estimate =
      app.add_subcommand("estimate", "deconvolve one observation file");
  add_common(c_estimate, cli, seed);
  c_estimate->add_option("--y", cli.opt.y_path, "observation samples, one per line")
      ->required();
  c_estimate->add_option("--eps", cli.opt.eps_path,
                         "error samples, one per line");
  c_estimate->add_option("--known-eps", cli.opt.known_eps,
                         "error density spec, e.g. gaussian:sigma=1");

  CLI::App* c_simulate =
      app.add_subcommand("simulate", "run a Monte Carlo risk study");
  add_common(c_simulate, cli, seed);

  CLI::App* c_audit =
      app.add_subcommand("audit", "run structural and envelope checks");
  add_common(c_audit, cli, seed);

  CLI::App* c_plotdata = app.add_subcommand(
      "plotdata", "turn a finished report into plot-ready series");
  add_common(c_plotdata, cli, seed);
  c_plotdata->add_flag("--svg", cli.opt.svg, "also draw an SVG chart");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    cli.opt.seed = seed;
    const std::string text = load_setup(cli);
    if (c_estimate->parsed()) {
      const bool has_eps = !cli.opt.eps_path.empty();
      const bool has_known = !cli.opt.known_eps.empty();
      if (has_eps == has_known)
        throw deconv::ConfigError(
            "estimate needs exactly one of --eps and --known-eps");
      deconv::cmd_estimate(text, cli.opt);
    } else if (c_simulate->parsed()) {
      deconv::cmd_simulate(text, cli.opt);
    } else if (c_audit->parsed()) {
      deconv::cmd_audit(text, cli.opt);
    } else if (c_plotdata->parsed()) {
      deconv::cmd_plotdata(text, cli.opt);
    }
  } catch (const deconv::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const deconv::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const deconv::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
