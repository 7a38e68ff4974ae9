// evodyn: simulate, verify and refine evolutionary dynamics experiments.

#include "evodyn/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

struct Options {
  std::string config;
  std::string out;
  unsigned jobs = 1;
  std::optional<std::uint64_t> seed;
};

evodyn::ExperimentConfig prepare(const Options& o) {
  evodyn::ExperimentConfig config = evodyn::load_config(o.config);
  if (o.seed) config.seed = *o.seed;
  if (!o.out.empty()) config.output_dir = o.out;
  return config;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory (overrides output.dir)");
  cmd->add_option("--seed", o.seed, "seed override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evolutionary dynamics on discretized continuum strategy sets"};
  app.require_subcommand(1);
  Options o;

  auto* simulate = app.add_subcommand("simulate", "run an EDM/DPEDM and write trajectory CSVs");
  add_common(simulate, o);
  auto* verify = app.add_subcommand("verify", "check game and protocol properties");
  add_common(verify, o);
  auto* refine = app.add_subcommand("refine", "grid refinement study");
  add_common(refine, o);
  refine->add_option("--jobs", o.jobs, "parallel simulations")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const evodyn::ExperimentConfig config = prepare(o);
    if (simulate->parsed()) {
      const auto result = evodyn::run_simulate(config, config.output_dir);
      std::cout << "final nash gap " << result.summary["final_nash_gap"].get<double>() << ", wrote "
                << config.output_dir.string() << '\n';
    } else if (verify->parsed()) {
      evodyn::run_verify(config, config.output_dir, std::cout);
    } else {
      const auto report = evodyn::run_refine(config, config.output_dir, o.jobs);
      for (const auto& row : report.rows)
        std::cout << row.n_coarse << " -> " << row.n_fine << ": sup BL " << row.sup_bl << " at t = "
                  << row.t_of_max << '\n';
    }
  } catch (const evodyn::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const evodyn::ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
