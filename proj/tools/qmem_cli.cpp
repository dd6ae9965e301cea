// qmem <command> --config run.json --out dir [options]

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qmem/commands.hpp"

namespace {

struct Args {
  std::string config;
  std::string out = ".";
  int jobs = 1;
  std::vector<double> eps;
  std::vector<double> horizons;
  std::string grid;
  bool with_oracle = false;
};

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& help,
                      Args& args) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--config", args.config, "run configuration (JSON)")->required();
  sub->add_option("--out", args.out, "output directory");
  sub->add_option("--jobs", args.jobs, "worker threads")->check(CLI::PositiveNumber);
  return sub;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum memory criteria: deviation curves, decoherence times, "
               "discounted criteria and parameter optimization"};
  app.require_subcommand(1);
  Args args;

  auto* evaluate = add_command(app, "evaluate", "sample Delta(t) or Gamma(t) on a grid", args);
  evaluate->add_option("--grid", args.grid, "t0:t1:points");

  auto* decoherence = add_command(app, "decoherence", "decoherence times tau(eps)", args);
  decoherence->add_option("--eps", args.eps, "fidelity levels")->delimiter(',');

  auto* discounted = add_command(app, "discounted", "discounted criteria M_T", args);
  discounted->add_option("--horizon", args.horizons, "discount horizons")->delimiter(',');
  discounted->add_flag("--with-oracle", args.with_oracle, "also evaluate by quadrature");

  auto* optimize = add_command(app, "optimize", "optimize over the configured family", args);

  auto* check = add_command(app, "check-bound", "tail-probability bound on M_T Delta", args);
  check->add_option("--horizon", args.horizons, "discount horizons")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qmem::kExitConfig;
  }

  try {
    const qmem::RunConfig cfg = qmem::load_config(args.config);
    qmem::CommandOptions opts;
    opts.out_dir = args.out;
    opts.jobs = args.jobs;
    opts.with_oracle = args.with_oracle;
    if (!args.eps.empty()) opts.epsilons = args.eps;
    if (!args.horizons.empty()) opts.horizons = args.horizons;
    if (!args.grid.empty()) opts.grid = qmem::parse_grid_spec(args.grid);

    if (evaluate->parsed()) return qmem::cmd_evaluate(cfg, opts, std::cerr);
    if (decoherence->parsed()) return qmem::cmd_decoherence(cfg, opts, std::cerr);
    if (discounted->parsed()) return qmem::cmd_discounted(cfg, opts, std::cerr);
    if (optimize->parsed()) return qmem::cmd_optimize(cfg, opts, std::cerr);
    if (check->parsed()) return qmem::cmd_check_bound(cfg, opts, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return qmem::exit_code_for(e);
  }
  return qmem::kExitConfig;
}
