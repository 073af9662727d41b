#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "insulab/cli_commands.hpp"
#include "insulab/eigen_solver.hpp"
#include "insulab/temp_decay.hpp"

namespace {

void domain_flags(CLI::App* sub, insulab::cli::RunConfig& cfg) {
  sub->add_option("--domain", cfg.domain, "kind:params, e.g. disk:1, annulus:1,2, ellipse:2,1, square:1, rectangle:2,1, "
                                          "random:7, polygon:x0,y0,..., file:PATH")
      ->capture_default_str();
  sub->add_option("--h", cfg.h, "target edge length of the base mesh")->capture_default_str();
  sub->add_option("--refine", cfg.refine, "uniform refinements of the base mesh")->capture_default_str();
  sub->add_option("--out", cfg.out, "output directory")->capture_default_str();
  sub->add_option("--seed", cfg.seed, "seed for random domains and certificates")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  using namespace insulab::cli;
  RunConfig cfg;
  std::string grid;

  CLI::App app{"insulab: optimal insulation experiments on meshed planar domains"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);

  auto* m1 = app.add_subcommand("threshold-m1", "heat content breaking threshold m1");
  domain_flags(m1, cfg);

  auto* m0 = app.add_subcommand("threshold-m0", "temperature decay breaking threshold m0");
  domain_flags(m0, cfg);
  m0->add_option("--tol", cfg.tol, "relative bracket width")->capture_default_str();

  auto* sweep = app.add_subcommand("sweep", "decay rate and vanishing set over a grid of m");
  domain_flags(sweep, cfg);
  sweep->add_option("--m-grid", grid, "a:b:n")->required();
  sweep->add_option("--jobs", cfg.jobs, "worker threads")->capture_default_str();
  sweep->add_option("--tol", cfg.tol, "relative bracket width for m0")->capture_default_str();

  auto* solve = app.add_subcommand("solve", "one minimiser of either problem");
  domain_flags(solve, cfg);
  solve->add_option("--m", cfg.m, "amount of insulating material")->required();
  solve->add_option("--problem", cfg.problem, "heat or decay")->capture_default_str();

  auto* oracle = app.add_subcommand("oracle", "closed-form ball thresholds and identity residuals");
  oracle->add_option("--n", cfg.n, "dimension")->capture_default_str();
  oracle->add_option("--radius", cfg.radius, "ball radius")->capture_default_str();

  auto* mesh = app.add_subcommand("mesh", "write the mesh of a domain");
  domain_flags(mesh, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  try {
    if (!grid.empty()) cfg.grid = parse_grid(grid);
    return run(cfg, std::cout);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const insulab::decay::BracketError& e) {
    std::cerr << "bracket error: " << e.what() << "\n";
    return 3;
  } catch (const insulab::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
