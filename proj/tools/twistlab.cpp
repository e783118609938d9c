// twistlab command-line front end.
//
//   twistlab <command> --config run.ini [--out DIR] [--threads N] [--verbose]
//   twistlab reference        print every configuration key with its default
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "twistlab/config.hpp"
#include "twistlab/errors.hpp"
#include "twistlab/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Twisted cohomological equations on square-tiled surfaces"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  int threads = 1;
  bool verbose = false;

  const char* help[] = {"lowest eigenpairs of the Dirichlet form and the eigenbasis cache",
                        "Weyl counting function and linear fit",
                        "one twisted cohomological solve",
                        "solve over a theta grid with L^p statistics",
                        "twisted invariant distributions and deficiency dimensions",
                        "unitary extension and boundary analytics",
                        "mode-wise product solve",
                        "time-tau construction under refinement"};
  const auto& names = twistlab::command_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    CLI::App* sub = app.add_subcommand(names[i], help[i]);
    sub->add_option("--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides [output] dir)");
    sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", verbose, "progress messages on stderr");
  }
  app.add_subcommand("reference", "print the configuration reference");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? twistlab::kExitOk : twistlab::kExitFatal;
  }

  CLI::App* chosen = app.get_subcommands().front();
  if (chosen->get_name() == "reference") {
    std::cout << twistlab::config_reference();
    return twistlab::kExitOk;
  }
  twistlab::ExperimentConfig cfg;
  try {
    cfg = twistlab::ExperimentConfig::load(config_path);
  } catch (const twistlab::Error& e) {
    std::cerr << "twistlab: error: " << e.what() << "\n";
    return twistlab::kExitFatal;
  }
  twistlab::RunOptions opt;
  opt.out_dir = out_dir;
  opt.threads = threads;
  opt.verbose = verbose;
  return twistlab::run_command(chosen->get_name(), cfg, opt);
}
