// darwin: scenario runner and verification front end.
//
//   darwin run <config.json | bundled-name>
//   darwin verify <conservation | kernels | response-algebra | noise-identities | ed | all>
//   darwin list-examples
//
// Exit codes: 0 ok, 1 physics or runtime failure, 2 usage or config error.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Darwin (1/c^2) electrodynamics scenario runner"};
  app.require_subcommand(1);

  std::string config;
  auto* run = app.add_subcommand("run", "Run a scenario config and write its artifacts");
  run->add_option("config", config, "Config path, or the name of a bundled scenario")->required();

  std::string suite;
  auto* verify = app.add_subcommand("verify", "Run an acceptance-check suite");
  verify->add_option("suite", suite, "conservation, kernels, response-algebra, noise-identities, ed or all")
      ->required();

  auto* list = app.add_subcommand("list-examples", "List the bundled scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (run->parsed()) return darwin::cli::run_command(config, std::cout, std::cerr);
  if (verify->parsed()) return darwin::cli::verify_command(suite, std::cout, std::cerr);
  if (list->parsed()) return darwin::cli::list_examples_command(std::cout, std::cerr);
  return 2;
}
