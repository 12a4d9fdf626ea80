#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "biex/app.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Two-pulse biexciton preparation: simulate, scan, optimize, validate"};
  app.require_subcommand(1, 1);

  std::string config;
  std::string out_dir;
  std::vector<std::string> overrides;
  int threads = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON experiment config (defaults when omitted)");
    sub->add_option("--out", out_dir, "Output directory (overrides output.directory)");
    sub->add_option("--override", overrides, "key.path=value applied onto the config")
        ->take_all();
    sub->add_option("--threads", threads, "Concurrent candidate evaluations")
        ->check(CLI::PositiveNumber);
  };
  for (const char* verb : {"simulate", "optimize", "scan"}) {
    add_common(app.add_subcommand(verb, std::string("Run the ") + verb + " workflow"));
  }
  app.add_subcommand("validate", "Run the built-in oracle and invariant checks");

  CLI11_PARSE(app, argc, argv);

  biex::Command cmd;
  cmd.verb = biex::parse_verb(app.get_subcommands().front()->get_name());
  cmd.config_path = config;
  cmd.output_dir = out_dir;
  cmd.overrides = overrides;
  cmd.threads = threads;
  return biex::run_command(cmd, std::cout, std::cerr);
}
