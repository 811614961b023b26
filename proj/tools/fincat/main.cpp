#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fincat/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fincat: exact categorical calculator on finite groupoids"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string limits_spec;
  bool json_output = false;
  bool parallel = false;

  CLI::App* run = app.add_subcommand("run", "execute a scenario file");
  run->add_option("file", scenario_path, "scenario file (canonical JSON)")->required();
  run->add_flag("--json", json_output, "emit the machine-readable report on stdout");
  run->add_flag("--parallel", parallel, "run independent tasks concurrently");
  run->add_option("--limits", limits_spec,
                  "size limits, e.g. carrier=64,group=128,stalk=16,presheaf=65536");

  long corpus_size = 50;
  unsigned long long seed = 0;
  std::string counterexample_path = "fincat-counterexample.json";
  CLI::App* st = app.add_subcommand("selftest", "run the randomized property suites");
  st->add_option("--corpus-size", corpus_size, "trials per property (default 50)");
  st->add_option("--seed", seed, "random seed (default 0)");
  st->add_flag("--json", json_output, "emit the machine-readable report on stdout");
  st->add_option("--limits", limits_spec, "size limits override");
  st->add_option("--counterexample", counterexample_path,
                 "where to write a minimized failing scenario");

  CLI11_PARSE(app, argc, argv);

  fincat::scenario::Limits limits;
  try {
    limits = fincat::scenario::Limits::from_env();
    if (!limits_spec.empty()) limits.apply(limits_spec);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  fincat::scenario::RunResult res;
  if (run->parsed()) {
    res = fincat::scenario::run_scenario_file(scenario_path, limits, parallel);
  } else {
    res = fincat::scenario::selftest(corpus_size, seed, limits, counterexample_path);
  }

  if (json_output) {
    std::cout << res.machine;
    std::cerr << res.human;  // timings and tables stay on stderr
  } else {
    std::cout << res.human;
  }
  return res.exit_code;
}
