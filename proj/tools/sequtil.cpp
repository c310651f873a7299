#include <iostream>

#include <CLI11.hpp>

#include "sequtil/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Sequential utility toolkit: validate models, test utility tables, solve AR-MDPs"};
  app.require_subcommand(1);

  sequtil::cli::RunConfig config;
  std::size_t horizon = 0;
  double tolerance = 0.0;
  double gamma = 0.0;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--input", config.input, "CMP or AR-MDP JSON file");
    sub->add_option("--table", config.table, "utility table JSON file");
    sub->add_option("--root", config.root, "root or start state");
    sub->add_option("--horizon", horizon, "horizon (solve, simulate)");
    sub->add_option("--tol", tolerance, "numerical tolerance");
    sub->add_option("--gamma", gamma, "discount folded into termination, in (0, 1]");
    sub->add_option("--seed", config.seed, "random seed");
    sub->add_option("--out", config.out, "output path (stdout when omitted)");
    sub->add_option("--level", config.level, "memoryless | additive | path-oblivious | ordinal");
    sub->add_option("--target", config.target, "affine | reward | potential");
    sub->add_option("--policy", config.policy, "policy JSON file");
    sub->add_option("--pairs", config.pairs, "pairwise comparison JSON file (ordinal level)");
    sub->add_option("--count", config.count, "number of sampled trajectories");
    sub->add_option("--max-iter", config.max_iterations, "value-iteration cap");
  };

  for (const char* name : {"validate", "check-axioms", "extract", "complete", "solve", "eval", "simulate"}) {
    common(app.add_subcommand(name));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sequtil::cli::kExitError;
  }

  for (CLI::App* sub : app.get_subcommands()) {
    config.command = sub->get_name();
    if (sub->count("--horizon")) config.horizon = horizon;
    if (sub->count("--tol")) config.tolerance = tolerance;
    if (sub->count("--gamma")) config.gamma = gamma;
  }
  return sequtil::cli::run(config, std::cout, std::cerr);
}
