// swopt: forward runs, gradient checks and shape optimization from a JSON scenario
#include "swopt/cli/commands.hpp"

#include <CLI11.hpp>

int main(int argc, char** argv) {
  CLI::App app{"Shallow-water obstacle shape optimization"};
  app.require_subcommand(1);

  std::string config;
  swopt::RunFlags flags;
  auto add_flags = [&](CLI::App* sub) {
    sub->add_option("--config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
    sub->add_option_function<std::string>("--out", [&](const std::string& v) { flags.out = v; }, "output directory");
    sub->add_option_function<int>("--threads", [&](int v) { flags.threads = v; }, "worker threads")
        ->check(CLI::PositiveNumber);
    sub->add_option_function<int>("--snapshot-stride", [&](int v) { flags.snapshot_stride = v; },
                                  "write a snapshot every N steps or iterations (0: first and last)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option_function<int>("--max-iters", [&](int v) { flags.max_iters = v; }, "optimizer iteration cap")
        ->check(CLI::NonNegativeNumber);
    sub->add_option_function<unsigned>("--seed", [&](unsigned v) { flags.seed = v; }, "seed for random test fields");
  };
  auto* fwd = app.add_subcommand("forward", "solve the state equations and write snapshots and diagnostics");
  auto* gc = app.add_subcommand("gradcheck", "compare shape derivatives with central differences");
  auto* opt = app.add_subcommand("optimize", "run the shape optimization loop");
  for (auto* s : {fwd, gc, opt}) add_flags(s);

  CLI11_PARSE(app, argc, argv);
  if (fwd->parsed()) return swopt::cmd_forward(config, flags);
  if (gc->parsed()) return swopt::cmd_gradcheck(config, flags);
  return swopt::cmd_optimize(config, flags);
}
