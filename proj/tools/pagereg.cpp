#include <pagereg/cli.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace
{

struct Flags
{
  std::string config;
  std::string out = ".";
  std::optional<std::string> g0;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<std::size_t> mc_cycles;
  std::optional<int> t_end;
  std::string f_file = "f.rcl";
  std::string g_file = "g.rcl";
};

pagereg::io::RunConfig load(const Flags &fl)
{
  auto cfg = pagereg::io::load_config(fl.config);
  if (fl.g0)
    cfg.run.g0 = *fl.g0;
  if (fl.seed)
    cfg.run.seed = *fl.seed;
  if (fl.tol)
  {
    if (!(*fl.tol > 0.0))
      throw pagereg::ValidationError("--tol must be positive");
    cfg.run.tol = *fl.tol;
  }
  if (fl.mc_cycles)
    cfg.run.mc_cycles = *fl.mc_cycles;
  if (fl.t_end)
    cfg.run.t_end = *fl.t_end;
  return cfg;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Paging and registration policy solver"};
  app.require_subcommand(1);
  Flags fl;

  auto add_common = [&](CLI::App *sub) {
    sub->add_option("--config", fl.config, "model configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", fl.out, "output directory");
    sub->add_option("--tol", fl.tol, "value-iteration tolerance");
    sub->add_option("--seed", fl.seed, "random seed");
  };
  auto add_pair = [&](CLI::App *sub) {
    sub->add_option("--f", fl.f_file, "paging RCL file");
    sub->add_option("--g", fl.g_file, "registration RCL file");
  };

  auto *solve = app.add_subcommand("solve", "compute an individually optimal pair");
  add_common(solve);
  solve->add_option("--g0", fl.g0, "initial registration law: never, always, threshold:<d> or a file");

  auto *evaluate = app.add_subcommand("evaluate", "exact cost of a stored pair");
  add_common(evaluate);
  add_pair(evaluate);
  evaluate->add_option("--mc-cycles", fl.mc_cycles, "Monte-Carlo replications (0 disables)");

  auto *trace = app.add_subcommand("trace", "sample path and belief trace");
  add_common(trace);
  add_pair(trace);
  trace->add_option("--t-end", fl.t_end, "last time step");

  auto *verify = app.add_subcommand("verify", "check structural results on simple or walk models");
  add_common(verify);

  CLI11_PARSE(app, argc, argv);

  return pagereg::cli::guarded(std::cerr, [&] {
    auto cfg = load(fl);
    if (*solve)
      return pagereg::cli::cmd_solve(cfg, fl.out, std::cout);
    if (*evaluate)
      return pagereg::cli::cmd_evaluate(cfg, fl.f_file, fl.g_file, fl.out, std::cout);
    if (*trace)
      return pagereg::cli::cmd_trace(cfg, fl.f_file, fl.g_file, fl.out, std::cout);
    return pagereg::cli::cmd_verify(cfg, std::cout);
  });
}
