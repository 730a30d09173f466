#pragma once

#include "io.hpp"
#include "pagereg.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <ostream>
#include <string>

namespace pagereg::cli
{

enum ExitCode : int
{
  kSuccess = 0,
  kVerifyFailed = 1,
  kValidation = 2,
  kNonConvergence = 3,
  kCapExceeded = 4
};

// Runs `body`, printing any library error to `err` and mapping it to an exit code.
inline int guarded(std::ostream &err, const std::function<int()> &body)
{
  try
  {
    return body();
  }
  catch (const ValidationError &e)
  {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
  catch (const NonConvergence &e)
  {
    err << "error: " << e.what() << '\n';
    return kNonConvergence;
  }
  catch (const CapExceeded &e)
  {
    err << "error: " << e.what() << '\n';
    return kCapExceeded;
  }
  catch (const ZeroSurvivalMass &e)
  {
    err << "error: " << e.what() << '\n';
    return kValidation;
  }
}

// `never`, `always`, `threshold:<d>` (register everywhere once k >= d), or a
// registration RCL file.
inline RegistrationRCL parse_g0(const std::string &spec, const MotionModel &model)
{
  if (spec == "never")
    return RegistrationRCL::never(model);
  if (spec == "always")
    return RegistrationRCL::always(model);
  const std::string prefix = "threshold:";
  if (spec.rfind(prefix, 0) == 0)
  {
    int d = 0;
    try
    {
      std::size_t used = 0;
      d = std::stoi(spec.substr(prefix.size()), &used);
      if (used != spec.size() - prefix.size())
        throw std::invalid_argument(spec);
    }
    catch (const std::exception &)
    {
      throw ValidationError("bad g0 threshold \"" + spec + "\"");
    }
    if (d < 1)
      throw ValidationError("g0 threshold must be at least 1");
    return RegistrationRCL::timer(model, d);
  }
  return io::load_registration_rcl(spec, model);
}

namespace detail
{

inline std::filesystem::path prepare_dir(const std::string &dir)
{
  std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  return p;
}

inline void write_json(const std::filesystem::path &path, const io::json &j)
{
  std::ofstream out(path);
  if (!out)
    throw ValidationError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

template <typename Rcl>
void write_rcl_file(const std::filesystem::path &path, const Rcl &rcl)
{
  std::ofstream out(path);
  if (!out)
    throw ValidationError("cannot write " + path.string());
  io::write_rcl(out, rcl);
}

inline const char *verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

inline IterationOptions iteration_options(const io::RunOptions &run)
{
  IterationOptions opt;
  opt.max_rounds = run.max_rounds;
  opt.dp.tol = run.tol;
  return opt;
}

} // namespace detail

// Alternating optimization from g0; writes f.rcl, g.rcl and log.json.
inline int cmd_solve(const io::RunConfig &cfg, const std::string &out_dir, std::ostream &msg)
{
  auto g0 = parse_g0(cfg.run.g0, cfg.model);
  auto log = individually_optimal(cfg.model, g0, detail::iteration_options(cfg.run));
  auto dir = detail::prepare_dir(out_dir);
  detail::write_rcl_file(dir / "f.rcl", log.f);
  detail::write_rcl_file(dir / "g.rcl", log.g);

  io::json j = io::to_json(log);
  j["kind"] = cfg.kind;
  j["g0"] = cfg.run.g0;
  if (cfg.kind == "simple")
  {
    auto chain = reachable_beliefs(cfg.model, cfg.run.belief_cap);
    auto dp = joint_dp(cfg.model, chain);
    j["joint_optimum"] = dp.value[static_cast<std::size_t>(chain.find_point(cfg.model.n_states(), cfg.model.x0()))];
  }
  if (cfg.walk)
    j["walk_structure"] = io::to_json(check_walk_structure(*cfg.walk, log.f, log.g));
  detail::write_json(dir / "log.json", j);

  msg << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto &r : log.rounds)
    msg << "round " << r.round << ": C(f,g) = " << r.cost_after_paging << ", after registration step "
        << r.cost_after_registration << '\n';
  msg << "final cost " << log.final_cost() << " after " << log.rounds.size() << " round(s)\n";
  return kSuccess;
}

// Exact cost of a stored pair, with an optional Monte-Carlo cross-check.
inline int cmd_evaluate(const io::RunConfig &cfg, const std::string &f_file, const std::string &g_file,
                        const std::string &out_dir, std::ostream &msg)
{
  auto f = io::load_paging_rcl(f_file, cfg.model);
  auto g = io::load_registration_rcl(g_file, cfg.model);
  auto report = policy_cost(cfg.model, f, g);
  io::json j = io::to_json(report);
  msg << std::setprecision(std::numeric_limits<double>::max_digits10);
  msg << "cost " << report.total << '\n';
  if (cfg.run.mc_cycles > 0)
  {
    auto est = monte_carlo_cost(cfg.model, f, g, cfg.run.seed, cfg.run.mc_cycles);
    j["monte_carlo"] = io::to_json(est);
    j["monte_carlo"]["seed"] = cfg.run.seed;
    j["monte_carlo"]["algorithm"] = kRngAlgorithm;
    msg << "monte carlo " << est.mean << " +/- " << est.std_error << " (" << est.replications << " paths, seed "
        << cfg.run.seed << ")\n";
  }
  detail::write_json(detail::prepare_dir(out_dir) / "report.json", j);
  return kSuccess;
}

// Sample path with beliefs; writes trace.txt and trace_plot.tsv.
inline int cmd_trace(const io::RunConfig &cfg, const std::string &f_file, const std::string &g_file,
                     const std::string &out_dir, std::ostream &msg)
{
  auto f = io::load_paging_rcl(f_file, cfg.model);
  auto g = io::load_registration_rcl(g_file, cfg.model);
  auto trace = export_trace(cfg.model, f, g, cfg.run.seed, cfg.run.t_end);
  auto dir = detail::prepare_dir(out_dir);
  {
    std::ofstream out(dir / "trace.txt");
    io::write_trace(out, trace);
  }
  {
    std::ofstream out(dir / "trace_plot.tsv");
    io::write_plot_table(out, trace, cfg.torus);
  }
  int reports = 0;
  for (const auto &r : trace.records)
    reports += (r.paged || r.registered) ? 1 : 0;
  msg << "trace t=0.." << cfg.run.t_end << ", " << reports << " report(s), seed " << trace.seed << '\n';
  return kSuccess;
}

namespace detail
{

inline bool verify_simple(const io::RunConfig &cfg, std::ostream &msg)
{
  const auto &model = cfg.model;
  const auto &p = model.params();
  const auto n = model.n_states();
  auto chain = reachable_beliefs(model, cfg.run.belief_cap);
  auto dp = joint_dp(model, chain);
  auto root = static_cast<std::size_t>(chain.find_point(n, model.x0()));
  double boundary = p.lambda_p * p.page_cost * p.beta;
  bool ok = true;

  msg << std::setprecision(12);
  msg << "belief chain: " << chain.nodes.size() << " nodes, joint optimum " << dp.value[root] << '\n';
  if (p.reg_cost != boundary)
  {
    auto which = p.reg_cost > boundary ? SimplePolicy::A : SimplePolicy::B;
    bool joint = dp.decision[root] == simple_policy_decision(which);
    for (std::size_t i = 0; i < chain.nodes.size(); ++i)
      if (i != root)
        joint = joint && dp.best_mask[i] == 0;
    msg << "policy " << (which == SimplePolicy::A ? 'A' : 'B') << " jointly optimal: " << verdict(joint) << '\n';
    ok = ok && joint;
  }
  else
  {
    msg << "R equals lambda_p*P*beta: policies A and B tie\n";
  }

  if (p.reg_cost < boundary)
  {
    auto c = simple_policy_rcl(model, SimplePolicy::C);
    auto b = simple_policy_rcl(model, SimplePolicy::B);
    IterationOptions opt = iteration_options(cfg.run);
    auto log = individually_optimal(model, c.g, opt);
    bool fixed = log.rounds.size() == 1 && log.f == c.f && log.g == c.g;
    double cost_c = policy_cost(model, c.f, c.g).total;
    double cost_b = policy_cost(model, b.f, b.g).total;
    msg << "policy C is an individually optimal fixed point: " << verdict(fixed) << '\n';
    msg << "policy C costs more than policy B (" << cost_c << " > " << cost_b
        << "): " << verdict(cost_c > cost_b + 1e-9) << '\n';
    ok = ok && fixed && cost_c > cost_b + 1e-9;
  }
  return ok;
}

inline bool verify_walk(const io::RunConfig &cfg, std::ostream &msg)
{
  const auto &walk = *cfg.walk;
  auto sol = walk_value_iteration(walk, PingPongSide::plus_first, cfg.run.tol);
  bool neat = is_neat_fn([&](int i) { return -sol.value(i); }, sol.window - 1, 1e-12);
  bool thresholds = sol.d_left == sol.d_right || sol.d_left == sol.d_right - 1;
  msg << "walk value iteration: window " << sol.window << ", d_left " << sol.d_left << ", d_right " << sol.d_right
      << '\n';
  msg << "-V neat: " << verdict(neat) << '\n';
  msg << "threshold registration with d_l in {d_r, d_r-1}: " << verdict(thresholds) << '\n';

  auto log = individually_optimal(walk.model, RegistrationRCL::never(walk.model), iteration_options(cfg.run));
  auto rep = check_walk_structure(walk, log.f, log.g);
  msg << "individually optimal pair after " << log.rounds.size() << " round(s), "
      << (rep.minus_first ? "minus-first" : "plus-first") << " search\n";
  msg << "ping-pong + threshold: " << verdict(rep.pass()) << '\n';
  return neat && thresholds && rep.pass();
}

} // namespace detail

// Structural claims for the five-state example or a symmetric walk.
inline int cmd_verify(const io::RunConfig &cfg, std::ostream &msg)
{
  bool ok = false;
  if (cfg.kind == "simple")
    ok = detail::verify_simple(cfg, msg);
  else if (cfg.walk)
    ok = detail::verify_walk(cfg, msg);
  else
    throw ValidationError("verify supports the simple and walk kinds only");
  msg << "verify: " << detail::verdict(ok) << '\n';
  return ok ? kSuccess : kVerifyFailed;
}

} // namespace pagereg::cli
