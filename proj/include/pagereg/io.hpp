#pragma once

#include "cost.hpp"
#include "iterate.hpp"
#include "major.hpp"
#include "model.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace pagereg::io
{

using json = nlohmann::json;

// Command parameters that may be given in the config's "run" block and
// overridden on the command line.
struct RunOptions
{
  double tol = 1e-10;
  std::uint64_t seed = 1;
  std::size_t mc_cycles = 0;
  int t_end = 40;
  int max_rounds = 100;
  std::size_t belief_cap = 4096;
  std::string g0 = "never";
};

struct RunConfig
{
  std::string kind;
  MotionModel model;
  std::optional<WalkModel> walk;
  std::optional<TorusSpec> torus;
  RunOptions run;
};

namespace detail
{

template <typename T>
T get_or(const json &j, const char *key, T fallback)
{
  if (!j.contains(key))
    return fallback;
  return j.at(key).get<T>();
}

inline const json &require(const json &j, const char *key)
{
  if (!j.contains(key))
    throw ValidationError(std::string("config is missing \"") + key + "\"");
  return j.at(key);
}

inline CostParams parse_params(const json &j, CostParams defaults)
{
  CostParams p = defaults;
  p.lambda_p = get_or(j, "lambda_p", p.lambda_p);
  p.page_cost = get_or(j, "page_cost", p.page_cost);
  p.reg_cost = get_or(j, "reg_cost", p.reg_cost);
  p.beta = get_or(j, "beta", p.beta);
  p.k_max = get_or(j, "k_max", p.k_max);
  p.validate();
  return p;
}

inline RunOptions parse_run(const json &j)
{
  RunOptions r;
  r.tol = get_or(j, "tol", r.tol);
  r.seed = get_or(j, "seed", r.seed);
  r.mc_cycles = get_or(j, "mc_cycles", r.mc_cycles);
  r.t_end = get_or(j, "t_end", r.t_end);
  r.max_rounds = get_or(j, "max_rounds", r.max_rounds);
  r.belief_cap = get_or(j, "belief_cap", r.belief_cap);
  r.g0 = get_or(j, "g0", r.g0);
  if (!(r.tol > 0.0))
    throw ValidationError("run.tol must be positive");
  if (r.max_rounds < 1)
    throw ValidationError("run.max_rounds must be at least 1");
  return r;
}

} // namespace detail

inline RunConfig parse_config(const json &j)
{
  try
  {
    std::string kind = detail::require(j, "kind").get<std::string>();
    const json empty = json::object();
    const json &pj = j.contains("params") ? j.at("params") : empty;
    RunOptions run = detail::parse_run(j.contains("run") ? j.at("run") : empty);

    if (kind == "simple")
    {
      CostParams p = detail::parse_params(pj, CostParams{0.05, 1.0, 0.04, 0.9, 3});
      auto model = build_simple_example(p.lambda_p, p.page_cost, p.reg_cost, p.beta, p.k_max);
      return {kind, std::move(model), std::nullopt, std::nullopt, run};
    }
    if (kind == "torus")
    {
      CostParams p = detail::parse_params(pj, CostParams{0.03, 1.0, 0.6, 0.9, 200});
      TorusSpec spec;
      auto grid = detail::require(j, "grid").get<std::vector<int>>();
      if (grid.size() != 2)
        throw ValidationError("torus grid must be [i_max, j_max]");
      spec.i_max = grid[0];
      spec.j_max = grid[1];
      const json &mv = detail::require(j, "motion");
      spec.p_stay = detail::get_or(mv, "stay", 0.0);
      spec.p_up = detail::get_or(mv, "up", 0.0);
      spec.p_down = detail::get_or(mv, "down", 0.0);
      spec.p_left = detail::get_or(mv, "left", 0.0);
      spec.p_right = detail::get_or(mv, "right", 0.0);
      auto x0 = detail::require(j, "x0").get<std::vector<int>>();
      if (x0.size() != 2)
        throw ValidationError("torus x0 must be [i, j]");
      spec.x0_i = x0[0];
      spec.x0_j = x0[1];
      auto model = build_torus(spec, p);
      return {kind, std::move(model), std::nullopt, spec, run};
    }
    if (kind == "walk")
    {
      CostParams p = detail::parse_params(pj, CostParams{0.1, 2.0, 1.0, 0.9, 12});
      auto kernel = FiniteDistribution::centered(detail::require(j, "kernel").get<std::vector<double>>());
      int half_width = detail::get_or(j, "half_width", 2 * p.k_max * std::max(1, kernel.reach()));
      auto walk = build_symmetric_walk(half_width, kernel, p);
      auto model = walk.model;
      return {kind, std::move(model), std::move(walk), std::nullopt, run};
    }
    if (kind == "explicit")
    {
      CostParams p = detail::parse_params(pj, CostParams{});
      auto n = detail::require(j, "n_states").get<std::size_t>();
      auto P = detail::require(j, "P").get<std::vector<double>>();
      auto cells = j.contains("cells") ? CellPartition(n, j.at("cells").get<std::vector<std::vector<int>>>())
                                       : CellPartition::singletons(n);
      int x0 = detail::get_or(j, "x0", 0);
      MotionModel model(TransitionMatrix(n, std::move(P)), std::move(cells), x0, p);
      return {kind, std::move(model), std::nullopt, std::nullopt, run};
    }
    throw ValidationError("unknown model kind \"" + kind + "\"");
  }
  catch (const json::exception &e)
  {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
}

inline RunConfig load_config(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open config " + path);
  json j;
  try
  {
    in >> j;
  }
  catch (const json::exception &e)
  {
    throw ValidationError(path + ": " + e.what());
  }
  return parse_config(j);
}

// ---------------------------------------------------------------------------
// RCL tables
//
//   pagereg-rcl <paging|registration> <n_states> <k_max>
//   <i0> <k> <v_0> ... <v_{n-1}>

inline void write_rcl(std::ostream &out, const PagingRCL &f)
{
  const auto n = f.n_states();
  out << "pagereg-rcl paging " << n << ' ' << f.k_max() << '\n';
  for (std::size_t i0 = 0; i0 < n; ++i0)
    for (int k = 1; k <= f.k_max() + 1; ++k)
    {
      out << i0 << ' ' << k;
      for (int r : f.order(i0, k))
        out << ' ' << r;
      out << '\n';
    }
}

inline void write_rcl(std::ostream &out, const RegistrationRCL &g)
{
  const auto n = g.n_states();
  out << "pagereg-rcl registration " << n << ' ' << g.k_max() << '\n';
  for (std::size_t i0 = 0; i0 < n; ++i0)
    for (int k = 1; k <= g.k_max(); ++k)
    {
      out << i0 << ' ' << k;
      for (auto d : g.decisions(i0, k))
        out << ' ' << static_cast<int>(d);
      out << '\n';
    }
}

namespace detail
{

struct RclHeader
{
  std::string kind;
  std::size_t n = 0;
  int k_max = 0;
};

inline RclHeader read_header(std::istream &in, const std::string &expected, const MotionModel &model)
{
  std::string magic;
  RclHeader h;
  if (!(in >> magic >> h.kind >> h.n >> h.k_max) || magic != "pagereg-rcl")
    throw ValidationError("not an RCL file");
  if (h.kind != expected)
    throw ValidationError("expected a " + expected + " RCL, found " + h.kind);
  if (h.n != model.n_states() || h.k_max != model.k_max())
    throw ValidationError("RCL dimensions (" + std::to_string(h.n) + ", " + std::to_string(h.k_max) +
                          ") do not match the model (" + std::to_string(model.n_states()) + ", " +
                          std::to_string(model.k_max()) + ")");
  return h;
}

inline void read_row_key(std::istream &in, std::size_t i0, int k)
{
  std::size_t ri0;
  int rk;
  if (!(in >> ri0 >> rk))
    throw ValidationError("RCL file ends early at (" + std::to_string(i0) + ", " + std::to_string(k) + ")");
  if (ri0 != i0 || rk != k)
    throw ValidationError("RCL rows out of order at (" + std::to_string(i0) + ", " + std::to_string(k) + ")");
}

} // namespace detail

inline PagingRCL read_paging_rcl(std::istream &in, const MotionModel &model)
{
  auto h = detail::read_header(in, "paging", model);
  PagingRCL f(model.cells(), h.k_max);
  std::vector<int> rank(h.n);
  for (std::size_t i0 = 0; i0 < h.n; ++i0)
    for (int k = 1; k <= h.k_max + 1; ++k)
    {
      detail::read_row_key(in, i0, k);
      for (auto &r : rank)
        if (!(in >> r))
          throw ValidationError("truncated paging row");
      f.set(i0, k, PagingOrder(model.cells(), rank));
    }
  return f;
}

inline RegistrationRCL read_registration_rcl(std::istream &in, const MotionModel &model)
{
  auto h = detail::read_header(in, "registration", model);
  RegistrationRCL g(h.n, h.k_max);
  for (std::size_t i0 = 0; i0 < h.n; ++i0)
    for (int k = 1; k <= h.k_max; ++k)
    {
      detail::read_row_key(in, i0, k);
      for (std::size_t l = 0; l < h.n; ++l)
      {
        int v;
        if (!(in >> v) || (v != 0 && v != 1))
          throw ValidationError("registration values must be 0 or 1");
        g.set(i0, k, l, v == 1);
      }
    }
  return g;
}

inline PagingRCL load_paging_rcl(const std::string &path, const MotionModel &model)
{
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open " + path);
  return read_paging_rcl(in, model);
}

inline RegistrationRCL load_registration_rcl(const std::string &path, const MotionModel &model)
{
  std::ifstream in(path);
  if (!in)
    throw ValidationError("cannot open " + path);
  return read_registration_rcl(in, model);
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const CostReport &r)
{
  json j;
  j["total"] = r.total;
  j["per_report_state"] = r.per_report_state;
  j["cycle_cost"] = r.cycle_cost;
  json stats = json::array();
  for (const auto &s : r.cycle_stats)
    stats.push_back({{"alpha_page", s.alpha_page},
                     {"alpha_register", s.alpha_register},
                     {"expected_pages", s.expected_pages},
                     {"next_report", s.next_report}});
  j["cycle_stats"] = std::move(stats);
  return j;
}

inline json to_json(const MonteCarloEstimate &e)
{
  return {{"mean", e.mean}, {"std_error", e.std_error}, {"replications", e.replications}, {"horizon", e.horizon}};
}

inline json to_json(const IterationLog &log)
{
  json rounds = json::array();
  for (const auto &r : log.rounds)
    rounds.push_back({{"round", r.round},
                      {"cost_after_paging", r.cost_after_paging},
                      {"cost_after_registration", r.cost_after_registration}});
  return {{"rounds", std::move(rounds)}, {"converged", log.converged}, {"final_cost", log.final_cost()}};
}

inline json to_json(const WalkStructureReport &r)
{
  return {{"pass", r.pass()},
          {"ping_pong", r.ping_pong},
          {"threshold", r.threshold},
          {"plus_first", r.plus_first},
          {"minus_first", r.minus_first},
          {"left_closer", r.left_closer},
          {"right_closer", r.right_closer},
          {"tied_pairs", r.tied_pairs},
          {"checked_report_states", r.checked_report_states.size()}};
}

// ---------------------------------------------------------------------------
// Traces

// One record per line: t x paged pages_used registered idx:mass,idx:mass,...
inline void write_trace(std::ostream &out, const Trace &trace)
{
  out << "# seed " << trace.seed << " algorithm " << trace.algorithm << '\n';
  out << "# t x paged pages_used registered belief\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto &r : trace.records)
  {
    out << r.t << ' ' << r.x << ' ' << (r.paged ? 1 : 0) << ' ' << r.pages_used << ' ' << (r.registered ? 1 : 0)
        << ' ';
    bool first = true;
    for (std::size_t l = 0; l < r.belief.size(); ++l)
    {
      if (r.belief[l] <= 0.0)
        continue;
      out << (first ? "" : ",") << l << ':' << r.belief[l];
      first = false;
    }
    out << '\n';
  }
}

// Long-format table for plotting: one row per (t, state in the belief
// support). Torus models also get grid coordinates.
inline void write_plot_table(std::ostream &out, const Trace &trace, const std::optional<TorusSpec> &torus)
{
  auto coords = [&](int s) {
    std::ostringstream c;
    if (torus)
      c << '\t' << s % torus->i_max << '\t' << s / torus->i_max;
    return c.str();
  };
  out << "t\tx" << (torus ? "\tx_i\tx_j" : "") << "\tstate" << (torus ? "\ti\tj" : "") << "\tmass\n";
  for (const auto &r : trace.records)
    for (std::size_t l = 0; l < r.belief.size(); ++l)
    {
      if (r.belief[l] <= 0.0)
        continue;
      out << r.t << '\t' << r.x << coords(r.x) << '\t' << l << coords(static_cast<int>(l)) << '\t' << r.belief[l]
          << '\n';
    }
}

} // namespace pagereg::io
