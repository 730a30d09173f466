#pragma once

#include "belief.hpp"
#include "model.hpp"
#include "paging.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace pagereg
{

// Reporting-cycle statistics for one last-report state i0. Vectors indexed by
// elapsed time k hold entry k at position k-1, for k = 1..k_max+1.
struct CycleStats
{
  std::vector<double> alpha_page;     // P[cycle ends at k with a page]
  std::vector<double> alpha_register; // P[cycle ends at k with a registration]
  std::vector<double> expected_pages; // E[cells searched | page at k]
  std::vector<double> next_report;    // P[next report happens at state l]

  double total_mass() const
  {
    double s = 0.0;
    for (std::size_t k = 0; k < alpha_page.size(); ++k)
      s += alpha_page[k] + alpha_register[k];
    return s;
  }
};

struct CostReport
{
  double total = 0.0;                    // C(f, g) starting from x0
  std::vector<double> per_report_state;  // C(i0) for every i0
  std::vector<double> cycle_cost;        // discounted cost of one cycle from i0
  std::vector<CycleStats> cycle_stats;   // indexed by i0
};

namespace detail
{

inline void check_policy_shapes(const MotionModel &model, const PagingRCL &f, const RegistrationRCL &g)
{
  if (f.n_states() != model.n_states() || f.k_max() != model.k_max())
    throw ValidationError("paging law does not match the model dimensions");
  if (g.n_states() != model.n_states() || g.k_max() != model.k_max())
    throw ValidationError("registration law does not match the model dimensions");
}

} // namespace detail

// Exact discounted cost of a law pair. Each reporting cycle from i0 is
// propagated to the forced registration at k_max+1; the renewal equations
// C(i0) = c(i0) + sum_l M(i0,l) C(l) are then solved directly.
inline CostReport policy_cost(const MotionModel &model, const PagingRCL &f, const RegistrationRCL &g)
{
  detail::check_policy_shapes(model, f, g);
  const auto n = model.n_states();
  const auto &par = model.params();
  const int horizon = model.k_max() + 1;
  const auto &P = model.transitions();

  CostReport report;
  report.cycle_cost.assign(n, 0.0);
  report.cycle_stats.resize(n);
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));

  std::vector<double> mass(n), arrive(n);
  for (std::size_t i0 = 0; i0 < n; ++i0)
  {
    auto &st = report.cycle_stats[i0];
    st.alpha_page.assign(static_cast<std::size_t>(horizon), 0.0);
    st.alpha_register.assign(static_cast<std::size_t>(horizon), 0.0);
    st.expected_pages.assign(static_cast<std::size_t>(horizon), 0.0);
    st.next_report.assign(n, 0.0);

    std::fill(mass.begin(), mass.end(), 0.0);
    mass[i0] = 1.0;
    double discount = 1.0;
    double cost = 0.0;
    for (int k = 1; k <= horizon; ++k)
    {
      discount *= par.beta;
      std::fill(arrive.begin(), arrive.end(), 0.0);
      double alive = 0.0;
      for (std::size_t j = 0; j < n; ++j)
      {
        if (mass[j] == 0.0)
          continue;
        alive += mass[j];
        for (const auto &t : P.row(j))
          arrive[static_cast<std::size_t>(t.to)] += mass[j] * t.prob;
      }
      if (alive == 0.0)
        break;

      auto idx = static_cast<std::size_t>(k - 1);
      double pages = expected_pages(arrive, f.order(i0, k));
      st.alpha_page[idx] = par.lambda_p * alive;
      st.expected_pages[idx] = pages / alive;
      cost += discount * par.lambda_p * par.page_cost * pages;

      double registered = 0.0;
      for (std::size_t l = 0; l < n; ++l)
      {
        double a = arrive[l];
        if (a == 0.0)
        {
          mass[l] = 0.0;
          continue;
        }
        double report_mass = par.lambda_p * a;
        if (g.registers(i0, k, l))
        {
          double r = (1.0 - par.lambda_p) * a;
          registered += r;
          report_mass += r;
          mass[l] = 0.0;
        }
        else
        {
          mass[l] = (1.0 - par.lambda_p) * a;
        }
        st.next_report[l] += report_mass;
        A(static_cast<Eigen::Index>(i0), static_cast<Eigen::Index>(l)) -= discount * report_mass;
      }
      st.alpha_register[idx] = registered;
      cost += discount * par.reg_cost * registered;
    }
    report.cycle_cost[i0] = cost;
  }

  Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(report.cycle_cost.data(), static_cast<Eigen::Index>(n));
  Eigen::VectorXd C = A.partialPivLu().solve(c);
  report.per_report_state.assign(C.data(), C.data() + n);
  report.total = report.per_report_state[static_cast<std::size_t>(model.x0())];
  return report;
}

// ---------------------------------------------------------------------------
// Simulation

// Random source for simulation: std::mt19937_64 seeded with the user seed,
// uniforms from std::uniform_real_distribution<double>.
inline constexpr const char *kRngAlgorithm = "mt19937_64";

namespace detail
{

// One step of the event sequence: move, maybe page, otherwise maybe register.
struct Simulator
{
  const MotionModel &model;
  const PagingRCL &f;
  const RegistrationRCL &g;
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> unif{0.0, 1.0};

  int state;
  int last_report;
  int elapsed = 0;

  Simulator(const MotionModel &m, const PagingRCL &pf, const RegistrationRCL &rg, std::uint64_t seed)
      : model(m), f(pf), g(rg), rng(seed), state(m.x0()), last_report(m.x0())
  {
  }

  struct Event
  {
    bool paged = false;
    int pages = 0;
    bool registered = false;
  };

  Event step()
  {
    auto row = model.transitions().row(static_cast<std::size_t>(state));
    double u = unif(rng);
    int next = row.back().to;
    for (const auto &t : row)
    {
      if (u < t.prob)
      {
        next = t.to;
        break;
      }
      u -= t.prob;
    }
    state = next;
    ++elapsed;

    Event ev;
    auto i0 = static_cast<std::size_t>(last_report);
    auto s = static_cast<std::size_t>(state);
    if (unif(rng) < model.params().lambda_p)
    {
      ev.paged = true;
      ev.pages = f.rank(i0, elapsed, s);
    }
    else if (g.registers(i0, elapsed, s))
    {
      ev.registered = true;
    }
    if (ev.paged || ev.registered)
    {
      last_report = state;
      elapsed = 0;
    }
    return ev;
  }
};

} // namespace detail

struct MonteCarloEstimate
{
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t replications = 0;
  std::size_t horizon = 0; // time steps simulated per replication
};

// Sample mean of the discounted cost over independent paths from x0. Each path
// stops once beta^t (P*|C| + R) / (1 - beta) drops below horizon_eps, so the
// truncation bias is at most horizon_eps.
inline MonteCarloEstimate monte_carlo_cost(const MotionModel &model, const PagingRCL &f, const RegistrationRCL &g,
                                           std::uint64_t seed, std::size_t n_cycles, double horizon_eps = 1e-8)
{
  detail::check_policy_shapes(model, f, g);
  if (n_cycles < 1)
    throw ValidationError("Monte Carlo needs at least one replication");
  if (!(horizon_eps > 0.0))
    throw ValidationError("horizon_eps must be positive");
  const auto &par = model.params();
  double scale = (par.page_cost * static_cast<double>(model.n_cells()) + par.reg_cost) / (1.0 - par.beta);
  std::size_t horizon = 0;
  for (double tail = scale; tail >= horizon_eps; tail *= par.beta)
    ++horizon;

  detail::Simulator sim(model, f, g, seed);
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t rep = 0; rep < n_cycles; ++rep)
  {
    sim.state = sim.last_report = model.x0();
    sim.elapsed = 0;
    double discount = 1.0, cost = 0.0;
    for (std::size_t t = 1; t <= horizon; ++t)
    {
      discount *= par.beta;
      auto ev = sim.step();
      if (ev.paged)
        cost += discount * par.page_cost * ev.pages;
      else if (ev.registered)
        cost += discount * par.reg_cost;
    }
    sum += cost;
    sum_sq += cost * cost;
  }
  auto n = static_cast<double>(n_cycles);
  MonteCarloEstimate est;
  est.mean = sum / n;
  double var = n > 1 ? std::max(0.0, (sum_sq - n * est.mean * est.mean) / (n - 1.0)) : 0.0;
  est.std_error = std::sqrt(var / n);
  est.replications = n_cycles;
  est.horizon = horizon;
  return est;
}

struct TraceRecord
{
  int t = 0;
  int x = 0;
  bool paged = false;
  int pages_used = 0;
  bool registered = false;
  Belief belief; // network belief w(t) after the step's reports
};

struct Trace
{
  std::uint64_t seed = 0;
  std::string algorithm = kRngAlgorithm;
  std::vector<TraceRecord> records; // t = 0..t_end
};

// One sample path together with the network's belief at every step.
inline Trace export_trace(const MotionModel &model, const PagingRCL &f, const RegistrationRCL &g, std::uint64_t seed,
                          int t_end)
{
  detail::check_policy_shapes(model, f, g);
  if (t_end < 1)
    throw ValidationError("trace needs t_end >= 1");
  const auto n = model.n_states();
  Trace trace;
  trace.seed = seed;
  detail::Simulator sim(model, f, g, seed);
  Belief w = point_mass(n, static_cast<std::size_t>(model.x0()));
  trace.records.push_back({0, model.x0(), false, 0, false, w});
  for (int t = 1; t <= t_end; ++t)
  {
    auto i0 = static_cast<std::size_t>(sim.last_report);
    int k = sim.elapsed + 1;
    auto ev = sim.step();
    if (ev.paged || ev.registered)
    {
      w = point_mass(n, static_cast<std::size_t>(sim.state));
    }
    else if (k <= model.k_max())
    {
      w = phi_update<std::uint8_t>(w, g.decisions(i0, k), model.transitions());
    }
    trace.records.push_back({t, sim.state, ev.paged, ev.pages, ev.registered, w});
  }
  return trace;
}

} // namespace pagereg
