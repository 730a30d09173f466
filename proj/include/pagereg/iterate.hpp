#pragma once

#include "belief.hpp"
#include "cost.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "paging.hpp"
#include "regdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pagereg
{

// ---------------------------------------------------------------------------
// Alternating optimization

struct IterationRound
{
  int round = 0;
  double cost_after_paging = 0.0;      // C(f^r, g^r)
  double cost_after_registration = 0.0; // C(f^r, g^{r+1})
};

struct IterationLog
{
  std::vector<IterationRound> rounds;
  PagingRCL f;
  RegistrationRCL g;
  bool converged = false;

  double final_cost() const { return rounds.empty() ? 0.0 : rounds.back().cost_after_paging; }

  // Costs in the order they were produced.
  std::vector<double> cost_sequence() const
  {
    std::vector<double> seq;
    for (const auto &r : rounds)
    {
      seq.push_back(r.cost_after_paging);
      seq.push_back(r.cost_after_registration);
    }
    return seq;
  }
};

struct IterationOptions
{
  double tol = 1e-12; // stop when C(f^r, g^r) - C(f^r, g^{r+1}) < tol
  int max_rounds = 100;
  ValueIterationOptions dp{};
};

// Alternate the optimal paging law for g and the optimal registration law for
// f until the registration step no longer lowers the cost. The returned pair
// (f^r, g^r) is individually optimal.
inline IterationLog individually_optimal(const MotionModel &model, const RegistrationRCL &g0,
                                         const IterationOptions &opt = {})
{
  if (g0.n_states() != model.n_states() || g0.k_max() != model.k_max())
    throw ValidationError("initial registration law does not match the model dimensions");
  IterationLog log;
  RegistrationRCL g = g0;
  for (int round = 1; round <= opt.max_rounds; ++round)
  {
    PagingRCL f = derive_paging_rcl(model, g);
    double after_paging = policy_cost(model, f, g).total;
    RegistrationRCL g_next = optimal_registration(model, f, opt.dp).g;
    double after_registration = policy_cost(model, f, g_next).total;
    log.rounds.push_back({round, after_paging, after_registration});
    if (after_paging - after_registration < opt.tol)
    {
      log.f = std::move(f);
      log.g = std::move(g);
      log.converged = true;
      return log;
    }
    g = std::move(g_next);
  }
  throw NonConvergence("alternating optimization exceeded " + std::to_string(opt.max_rounds) + " rounds");
}

// ---------------------------------------------------------------------------
// Finite belief chains

struct TrimOption
{
  std::uint64_t mask = 0; // bit b set: register at support[b]
  double survive = 0.0;   // sum_l (wP)_l (1 - d_l), before the page coin
  int next = -1;          // node of Phi(w, d); -1 when survive == 0
};

struct BeliefNode
{
  Belief w;
  std::vector<double> arrive;      // wP
  std::vector<int> support;        // states with (wP)_l > 0
  std::vector<int> report_next;    // node of delta(support[b])
  std::vector<TrimOption> options; // one per subset of the support, mask order
};

struct BeliefChain
{
  std::vector<BeliefNode> nodes;
  double dedup_tol = 1e-9;

  int find(std::span<const double> w) const
  {
    for (std::size_t i = 0; i < nodes.size(); ++i)
    {
      double worst = 0.0;
      for (std::size_t s = 0; s < w.size(); ++s)
        worst = std::max(worst, std::abs(nodes[i].w[s] - w[s]));
      if (worst <= dedup_tol)
        return static_cast<int>(i);
    }
    return -1;
  }

  int find_point(std::size_t n, std::size_t state) const { return find(point_mass(n, state)); }
};

inline constexpr std::size_t kMaxTrimSupport = 20;

namespace detail
{

inline std::vector<std::uint8_t> mask_to_decision(std::size_t n, std::span<const int> support, std::uint64_t mask)
{
  std::vector<std::uint8_t> d(n, 0);
  for (std::size_t b = 0; b < support.size(); ++b)
    if (mask >> b & 1U)
      d[static_cast<std::size_t>(support[b])] = 1;
  return d;
}

} // namespace detail

// Closure of delta(x0) under report collapse and no-report updates for every
// binary trim of the post-move support. Beliefs within dedup_tol (sup norm)
// are merged.
inline BeliefChain reachable_beliefs(const MotionModel &model, std::size_t cap, double dedup_tol = 1e-9)
{
  if (cap < 1)
    throw ValidationError("belief cap must be at least 1");
  const auto n = model.n_states();
  BeliefChain chain;
  chain.dedup_tol = dedup_tol;
  auto intern = [&](Belief w) {
    int at = chain.find(w);
    if (at >= 0)
      return at;
    if (chain.nodes.size() >= cap)
      throw CapExceeded("more than " + std::to_string(cap) + " distinct beliefs");
    chain.nodes.push_back(BeliefNode{std::move(w), {}, {}, {}, {}});
    return static_cast<int>(chain.nodes.size()) - 1;
  };
  intern(point_mass(n, static_cast<std::size_t>(model.x0())));
  for (std::size_t at = 0; at < chain.nodes.size(); ++at)
  {
    auto arrive = propagate(chain.nodes[at].w, model.transitions());
    std::vector<int> support;
    for (std::size_t l = 0; l < n; ++l)
      if (arrive[l] > 0.0)
        support.push_back(static_cast<int>(l));
    if (support.size() > kMaxTrimSupport)
      throw CapExceeded("belief support of " + std::to_string(support.size()) + " states is too wide to enumerate");

    std::vector<int> report_next;
    for (int l : support)
      report_next.push_back(intern(point_mass(n, static_cast<std::size_t>(l))));

    std::vector<TrimOption> options;
    const std::uint64_t count = std::uint64_t{1} << support.size();
    for (std::uint64_t mask = 0; mask < count; ++mask)
    {
      auto d = detail::mask_to_decision(n, support, mask);
      TrimOption opt{mask, 0.0, -1};
      for (std::size_t b = 0; b < support.size(); ++b)
        if (!(mask >> b & 1U))
          opt.survive += arrive[static_cast<std::size_t>(support[b])];
      if (opt.survive > kSurvivalFloor)
        opt.next = intern(phi_update<std::uint8_t>(chain.nodes[at].w, d, model.transitions()));
      options.push_back(opt);
    }
    auto &node = chain.nodes[at];
    node.arrive = std::move(arrive);
    node.support = std::move(support);
    node.report_next = std::move(report_next);
    node.options = std::move(options);
  }
  return chain;
}

struct JointDpResult
{
  std::vector<double> value;                        // U(w) per node
  std::vector<std::uint64_t> best_mask;             // argmin trim per node
  std::vector<std::vector<std::uint8_t>> decision;  // g-bar(w) expanded to states
  std::vector<PagingOrder> paging;                  // f-bar(w): ML order under wP
  int sweeps = 0;
  std::vector<double> sweep_changes;
};

namespace detail
{

inline double trim_value(const MotionModel &model, const BeliefNode &node, const TrimOption &opt,
                         std::span<const double> U, double page_term)
{
  const auto &p = model.params();
  double expect = 0.0;
  for (std::size_t b = 0; b < node.support.size(); ++b)
  {
    double a = node.arrive[static_cast<std::size_t>(node.support[b])];
    double u_report = U[static_cast<std::size_t>(node.report_next[b])];
    expect += a * p.lambda_p * u_report;
    if (opt.mask >> b & 1U)
      expect += a * (1.0 - p.lambda_p) * (p.reg_cost + u_report);
  }
  if (opt.next >= 0)
    expect += (1.0 - p.lambda_p) * opt.survive * U[static_cast<std::size_t>(opt.next)];
  return page_term + p.beta * expect;
}

} // namespace detail

// Value iteration of the belief-space optimality equation restricted to a
// closed chain:
//   U(w) = beta lambda_p P s(wP) + min_d beta [ sum_l (wP)_l { lambda_p U(delta_l)
//          + (1-lambda_p) d_l (R + U(delta_l)) } + (1-lambda_p) (sum_l (wP)_l (1-d_l)) U(Phi(w,d)) ].
// Ties between trims go to the lowest mask (fewest registrations first in
// mask order).
inline JointDpResult joint_dp(const MotionModel &model, const BeliefChain &chain, double tol = 1e-12,
                              int max_sweeps = 0)
{
  const auto &p = model.params();
  const auto count = chain.nodes.size();
  std::vector<double> page_term(count);
  for (std::size_t i = 0; i < count; ++i)
    page_term[i] = p.beta * p.lambda_p * p.page_cost *
                   guessing_entropy(cell_distribution(model.cells(), chain.nodes[i].arrive));

  int cap = max_sweeps > 0 ? max_sweeps : sweep_cap(tol, p.beta, value_bound(model), 50);
  JointDpResult res;
  std::vector<double> U(count, 0.0), next(count, 0.0);
  while (true)
  {
    if (res.sweeps >= cap)
      throw NonConvergence("belief-chain value iteration did not reach tol within " + std::to_string(cap) + " sweeps");
    double change = 0.0;
    for (std::size_t i = 0; i < count; ++i)
    {
      double best = std::numeric_limits<double>::infinity();
      for (const auto &opt : chain.nodes[i].options)
        best = std::min(best, detail::trim_value(model, chain.nodes[i], opt, U, page_term[i]));
      next[i] = best;
      change = std::max(change, std::abs(next[i] - U[i]));
    }
    U.swap(next);
    ++res.sweeps;
    res.sweep_changes.push_back(change);
    if (change < tol)
      break;
  }

  res.value = U;
  for (std::size_t i = 0; i < count; ++i)
  {
    const auto &node = chain.nodes[i];
    double best = std::numeric_limits<double>::infinity();
    std::uint64_t arg = 0;
    for (const auto &opt : node.options)
    {
      double v = detail::trim_value(model, node, opt, U, page_term[i]);
      if (v < best)
      {
        best = v;
        arg = opt.mask;
      }
    }
    res.best_mask.push_back(arg);
    res.decision.push_back(detail::mask_to_decision(model.n_states(), node.support, arg));
    res.paging.push_back(ml_paging_order(cell_distribution(model.cells(), node.arrive), model.cells()));
  }
  return res;
}

struct RclPair
{
  PagingRCL f;
  RegistrationRCL g;
};

// Reduced-complexity form of a feedback law on beliefs: from a report at i0,
// g(i0,k) = decide(w(i0,k-1)) and w(i0,k) = Phi(w(i0,k-1), g(i0,k)); the
// paging law is the ML order for the resulting beliefs.
inline RegistrationRCL rcl_from_feedback(const MotionModel &model,
                                         const std::function<std::vector<std::uint8_t>(const Belief &)> &decide)
{
  RegistrationRCL g = RegistrationRCL::never(model);
  for (std::size_t i0 = 0; i0 < model.n_states(); ++i0)
  {
    Belief w = point_mass(model.n_states(), i0);
    for (int k = 1; k <= model.k_max(); ++k)
    {
      auto d = decide(w);
      g.set(i0, k, d);
      try
      {
        w = phi_update<std::uint8_t>(w, d, model.transitions());
      }
      catch (const ZeroSurvivalMass &)
      {
        break;
      }
    }
  }
  return g;
}

// RCL pair equivalent to the chain's feedback law, for every report state whose
// point mass lies in the chain. Other report states keep never-register.
inline RclPair feedback_to_rcl(const MotionModel &model, const BeliefChain &chain, const JointDpResult &dp)
{
  const auto n = model.n_states();
  RegistrationRCL g = RegistrationRCL::never(model);
  for (std::size_t i0 = 0; i0 < n; ++i0)
  {
    int node = chain.find_point(n, i0);
    for (int k = 1; k <= model.k_max() && node >= 0; ++k)
    {
      const auto &bn = chain.nodes[static_cast<std::size_t>(node)];
      g.set(i0, k, dp.decision[static_cast<std::size_t>(node)]);
      std::uint64_t mask = dp.best_mask[static_cast<std::size_t>(node)];
      node = bn.options[static_cast<std::size_t>(mask)].next;
    }
  }
  return {derive_paging_rcl(model, g), std::move(g)};
}

// ---------------------------------------------------------------------------
// Five-state example: registration choices at delta(0), in order A-D.

enum class SimplePolicy
{
  A, // never register
  B, // register on entering state 1
  C, // register on entering state 3
  D  // register on entering 1 or 3
};

inline std::vector<std::uint8_t> simple_policy_decision(SimplePolicy which)
{
  switch (which)
  {
  case SimplePolicy::A:
    return {0, 0, 0, 0, 0};
  case SimplePolicy::B:
    return {0, 1, 0, 0, 0};
  case SimplePolicy::C:
    return {0, 0, 0, 1, 0};
  case SimplePolicy::D:
    return {0, 1, 0, 1, 0};
  }
  return {};
}

// RCL pair for the feedback law that applies the policy's decision at belief
// delta(0) and never registers elsewhere, with ML paging.
inline RclPair simple_policy_rcl(const MotionModel &model, SimplePolicy which)
{
  if (model.n_states() != 5)
    throw ValidationError("simple-example policies need the five-state model");
  auto at_zero = simple_policy_decision(which);
  auto g = rcl_from_feedback(model, [&](const Belief &w) {
    if (std::abs(w[0] - 1.0) <= 1e-12)
      return at_zero;
    return std::vector<std::uint8_t>(5, 0);
  });
  return {derive_paging_rcl(model, g), std::move(g)};
}

} // namespace pagereg
