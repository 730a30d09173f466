#pragma once

#include "cost.hpp"
#include "distribution.hpp"
#include "errors.hpp"
#include "model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace pagereg
{

// Cost-to-go V(i0, k, j) on augmented states for k = 0..k_max. Level k_max+1
// is the forced-registration sentinel and is not stored: the recursion
// resolves it to the registration branch directly.
class ValueFunction
{
public:
  ValueFunction() = default;
  ValueFunction(std::size_t n_states, int k_max)
      : n_(n_states), k_max_(k_max), v_(n_states * (static_cast<std::size_t>(k_max) + 1) * n_states, 0.0)
  {
  }

  std::size_t n_states() const { return n_; }
  int k_max() const { return k_max_; }
  bool is_sentinel(int k) const { return k == k_max_ + 1; }

  double operator()(std::size_t i0, int k, std::size_t j) const { return v_[offset(i0, k) + j]; }
  double &operator()(std::size_t i0, int k, std::size_t j) { return v_[offset(i0, k) + j]; }

  std::span<const double> level(std::size_t i0, int k) const { return {v_.data() + offset(i0, k), n_}; }
  std::span<double> level(std::size_t i0, int k) { return {v_.data() + offset(i0, k), n_}; }

  // V(l, 0, l): cost-to-go right after a report at l.
  double renewal(std::size_t l) const { return (*this)(l, 0, l); }

  std::span<const double> raw() const { return v_; }

private:
  std::size_t offset(std::size_t i0, int k) const
  {
    return (i0 * (static_cast<std::size_t>(k_max_) + 1) + static_cast<std::size_t>(k)) * n_;
  }

  std::size_t n_ = 0;
  int k_max_ = 0;
  std::vector<double> v_;
};

namespace detail
{

// Backward pass over k = k_max..0 for every i0, reading renewal values from
// `renewal` (previous sweep) and same-sweep values at k+1. With `fixed` set,
// the registration choice follows that law instead of the minimum.
// Returns the sup-norm change of V.
inline double backward_pass(const MotionModel &model, const PagingRCL &f, std::span<const double> renewal,
                            ValueFunction &V, const RegistrationRCL *fixed)
{
  const auto n = model.n_states();
  const auto &par = model.params();
  const int K = model.k_max();
  const auto &P = model.transitions();
  std::vector<double> q(n);
  double diff = 0.0;
  for (std::size_t i0 = 0; i0 < n; ++i0)
  {
    for (int k = K; k >= 0; --k)
    {
      // Expected cost of the step into elapsed time k+1, given the state l reached.
      const int next = k + 1;
      for (std::size_t l = 0; l < n; ++l)
      {
        double reg = par.reg_cost + renewal[l];
        double stay;
        if (next > K)
          stay = reg;
        else if (fixed)
          stay = fixed->registers(i0, next, l) ? reg : V(i0, next, l);
        else
          stay = std::min(V(i0, next, l), reg);
        q[l] = par.lambda_p * (par.page_cost * f.rank(i0, next, l) + renewal[l]) + (1.0 - par.lambda_p) * stay;
      }
      auto lev = V.level(i0, k);
      for (std::size_t j = 0; j < n; ++j)
      {
        double s = 0.0;
        for (const auto &t : P.row(j))
          s += t.prob * q[static_cast<std::size_t>(t.to)];
        double updated = par.beta * s;
        diff = std::max(diff, std::abs(updated - lev[j]));
        lev[j] = updated;
      }
    }
  }
  return diff;
}

inline std::vector<double> renewal_values(const ValueFunction &V)
{
  std::vector<double> h(V.n_states());
  for (std::size_t l = 0; l < h.size(); ++l)
    h[l] = V.renewal(l);
  return h;
}

inline void check_paging_shape(const MotionModel &model, const PagingRCL &f)
{
  if (f.n_states() != model.n_states() || f.k_max() != model.k_max())
    throw ValidationError("paging law does not match the model dimensions");
}

} // namespace detail

// Upper bound on any cost-to-go: every step costs at most lambda_p*P*|C| + R.
inline double value_bound(const MotionModel &model)
{
  const auto &p = model.params();
  return p.beta * (p.lambda_p * p.page_cost * static_cast<double>(model.n_cells()) + p.reg_cost) / (1.0 - p.beta);
}

// One application of the optimality operator, V <- T(V). Returns sup|T(V) - V|.
inline double bellman_sweep(const MotionModel &model, const PagingRCL &f, ValueFunction &V)
{
  detail::check_paging_shape(model, f);
  auto h = detail::renewal_values(V);
  return detail::backward_pass(model, f, h, V, nullptr);
}

// sup|T(V) - V| without modifying V.
inline double bellman_residual(const MotionModel &model, const PagingRCL &f, const ValueFunction &V)
{
  ValueFunction copy = V;
  double worst = 0.0;
  bellman_sweep(model, f, copy);
  for (std::size_t i = 0; i < V.raw().size(); ++i)
    worst = std::max(worst, std::abs(copy.raw()[i] - V.raw()[i]));
  return worst;
}

struct ValueIterationOptions
{
  double tol = 1e-10;
  // 0 selects ceil(log(tol (1-beta) / bound) / log beta) + margin.
  int max_sweeps = 0;
  int margin = 50;
};

struct ValueIterationResult
{
  ValueFunction V;
  int sweeps = 0;
  std::vector<double> sweep_changes; // sup|V_m - V_{m-1}| for m = 1..sweeps
};

inline int sweep_cap(double tol, double beta, double bound, int margin)
{
  double ratio = tol * (1.0 - beta) / std::max(bound, tol);
  int needed = ratio < 1.0 ? static_cast<int>(std::ceil(std::log(ratio) / std::log(beta))) : 1;
  return needed + margin;
}

// Value iteration from V_0 = 0 until sup|V_m - V_{m-1}| < tol.
inline ValueIterationResult value_iteration(const MotionModel &model, const PagingRCL &f,
                                            const ValueIterationOptions &opt = {})
{
  detail::check_paging_shape(model, f);
  if (!(opt.tol > 0.0))
    throw ValidationError("value iteration tolerance must be positive");
  int cap = opt.max_sweeps > 0 ? opt.max_sweeps
                               : sweep_cap(opt.tol, model.params().beta, value_bound(model), opt.margin);
  ValueIterationResult res{ValueFunction(model.n_states(), model.k_max()), 0, {}};
  while (true)
  {
    if (res.sweeps >= cap)
      throw NonConvergence("value iteration did not reach tol " + std::to_string(opt.tol) + " within " +
                           std::to_string(cap) + " sweeps");
    double change = bellman_sweep(model, f, res.V);
    ++res.sweeps;
    res.sweep_changes.push_back(change);
    if (change < opt.tol)
      return res;
  }
}

// g_l(i0,k) = 0 iff V(i0,k,l) <= R + V(l,0,l), for 1 <= k <= k_max. Exact
// ties keep the mobile silent.
inline RegistrationRCL extract_registration(const MotionModel &model, const ValueFunction &V)
{
  const auto n = model.n_states();
  const double R = model.params().reg_cost;
  RegistrationRCL g(n, model.k_max());
  for (std::size_t i0 = 0; i0 < n; ++i0)
    for (int k = 1; k <= model.k_max(); ++k)
      for (std::size_t l = 0; l < n; ++l)
        g.set(i0, k, l, !(V(i0, k, l) <= R + V.renewal(l)));
  return g;
}

// Cost-to-go of a fixed law pair: the backward pass with the decisions of g,
// anchored at the exact renewal costs C(l).
inline ValueFunction evaluate_registration(const MotionModel &model, const PagingRCL &f, const RegistrationRCL &g,
                                           std::span<const double> renewal_costs)
{
  detail::check_paging_shape(model, f);
  ValueFunction V(model.n_states(), model.k_max());
  detail::backward_pass(model, f, renewal_costs, V, &g);
  return V;
}

struct RegistrationSolution
{
  RegistrationRCL g;
  ValueIterationResult iteration;
  int improvement_steps = 0;
};

// Optimal registration law for a fixed paging law. Value iteration gives a
// law that is optimal up to tol / (1 - beta); policy-improvement steps on the
// exactly evaluated costs then remove any decision that is strictly worse.
inline RegistrationSolution optimal_registration(const MotionModel &model, const PagingRCL &f,
                                                 const ValueIterationOptions &opt = {})
{
  RegistrationSolution sol{RegistrationRCL(), value_iteration(model, f, opt), 0};
  sol.g = extract_registration(model, sol.iteration.V);
  const auto n = model.n_states();
  const double R = model.params().reg_cost;
  const int cap = 100;
  for (; sol.improvement_steps < cap; ++sol.improvement_steps)
  {
    auto costs = policy_cost(model, f, sol.g).per_report_state;
    auto Vg = evaluate_registration(model, f, sol.g, costs);
    double eps = 1e-13 * (1.0 + value_bound(model));
    bool changed = false;
    for (std::size_t i0 = 0; i0 < n; ++i0)
      for (int k = 1; k <= model.k_max(); ++k)
        for (std::size_t l = 0; l < n; ++l)
        {
          double stay = Vg(i0, k, l);
          double reg = R + costs[l];
          bool now = sol.g.registers(i0, k, l);
          if (!now && reg < stay - eps)
          {
            sol.g.set(i0, k, l, true);
            changed = true;
          }
          else if (now && stay < reg - eps)
          {
            sol.g.set(i0, k, l, false);
            changed = true;
          }
        }
    if (!changed)
      return sol;
  }
  throw NonConvergence("policy improvement did not settle within " + std::to_string(cap) + " steps");
}

// ---------------------------------------------------------------------------
// Translation-invariant walk

enum class PingPongSide
{
  plus_first, // 0, +1, -1, +2, -2, ...
  minus_first // 0, -1, +1, -2, +2, ...
};

// 1-based position of displacement d in the ping-pong search order.
inline int ping_pong_rank(int d, PingPongSide side = PingPongSide::plus_first)
{
  if (d == 0)
    return 1;
  bool leading = side == PingPongSide::plus_first ? d > 0 : d < 0;
  return 2 * std::abs(d) + (leading ? 0 : 1);
}

struct WalkValueResult
{
  int window = 0;                  // V and register cover displacements -window..window
  std::vector<double> V;           // index d + window
  std::vector<std::uint8_t> reg;   // g_d = 1 iff V(d) >= R + V(0)
  int d_left = 0;                  // g registers at d <= -d_left
  int d_right = 0;                 // g registers at d >= d_right
  int sweeps = 0;
  std::vector<double> sweep_changes;

  double value(int d) const { return V[static_cast<std::size_t>(d + window)]; }
  bool registers(int d) const
  {
    if (d < -window || d > window)
      return true;
    return reg[static_cast<std::size_t>(d + window)] != 0;
  }
};

namespace detail
{

inline WalkValueResult walk_iterate(const FiniteDistribution &b, const CostParams &par, PingPongSide side, double tol,
                                    int window, int cap)
{
  WalkValueResult res;
  res.window = window;
  auto size = static_cast<std::size_t>(2 * window + 1);
  std::vector<double> V(size, 0.0), next(size, 0.0);
  const int lo = b.lowest(), hi = b.highest();
  while (true)
  {
    if (res.sweeps >= cap)
      throw NonConvergence("walk value iteration did not reach tol within " + std::to_string(cap) + " sweeps");
    const double v0 = V[static_cast<std::size_t>(window)];
    double change = 0.0;
    for (int j = -window; j <= window; ++j)
    {
      double s = 0.0;
      for (int d = lo; d <= hi; ++d)
      {
        double p = b[d];
        if (p == 0.0)
          continue;
        int l = j + d;
        // Outside the window the mobile is taken to register.
        double stay = (l < -window || l > window) ? par.reg_cost + v0
                                                  : std::min(V[static_cast<std::size_t>(l + window)], par.reg_cost + v0);
        s += p * (par.lambda_p * (par.page_cost * ping_pong_rank(l, side) + v0) + (1.0 - par.lambda_p) * stay);
      }
      auto idx = static_cast<std::size_t>(j + window);
      next[idx] = par.beta * s;
      change = std::max(change, std::abs(next[idx] - V[idx]));
    }
    V.swap(next);
    ++res.sweeps;
    res.sweep_changes.push_back(change);
    if (change < tol)
      break;
  }
  res.V = std::move(V);
  const double v0 = res.V[static_cast<std::size_t>(window)];
  res.reg.resize(size);
  for (std::size_t i = 0; i < size; ++i)
    res.reg[i] = res.V[i] >= par.reg_cost + v0 ? 1 : 0;
  res.d_right = window + 1;
  for (int d = 1; d <= window; ++d)
    if (res.registers(d))
    {
      res.d_right = d;
      break;
    }
  res.d_left = window + 1;
  for (int d = 1; d <= window; ++d)
    if (res.registers(-d))
    {
      res.d_left = d;
      break;
    }
  return res;
}

} // namespace detail

// Stationary registration recursion for a symmetric walk under ping-pong
// paging, in displacement coordinates relative to the last report:
//   V(j) = beta sum_l b_{l-j} [ lambda_p (P f*_l + V(0)) + (1-lambda_p) min{V(l), R + V(0)} ].
// The window grows until the outer band registers on both sides, so the
// truncation assumption (register outside the window) is self-consistent.
inline WalkValueResult walk_value_iteration(const WalkModel &walk, PingPongSide side = PingPongSide::plus_first,
                                            double tol = 1e-10)
{
  const auto &par = walk.model.params();
  const auto &b = walk.kernel;
  int m = std::max(1, b.reach());
  double bound = par.beta * (par.lambda_p * par.page_cost + par.reg_cost) / (1.0 - par.beta);
  int window = std::max(walk.half_width, 8 * m);
  for (int attempt = 0; attempt < 12; ++attempt, window *= 2)
  {
    // A window of w positions can cost up to (2w+1) pages per search.
    double scale = bound + par.beta * par.lambda_p * par.page_cost * (2.0 * window + 1.0) / (1.0 - par.beta);
    int cap = sweep_cap(tol, par.beta, scale, 50);
    auto res = detail::walk_iterate(b, par, side, tol, window, cap);
    bool closed = true;
    for (int d = window - m; d <= window; ++d)
      closed = closed && res.registers(d) && res.registers(-d);
    if (closed)
      return res;
  }
  throw NonConvergence("walk registration set did not close within the largest window");
}

} // namespace pagereg
