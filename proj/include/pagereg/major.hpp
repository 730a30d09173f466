#pragma once

#include "belief.hpp"
#include "distribution.hpp"
#include "model.hpp"
#include "regdp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pagereg
{

inline constexpr double kMajorizationTol = 1e-12;

// Masses sorted nonincreasing.
inline std::vector<double> rearrange_nonincreasing(std::span<const double> x)
{
  std::vector<double> out(x.begin(), x.end());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

inline std::vector<double> rearrange_nonincreasing(const FiniteDistribution &x)
{
  return rearrange_nonincreasing(x.masses());
}

// True iff x is majorized by y (x < y): every partial sum of y's
// nonincreasing rearrangement dominates x's and the totals agree. Vectors of
// different length are padded with zeros.
inline bool majorizes(std::span<const double> x, std::span<const double> y, double tol = kMajorizationTol)
{
  auto xs = rearrange_nonincreasing(x);
  auto ys = rearrange_nonincreasing(y);
  std::size_t len = std::max(xs.size(), ys.size());
  xs.resize(len, 0.0);
  ys.resize(len, 0.0);
  double sx = 0.0, sy = 0.0;
  for (std::size_t r = 0; r < len; ++r)
  {
    sx += xs[r];
    sy += ys[r];
    if (sx > sy + tol)
      return false;
  }
  return std::abs(sx - sy) <= tol;
}

inline bool majorizes(const FiniteDistribution &x, const FiniteDistribution &y, double tol = kMajorizationTol)
{
  return majorizes(x.masses(), y.masses(), tol);
}

// Neat: mu_0 >= mu_1 >= mu_-1 >= mu_2 >= mu_-2 >= ...  `at(i)` returns the
// value at integer i and `reach` bounds the support.
template <typename At>
bool is_neat_fn(At &&at, int reach, double tol = 0.0)
{
  double prev = at(0);
  for (int i = 1; i <= reach + 1; ++i)
  {
    double plus = at(i), minus = at(-i);
    if (plus > prev + tol || minus > plus + tol)
      return false;
    prev = minus;
  }
  return true;
}

inline bool is_neat(const FiniteDistribution &x, double tol = 0.0)
{
  int reach = std::max(std::abs(x.lowest()), std::abs(x.highest()));
  return is_neat_fn([&](int i) { return x[i]; }, reach, tol);
}

// Removes mass lambda starting from the least likely points (the boundary
// point is trimmed partially) and renormalizes by 1 - lambda. Among equal
// masses the highest position is trimmed first.
inline FiniteDistribution min_likelihood_trim(const FiniteDistribution &mu, double lambda)
{
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw ValidationError("trim mass must lie in [0,1)");
  std::vector<double> m(mu.masses().begin(), mu.masses().end());
  std::vector<std::size_t> idx(m.size());
  for (std::size_t i = 0; i < idx.size(); ++i)
    idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (m[a] != m[b])
      return m[a] < m[b];
    return a > b;
  });
  double remaining = lambda;
  for (std::size_t i : idx)
  {
    if (remaining <= 0.0)
      break;
    double cut = std::min(remaining, m[i]);
    m[i] -= cut;
    remaining -= cut;
  }
  double total = 0.0;
  for (double &v : m)
  {
    v = std::max(0.0, v / (1.0 - lambda));
    total += v;
  }
  for (double &v : m)
    v /= total;
  return {mu.offset(), std::move(m)};
}

inline std::vector<double> convolve(std::span<const double> x, std::span<const double> b)
{
  std::vector<double> out(x.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      out[i + j] += x[i] * b[j];
  return out;
}

inline FiniteDistribution convolve(const FiniteDistribution &x, const FiniteDistribution &b)
{
  auto out = convolve(x.masses(), b.masses());
  double total = 0.0;
  for (double v : out)
    total += v;
  for (double &v : out)
    v /= total;
  return {x.offset() + b.offset(), std::move(out)};
}

// ---------------------------------------------------------------------------
// Walk structure

struct WalkStepCheck
{
  int i0 = 0; // report state
  int k = 0;  // elapsed time
  bool paging_ok = true;
  bool registration_ok = true;
  // Feasible threshold ranges implied by the reachable decisions; an upper
  // bound of max() means no reachable registration on that side.
  int d_left_min = 1, d_left_max = std::numeric_limits<int>::max();
  int d_right_min = 1, d_right_max = std::numeric_limits<int>::max();
  std::string note;
};

struct WalkStructureReport
{
  bool ping_pong = true;   // every checked paging vector searches by distance
  bool threshold = true;   // every checked registration vector is a two-sided threshold
  bool plus_first = false; // some +d searched before a less likely -d
  bool minus_first = false;
  bool left_closer = false; // some step with d_left = d_right - 1 forced
  bool right_closer = false;
  // Pairs searched against distance order whose probabilities were equal.
  std::size_t tied_pairs = 0;
  std::vector<int> checked_report_states;
  std::vector<WalkStepCheck> steps;

  bool pass() const { return ping_pong && threshold && !checked_report_states.empty(); }
};

namespace detail
{

inline bool feasible_threshold_pair(const WalkStepCheck &s)
{
  // Need some d_l, d_r in range with |d_l - d_r| <= 1.
  auto lo = [](int a) { return static_cast<long long>(a); };
  long long l0 = lo(s.d_left_min), l1 = lo(s.d_left_max), r0 = lo(s.d_right_min), r1 = lo(s.d_right_max);
  if (l0 > l1 || r0 > r1)
    return false;
  return l0 <= r1 + 1 && r0 <= l1 + 1;
}

} // namespace detail

// Checks that f pages by increasing distance from the last report and that g
// registers exactly outside an interval around it with thresholds differing
// by at most one, on every state reachable without a report. Only report
// states whose whole cycle stays clear of the truncation boundary are checked.
inline WalkStructureReport check_walk_structure(const WalkModel &walk, const PagingRCL &f, const RegistrationRCL &g)
{
  const auto &model = walk.model;
  const int K = model.k_max();
  const int m = std::max(1, walk.kernel.reach());
  const auto n = static_cast<int>(model.n_states());
  WalkStructureReport report;

  for (int i0 = 0; i0 < n; ++i0)
  {
    if (std::abs(walk.position(static_cast<std::size_t>(i0))) + (K + 1) * m > walk.half_width)
      continue;
    report.checked_report_states.push_back(i0);
    auto path = belief_recursion(model, g, static_cast<std::size_t>(i0));
    for (int k = 1; k <= K + 1 && k - 1 <= path.last(); ++k)
    {
      auto arrive = propagate(path.beliefs[static_cast<std::size_t>(k - 1)], model.transitions());
      WalkStepCheck step;
      step.i0 = i0;
      step.k = k;
      auto ui0 = static_cast<std::size_t>(i0);

      // Paging: a nearer reachable state is searched first unless the two
      // states are equally likely, in which case either order costs the same.
      std::vector<int> reachable;
      double scale = 0.0;
      for (int l = 0; l < n; ++l)
        if (arrive[static_cast<std::size_t>(l)] > 0.0)
        {
          reachable.push_back(l);
          scale = std::max(scale, arrive[static_cast<std::size_t>(l)]);
        }
      const double tie_tol = 1e-12 * scale;
      for (int a : reachable)
        for (int b : reachable)
        {
          int da = std::abs(a - i0), db = std::abs(b - i0);
          if (da > db || a == b)
            continue;
          bool tied = std::abs(arrive[static_cast<std::size_t>(a)] - arrive[static_cast<std::size_t>(b)]) <= tie_tol;
          bool a_first = f.rank(ui0, k, static_cast<std::size_t>(a)) < f.rank(ui0, k, static_cast<std::size_t>(b));
          if (da < db && !a_first)
          {
            if (tied)
              ++report.tied_pairs;
            else
              step.paging_ok = false;
          }
          if (da == db && a > b && !tied)
            (a_first ? report.plus_first : report.minus_first) = true;
        }

      // Registration: silent on an interval around 0, registering outside.
      if (k <= K)
      {
        for (int sgn : {1, -1})
        {
          int max_silent = 0, min_reg = std::numeric_limits<int>::max();
          for (int dist = 0; dist < n; ++dist)
          {
            int l = i0 + sgn * dist;
            if (l < 0 || l >= n || arrive[static_cast<std::size_t>(l)] <= 0.0)
              continue;
            if (g.registers(ui0, k, static_cast<std::size_t>(l)))
              min_reg = std::min(min_reg, dist);
            else
              max_silent = std::max(max_silent, dist);
          }
          if (min_reg == 0)
          {
            step.registration_ok = false;
            step.note = "registers at the report position";
          }
          if (min_reg != std::numeric_limits<int>::max() && min_reg <= max_silent)
          {
            step.registration_ok = false;
            step.note = "registration set has a hole";
          }
          int &dmin = sgn > 0 ? step.d_right_min : step.d_left_min;
          int &dmax = sgn > 0 ? step.d_right_max : step.d_left_max;
          dmin = max_silent + 1;
          dmax = min_reg;
        }
        if (step.registration_ok && !detail::feasible_threshold_pair(step))
        {
          step.registration_ok = false;
          step.note = "thresholds differ by more than one";
        }
        if (step.registration_ok)
        {
          if (step.d_left_max < step.d_right_min)
            report.left_closer = true;
          if (step.d_right_max < step.d_left_min)
            report.right_closer = true;
        }
      }
      report.ping_pong = report.ping_pong && step.paging_ok;
      report.threshold = report.threshold && step.registration_ok;
      report.steps.push_back(std::move(step));
    }
  }
  return report;
}

} // namespace pagereg
