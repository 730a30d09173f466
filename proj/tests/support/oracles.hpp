#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls the library's evaluators; only model and policy types
// are shared.

#include <pagereg/pagereg.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracle
{

using namespace pagereg;

// Five-state example cost for a feedback pair whose belief returns to
// delta(0) every three steps. p_reg = P[R1 | P1^c], p_two = P[N2 = 2 | P1^c and P2].
inline double simple_closed_form(double lambda_p, double page_cost, double reg_cost, double beta, double p_reg,
                                 double p_two)
{
  double b3 = beta * beta * beta;
  double reg = reg_cost * beta * (1.0 - lambda_p) * p_reg;
  double page = lambda_p * page_cost * (1.4 * beta + beta * beta + beta * beta * (1.0 - lambda_p) * p_two + b3);
  return (reg + page) / (1.0 - b3);
}

struct PolicyRow
{
  SimplePolicy policy;
  double p_reg;
  double p_two;
};

inline const std::vector<PolicyRow> &policy_rows()
{
  static const std::vector<PolicyRow> rows = {
      {SimplePolicy::A, 0.0, 0.4},
      {SimplePolicy::B, 0.4, 0.0},
      {SimplePolicy::C, 0.6, 0.0},
      {SimplePolicy::D, 1.0, 0.0},
  };
  return rows;
}

// Smallest multiple of 3 whose forced-registration tail is below `eps`.
inline int simple_horizon(double lambda_p, double page_cost, double reg_cost, double beta, double eps)
{
  double scale = (reg_cost + lambda_p * page_cost * 3.0) / (1.0 - beta);
  int k = 3;
  while (scale * std::pow(beta, k + 1) >= eps)
    k += 3;
  return k;
}

// Dense Gaussian elimination with partial pivoting; A is n x n row-major.
inline std::vector<double> solve_dense(std::vector<double> A, std::vector<double> b)
{
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c)
  {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r * n + c]) > std::abs(A[piv * n + c]))
        piv = r;
    if (piv != c)
    {
      for (std::size_t k = 0; k < n; ++k)
        std::swap(A[c * n + k], A[piv * n + k]);
      std::swap(b[c], b[piv]);
    }
    for (std::size_t r = c + 1; r < n; ++r)
    {
      double m = A[r * n + c] / A[c * n + c];
      if (m == 0.0)
        continue;
      for (std::size_t k = c; k < n; ++k)
        A[r * n + k] -= m * A[c * n + k];
      b[r] -= m * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;)
  {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k)
      s -= A[i * n + k] * x[k];
    x[i] = s / A[i * n + i];
  }
  return x;
}

// Cost from x0 by fixed-point iteration on the augmented chain (i0, k, x):
// W(i0,k,x) = beta sum_y p_xy [lambda (P r_y(i0,k+1) + W(y,0,y)) + (1-lambda) next],
// next = R + W(y,0,y) when registering at (i0,k+1,y), else W(i0,k+1,y).
inline double augmented_chain_cost(const MotionModel &model, const PagingRCL &f, const RegistrationRCL &g,
                                   double tol = 1e-14)
{
  const auto n = model.n_states();
  const int K = model.k_max();
  const auto &p = model.params();
  const auto &P = model.transitions();
  auto idx = [&](std::size_t i0, int k, std::size_t x) { return (i0 * static_cast<std::size_t>(K + 1) + k) * n + x; };
  std::vector<double> W(n * static_cast<std::size_t>(K + 1) * n, 0.0), next(W.size());
  for (int it = 0; it < 100000; ++it)
  {
    double change = 0.0;
    for (std::size_t i0 = 0; i0 < n; ++i0)
      for (int k = 0; k <= K; ++k)
        for (std::size_t x = 0; x < n; ++x)
        {
          double s = 0.0;
          for (std::size_t y = 0; y < n; ++y)
          {
            double pxy = P(x, y);
            if (pxy == 0.0)
              continue;
            double renew = W[idx(y, 0, y)];
            double paged = p.page_cost * f.rank(i0, k + 1, y) + renew;
            double silent = g.registers(i0, k + 1, y) ? p.reg_cost + renew : W[idx(i0, k + 1, y)];
            s += pxy * (p.lambda_p * paged + (1.0 - p.lambda_p) * silent);
          }
          next[idx(i0, k, x)] = p.beta * s;
          change = std::max(change, std::abs(next[idx(i0, k, x)] - W[idx(i0, k, x)]));
        }
    W.swap(next);
    if (change < tol)
      break;
  }
  auto x0 = static_cast<std::size_t>(model.x0());
  return W[idx(x0, 0, x0)];
}

// Discounted cost of the first `depth` steps by expanding every path of
// moves and report events. `tail` receives a bound on the omitted cost.
inline double path_tree_cost(const MotionModel &model, const PagingRCL &f, const RegistrationRCL &g, int depth,
                             double *tail = nullptr)
{
  const auto &p = model.params();
  const auto &P = model.transitions();
  const auto n = model.n_states();
  std::function<double(int, std::size_t, std::size_t, int, double)> expand =
      [&](int t, std::size_t x, std::size_t i0, int k, double disc) -> double {
    if (t == depth)
      return 0.0;
    double total = 0.0;
    double d = disc * p.beta;
    for (std::size_t y = 0; y < n; ++y)
    {
      double pxy = P(x, y);
      if (pxy == 0.0)
        continue;
      double paged = d * p.page_cost * f.rank(i0, k + 1, y) + expand(t + 1, y, y, 0, d);
      double silent = g.registers(i0, k + 1, y) ? d * p.reg_cost + expand(t + 1, y, y, 0, d)
                                                : expand(t + 1, y, i0, k + 1, d);
      total += pxy * (p.lambda_p * paged + (1.0 - p.lambda_p) * silent);
    }
    return total;
  };
  if (tail)
  {
    double step = p.lambda_p * p.page_cost * static_cast<double>(model.n_cells()) + p.reg_cost;
    *tail = step * std::pow(p.beta, depth + 1) / (1.0 - p.beta);
  }
  auto x0 = static_cast<std::size_t>(model.x0());
  return expand(0, x0, x0, 0, 1.0);
}

// ---------------------------------------------------------------------------
// Exhaustive registration search for a fixed paging law.

struct DecisionPoint
{
  int k;
  std::size_t l;
};

// Points (i0, k, l) with l reachable from i0 in k steps when nothing is trimmed.
inline std::vector<std::vector<DecisionPoint>> decision_points(const MotionModel &model)
{
  const auto n = model.n_states();
  std::vector<std::vector<DecisionPoint>> pts(n);
  for (std::size_t i0 = 0; i0 < n; ++i0)
  {
    std::vector<double> w(n, 0.0);
    w[i0] = 1.0;
    for (int k = 1; k <= model.k_max(); ++k)
    {
      std::vector<double> nw(n, 0.0);
      for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y)
          nw[y] += w[x] * model.transitions()(x, y);
      w = nw;
      for (std::size_t l = 0; l < n; ++l)
        if (w[l] > 0.0)
          pts[i0].push_back({k, l});
    }
  }
  return pts;
}

// Cycle cost and discounted next-report row for report state i0 under the
// decisions of i0's slice of g.
struct CycleRow
{
  double cost = 0.0;
  std::vector<double> next;
};

inline CycleRow cycle_row(const MotionModel &model, const PagingRCL &f, const RegistrationRCL &g, std::size_t i0)
{
  const auto n = model.n_states();
  const auto &p = model.params();
  CycleRow row{0.0, std::vector<double>(n, 0.0)};
  std::vector<double> mass(n, 0.0);
  mass[i0] = 1.0;
  double disc = 1.0;
  for (int k = 1; k <= model.k_max() + 1; ++k)
  {
    disc *= p.beta;
    std::vector<double> a(n, 0.0);
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        a[y] += mass[x] * model.transitions()(x, y);
    for (std::size_t y = 0; y < n; ++y)
    {
      row.cost += disc * p.lambda_p * p.page_cost * f.rank(i0, k, y) * a[y];
      row.next[y] += disc * p.lambda_p * a[y];
      if (g.registers(i0, k, y))
      {
        row.cost += disc * p.reg_cost * (1.0 - p.lambda_p) * a[y];
        row.next[y] += disc * (1.0 - p.lambda_p) * a[y];
        mass[y] = 0.0;
      }
      else
      {
        mass[y] = (1.0 - p.lambda_p) * a[y];
      }
    }
  }
  return row;
}

struct BruteForceResult
{
  double best = std::numeric_limits<double>::infinity();
  RegistrationRCL g;
  std::uint64_t evaluated = 0;
  std::size_t points = 0;
};

// Minimum of C(f, g) over every assignment of the decision points (all other
// decisions 0). Each i0 slice only affects its own cycle row, so rows are
// tabulated per slice and every combination is solved exactly.
inline BruteForceResult brute_force_registration(const MotionModel &model, const PagingRCL &f)
{
  const auto n = model.n_states();
  auto pts = decision_points(model);
  std::vector<std::vector<CycleRow>> table(n);
  BruteForceResult res;
  for (std::size_t i0 = 0; i0 < n; ++i0)
  {
    res.points += pts[i0].size();
    std::uint64_t count = std::uint64_t{1} << pts[i0].size();
    for (std::uint64_t mask = 0; mask < count; ++mask)
    {
      RegistrationRCL g = RegistrationRCL::never(model);
      for (std::size_t b = 0; b < pts[i0].size(); ++b)
        if (mask >> b & 1U)
          g.set(i0, pts[i0][b].k, pts[i0][b].l, true);
      table[i0].push_back(cycle_row(model, f, g, i0));
    }
  }

  std::vector<std::uint64_t> choice(n, 0), best_choice(n, 0);
  std::vector<double> A(n * n), c(n);
  const auto x0 = static_cast<std::size_t>(model.x0());
  while (true)
  {
    for (std::size_t i = 0; i < n; ++i)
    {
      const auto &row = table[i][choice[i]];
      c[i] = row.cost;
      for (std::size_t j = 0; j < n; ++j)
        A[i * n + j] = (i == j ? 1.0 : 0.0) - row.next[j];
    }
    double v = solve_dense(A, c)[x0];
    ++res.evaluated;
    if (v < res.best)
    {
      res.best = v;
      best_choice = choice;
    }
    std::size_t i = 0;
    for (; i < n; ++i)
    {
      if (++choice[i] < table[i].size())
        break;
      choice[i] = 0;
    }
    if (i == n)
      break;
  }

  res.g = RegistrationRCL::never(model);
  for (std::size_t i0 = 0; i0 < n; ++i0)
    for (std::size_t b = 0; b < pts[i0].size(); ++b)
      if (best_choice[i0] >> b & 1U)
        res.g.set(i0, pts[i0][b].k, pts[i0][b].l, true);
  return res;
}

// ---------------------------------------------------------------------------
// Random instances

// Row-stochastic matrix where each row has between 1 and `max_out` successors.
inline MotionModel random_model(std::mt19937_64 &rng, std::size_t n, int k_max, std::size_t max_out,
                                bool random_cells = true)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> P(n * n, 0.0);
  std::vector<std::size_t> states(n);
  std::iota(states.begin(), states.end(), 0);
  for (std::size_t i = 0; i < n; ++i)
  {
    std::shuffle(states.begin(), states.end(), rng);
    std::size_t out = 1 + static_cast<std::size_t>(u(rng) * static_cast<double>(std::min(max_out, n)));
    out = std::min(out, std::min(max_out, n));
    double total = 0.0;
    std::vector<double> w(out);
    for (auto &x : w)
    {
      x = 0.05 + u(rng);
      total += x;
    }
    for (std::size_t j = 0; j < out; ++j)
      P[i * n + states[j]] = w[j] / total;
    // Fix rounding so the row sums to 1 exactly enough.
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      s += P[i * n + j];
    P[i * n + states[0]] += 1.0 - s;
  }

  std::vector<std::vector<int>> cells;
  if (random_cells)
  {
    std::shuffle(states.begin(), states.end(), rng);
    std::size_t pos = 0;
    while (pos < n)
    {
      std::size_t len = 1 + static_cast<std::size_t>(u(rng) * 2.0);
      std::vector<int> cell;
      for (std::size_t j = 0; j < len && pos < n; ++j, ++pos)
        cell.push_back(static_cast<int>(states[pos]));
      cells.push_back(cell);
    }
  }
  else
  {
    for (std::size_t i = 0; i < n; ++i)
      cells.push_back({static_cast<int>(i)});
  }

  CostParams params;
  params.lambda_p = 0.02 + 0.4 * u(rng);
  params.page_cost = 0.5 + u(rng);
  params.reg_cost = 0.05 + 1.5 * u(rng);
  params.beta = 0.5 + 0.45 * u(rng);
  params.k_max = k_max;
  int x0 = static_cast<int>(u(rng) * static_cast<double>(n)) % static_cast<int>(n);
  return {TransitionMatrix(n, std::move(P)), CellPartition(n, std::move(cells)), x0, params};
}

inline RegistrationRCL random_registration(std::mt19937_64 &rng, const MotionModel &model, double density)
{
  std::bernoulli_distribution coin(density);
  RegistrationRCL g = RegistrationRCL::never(model);
  for (std::size_t i0 = 0; i0 < model.n_states(); ++i0)
    for (int k = 1; k <= model.k_max(); ++k)
      for (std::size_t l = 0; l < model.n_states(); ++l)
        g.set(i0, k, l, coin(rng));
  return g;
}

inline std::vector<double> random_simplex(std::mt19937_64 &rng, std::size_t n)
{
  std::exponential_distribution<double> e(1.0);
  std::vector<double> x(n);
  double s = 0.0;
  for (auto &v : x)
  {
    v = e(rng);
    s += v;
  }
  for (auto &v : x)
    v /= s;
  return x;
}

// x D for a random product of T-transforms, so the result is majorized by x.
inline std::vector<double> t_transform_average(std::mt19937_64 &rng, std::vector<double> x, int steps)
{
  std::uniform_int_distribution<std::size_t> pick(0, x.size() - 1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int s = 0; s < steps; ++s)
  {
    std::size_t i = pick(rng), j = pick(rng);
    if (i == j)
      continue;
    double t = u(rng);
    double xi = x[i], xj = x[j];
    x[i] = t * xi + (1.0 - t) * xj;
    x[j] = t * xj + (1.0 - t) * xi;
  }
  return x;
}

// Neat distribution on [-m, m]: random masses sorted and laid out 0, 1, -1, 2, -2, ...
inline FiniteDistribution random_neat(std::mt19937_64 &rng, int m)
{
  auto mass = random_simplex(rng, static_cast<std::size_t>(2 * m + 1));
  std::sort(mass.begin(), mass.end(), std::greater<>());
  std::vector<double> laid(mass.size(), 0.0);
  for (std::size_t r = 0; r < mass.size(); ++r)
  {
    int pos = r == 0 ? 0 : (r % 2 == 1 ? static_cast<int>((r + 1) / 2) : -static_cast<int>(r / 2));
    laid[static_cast<std::size_t>(pos + m)] = mass[r];
  }
  return {-m, std::move(laid)};
}

// Symmetric unimodal kernel on [-m, m].
inline FiniteDistribution random_symmetric_unimodal(std::mt19937_64 &rng, int m)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> half(static_cast<std::size_t>(m + 1));
  for (auto &v : half)
    v = u(rng) + 1e-3;
  std::sort(half.begin(), half.end(), std::greater<>());
  std::vector<double> mass(static_cast<std::size_t>(2 * m + 1));
  double total = 0.0;
  for (int i = -m; i <= m; ++i)
  {
    mass[static_cast<std::size_t>(i + m)] = half[static_cast<std::size_t>(std::abs(i))];
    total += half[static_cast<std::size_t>(std::abs(i))];
  }
  for (auto &v : mass)
    v /= total;
  return {-m, std::move(mass)};
}

// Nonincreasing rearrangement partial sums, independent of the library.
inline bool majorized_by(std::vector<double> x, std::vector<double> y, double tol = 1e-12)
{
  std::size_t len = std::max(x.size(), y.size());
  x.resize(len, 0.0);
  y.resize(len, 0.0);
  std::sort(x.begin(), x.end(), std::greater<>());
  std::sort(y.begin(), y.end(), std::greater<>());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < len; ++i)
  {
    sx += x[i];
    sy += y[i];
    if (sx > sy + tol)
      return false;
  }
  return std::abs(sx - sy) <= tol;
}

} // namespace oracle
