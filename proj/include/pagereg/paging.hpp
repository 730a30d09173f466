#pragma once

#include "belief.hpp"
#include "model.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

namespace pagereg
{

// Probability of the mobile being in each cell.
using CellDistribution = std::vector<double>;

inline CellDistribution cell_distribution(const CellPartition &cells, std::span<const double> state_mass)
{
  CellDistribution q(cells.n_cells(), 0.0);
  for (std::size_t s = 0; s < state_mass.size(); ++s)
    q[static_cast<std::size_t>(cells.cell_of(s))] += state_mass[s];
  return q;
}

// Cells in search order: decreasing probability, ties by ascending index.
inline std::vector<int> ml_cell_sequence(std::span<const double> q)
{
  std::vector<int> seq(q.size());
  std::iota(seq.begin(), seq.end(), 0);
  std::stable_sort(seq.begin(), seq.end(), [&](int a, int b) { return q[a] > q[b]; });
  return seq;
}

inline PagingOrder ml_paging_order(std::span<const double> q, const CellPartition &cells)
{
  return PagingOrder::from_cell_sequence(cells, ml_cell_sequence(q));
}

// Mean number of searches under the best order: sum_i i * q_[i].
inline double guessing_entropy(std::span<const double> q)
{
  std::vector<double> sorted(q.begin(), q.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double s = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    s += static_cast<double>(i + 1) * sorted[i];
  return s;
}

// Expected cells searched when the state has (possibly unnormalized) mass
// `state_mass` and cells are searched per `rank`.
inline double expected_pages(std::span<const double> state_mass, std::span<const int> rank)
{
  double s = 0.0;
  for (std::size_t l = 0; l < state_mass.size(); ++l)
    s += state_mass[l] * rank[l];
  return s;
}

// Optimal paging law for a fixed registration law: at elapsed time k the
// cells are searched by decreasing probability under w(i0,k-1) P.
inline PagingRCL derive_paging_rcl(const MotionModel &model, const RegistrationRCL &g)
{
  PagingRCL f(model.cells(), model.k_max());
  for (std::size_t i0 = 0; i0 < model.n_states(); ++i0)
  {
    BeliefPath path = belief_recursion(model, g, i0);
    int last_k = std::min(model.k_max() + 1, path.last() + 1);
    for (int k = 1; k <= last_k; ++k)
    {
      auto next = propagate(path.beliefs[static_cast<std::size_t>(k - 1)], model.transitions());
      f.set(i0, k, ml_paging_order(cell_distribution(model.cells(), next), model.cells()));
    }
  }
  return f;
}

} // namespace pagereg
