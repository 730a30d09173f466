#pragma once

#include "distribution.hpp"
#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pagereg
{

struct Transition
{
  int to;
  double prob;
};

// Row-stochastic one-step transition matrix. Keeps the dense matrix for
// random access and a per-row list of nonzeros for propagation.
class TransitionMatrix
{
public:
  TransitionMatrix() = default;

  // `values` is row-major, size n*n.
  TransitionMatrix(std::size_t n, std::vector<double> values) : n_(n), dense_(std::move(values))
  {
    if (n_ == 0)
      throw ValidationError("transition matrix has no states");
    if (dense_.size() != n_ * n_)
      throw ValidationError("transition matrix needs " + std::to_string(n_ * n_) + " entries, got " +
                            std::to_string(dense_.size()));
    offsets_.reserve(n_ + 1);
    offsets_.push_back(0);
    for (std::size_t i = 0; i < n_; ++i)
    {
      double total = 0.0;
      for (std::size_t j = 0; j < n_; ++j)
      {
        double p = dense_[i * n_ + j];
        if (!(p >= 0.0) || !std::isfinite(p))
          throw ValidationError("transition matrix row " + std::to_string(i) + " has a negative entry");
        total += p;
        if (p > 0.0)
          entries_.push_back({static_cast<int>(j), p});
      }
      if (std::abs(total - 1.0) > 1e-12)
        throw ValidationError("transition matrix row " + std::to_string(i) + " sums to " + std::to_string(total));
      offsets_.push_back(entries_.size());
    }
  }

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return dense_[i * n_ + j]; }

  std::span<const Transition> row(std::size_t i) const
  {
    return {entries_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

  std::span<const double> dense() const { return dense_; }

private:
  std::size_t n_ = 0;
  std::vector<double> dense_;
  std::vector<std::size_t> offsets_;
  std::vector<Transition> entries_;
};

// Partition of the state space into cells.
class CellPartition
{
public:
  CellPartition() = default;

  CellPartition(std::size_t n_states, std::vector<std::vector<int>> cells) : cells_(std::move(cells))
  {
    cell_of_.assign(n_states, -1);
    for (std::size_t c = 0; c < cells_.size(); ++c)
    {
      if (cells_[c].empty())
        throw ValidationError("cell " + std::to_string(c) + " is empty");
      for (int s : cells_[c])
      {
        if (s < 0 || static_cast<std::size_t>(s) >= n_states)
          throw ValidationError("cell " + std::to_string(c) + " holds out-of-range state " + std::to_string(s));
        if (cell_of_[s] != -1)
          throw ValidationError("state " + std::to_string(s) + " belongs to more than one cell");
        cell_of_[s] = static_cast<int>(c);
      }
    }
    for (std::size_t s = 0; s < n_states; ++s)
      if (cell_of_[s] == -1)
        throw ValidationError("state " + std::to_string(s) + " belongs to no cell");
  }

  // One state per cell.
  static CellPartition singletons(std::size_t n_states)
  {
    std::vector<std::vector<int>> cells(n_states);
    for (std::size_t s = 0; s < n_states; ++s)
      cells[s] = {static_cast<int>(s)};
    return {n_states, std::move(cells)};
  }

  std::size_t n_states() const { return cell_of_.size(); }
  std::size_t n_cells() const { return cells_.size(); }
  int cell_of(std::size_t state) const { return cell_of_[state]; }
  std::span<const int> members(std::size_t cell) const { return cells_[cell]; }
  const std::vector<std::vector<int>> &cells() const { return cells_; }

private:
  std::vector<std::vector<int>> cells_;
  std::vector<int> cell_of_;
};

struct CostParams
{
  double lambda_p = 0.0; // per-step page probability
  double page_cost = 1.0; // cost per cell searched
  double reg_cost = 1.0;  // cost per registration
  double beta = 0.9;      // discount factor
  int k_max = 1;          // registration is forced at elapsed time k_max + 1

  void validate() const
  {
    if (!(lambda_p >= 0.0 && lambda_p < 1.0))
      throw ValidationError("lambda_p must lie in [0,1)");
    if (!(page_cost > 0.0) || !std::isfinite(page_cost))
      throw ValidationError("page cost must be positive");
    if (!(reg_cost > 0.0) || !std::isfinite(reg_cost))
      throw ValidationError("registration cost must be positive");
    if (!(beta > 0.0 && beta < 1.0))
      throw ValidationError("beta must lie in (0,1)");
    if (k_max < 1)
      throw ValidationError("k_max must be at least 1");
  }
};

class MotionModel
{
public:
  MotionModel(TransitionMatrix P, CellPartition cells, int x0, CostParams params)
      : P_(std::move(P)), cells_(std::move(cells)), x0_(x0), params_(params)
  {
    params_.validate();
    if (cells_.n_states() != P_.size())
      throw ValidationError("cell partition covers " + std::to_string(cells_.n_states()) + " states but P has " +
                            std::to_string(P_.size()));
    if (x0_ < 0 || static_cast<std::size_t>(x0_) >= P_.size())
      throw ValidationError("initial state out of range");
  }

  std::size_t n_states() const { return P_.size(); }
  std::size_t n_cells() const { return cells_.n_cells(); }
  const TransitionMatrix &transitions() const { return P_; }
  const CellPartition &cells() const { return cells_; }
  int x0() const { return x0_; }
  const CostParams &params() const { return params_; }
  int k_max() const { return params_.k_max; }

  // Same motion, different costs or horizon.
  MotionModel with_params(CostParams params) const { return {P_, cells_, x0_, params}; }

private:
  TransitionMatrix P_;
  CellPartition cells_;
  int x0_;
  CostParams params_;
};

// Per-state count of cells searched up to and including the state's cell.
class PagingOrder
{
public:
  PagingOrder() = default;

  PagingOrder(const CellPartition &cells, std::vector<int> rank) : rank_(std::move(rank))
  {
    if (!is_valid(cells, rank_))
      throw ValidationError("paging order vector is not a cell-constant permutation rank");
  }

  // Build from the sequence in which cells are searched.
  static PagingOrder from_cell_sequence(const CellPartition &cells, std::span<const int> sequence)
  {
    if (sequence.size() != cells.n_cells())
      throw ValidationError("cell sequence has wrong length");
    std::vector<int> rank(cells.n_states(), 0);
    for (std::size_t pos = 0; pos < sequence.size(); ++pos)
    {
      int c = sequence[pos];
      if (c < 0 || static_cast<std::size_t>(c) >= cells.n_cells())
        throw ValidationError("cell sequence holds an out-of-range cell");
      for (int s : cells.members(c))
        rank[s] = static_cast<int>(pos) + 1;
    }
    return {cells, std::move(rank)};
  }

  static bool is_valid(const CellPartition &cells, std::span<const int> rank)
  {
    if (rank.size() != cells.n_states())
      return false;
    std::vector<char> seen(cells.n_cells() + 1, 0);
    for (std::size_t c = 0; c < cells.n_cells(); ++c)
    {
      auto members = cells.members(c);
      int r = rank[members.front()];
      if (r < 1 || static_cast<std::size_t>(r) > cells.n_cells() || seen[r])
        return false;
      seen[r] = 1;
      for (int s : members)
        if (rank[s] != r)
          return false;
    }
    return true;
  }

  std::span<const int> ranks() const { return rank_; }
  int operator[](std::size_t state) const { return rank_[state]; }
  bool operator==(const PagingOrder &) const = default;

private:
  std::vector<int> rank_;
};

// Paging reduced-complexity law: order vector for each last report state i0
// and elapsed time k in 1..k_max+1.
class PagingRCL
{
public:
  PagingRCL() = default;

  // Every entry is the ascending-cell-index order.
  PagingRCL(const CellPartition &cells, int k_max) : n_(cells.n_states()), k_max_(k_max)
  {
    std::vector<int> identity(cells.n_cells());
    std::iota(identity.begin(), identity.end(), 0);
    auto order = PagingOrder::from_cell_sequence(cells, identity);
    ranks_.reserve(n_ * levels() * n_);
    for (std::size_t i = 0; i < n_ * levels(); ++i)
      ranks_.insert(ranks_.end(), order.ranks().begin(), order.ranks().end());
  }

  std::size_t n_states() const { return n_; }
  int k_max() const { return k_max_; }

  std::span<const int> order(std::size_t i0, int k) const { return {ranks_.data() + offset(i0, k), n_}; }
  int rank(std::size_t i0, int k, std::size_t l) const { return ranks_[offset(i0, k) + l]; }

  void set(std::size_t i0, int k, const PagingOrder &order)
  {
    std::copy(order.ranks().begin(), order.ranks().end(), ranks_.begin() + static_cast<std::ptrdiff_t>(offset(i0, k)));
  }

  bool operator==(const PagingRCL &) const = default;

private:
  std::size_t levels() const { return static_cast<std::size_t>(k_max_) + 1; }

  std::size_t offset(std::size_t i0, int k) const
  {
    return (i0 * levels() + static_cast<std::size_t>(k - 1)) * n_;
  }

  std::size_t n_ = 0;
  int k_max_ = 0;
  std::vector<int> ranks_;
};

// Registration reduced-complexity law: binary decision per state for each
// (i0, k) with k in 1..k_max. The forced level k_max+1 is implicit.
class RegistrationRCL
{
public:
  RegistrationRCL() = default;

  RegistrationRCL(std::size_t n_states, int k_max, bool value = false)
      : n_(n_states), k_max_(k_max), bits_(n_states * static_cast<std::size_t>(k_max) * n_states, value ? 1 : 0)
  {
  }

  static RegistrationRCL never(const MotionModel &model) { return {model.n_states(), model.k_max(), false}; }
  static RegistrationRCL always(const MotionModel &model) { return {model.n_states(), model.k_max(), true}; }

  // Registers at every state once the elapsed time reaches `k_min`.
  static RegistrationRCL timer(const MotionModel &model, int k_min)
  {
    RegistrationRCL g = never(model);
    for (std::size_t i0 = 0; i0 < g.n_; ++i0)
      for (int k = std::max(k_min, 1); k <= g.k_max_; ++k)
        for (std::size_t l = 0; l < g.n_; ++l)
          g.set(i0, k, l, true);
    return g;
  }

  std::size_t n_states() const { return n_; }
  int k_max() const { return k_max_; }

  bool registers(std::size_t i0, int k, std::size_t l) const
  {
    if (k == k_max_ + 1)
      return true;
    return bits_[offset(i0, k) + l] != 0;
  }

  // Stored decisions; valid for 1 <= k <= k_max.
  std::span<const std::uint8_t> decisions(std::size_t i0, int k) const { return {bits_.data() + offset(i0, k), n_}; }

  void set(std::size_t i0, int k, std::size_t l, bool value) { bits_[offset(i0, k) + l] = value ? 1 : 0; }

  void set(std::size_t i0, int k, std::span<const std::uint8_t> d)
  {
    std::copy(d.begin(), d.end(), bits_.begin() + static_cast<std::ptrdiff_t>(offset(i0, k)));
  }

  bool operator==(const RegistrationRCL &) const = default;

private:
  std::size_t offset(std::size_t i0, int k) const
  {
    return (i0 * static_cast<std::size_t>(k_max_) + static_cast<std::size_t>(k - 1)) * n_;
  }

  std::size_t n_ = 0;
  int k_max_ = 0;
  std::vector<std::uint8_t> bits_;
};

// ---------------------------------------------------------------------------
// Builders

struct TorusSpec
{
  int i_max = 2;
  int j_max = 2;
  double p_stay = 1.0;
  double p_up = 0.0;
  double p_down = 0.0;
  double p_left = 0.0;
  double p_right = 0.0;
  int x0_i = 0;
  int x0_j = 0;
};

// State index of torus cell (i, j); i is the horizontal coordinate.
inline int torus_state(const TorusSpec &spec, int i, int j) { return j * spec.i_max + i; }

// Wrapped i_max x j_max grid, one state per cell.
inline MotionModel build_torus(const TorusSpec &spec, const CostParams &params)
{
  if (spec.i_max < 2 || spec.j_max < 2)
    throw ValidationError("torus dimensions must be at least 2");
  double probs[] = {spec.p_stay, spec.p_up, spec.p_down, spec.p_left, spec.p_right};
  double total = 0.0;
  for (double p : probs)
  {
    if (!(p >= 0.0))
      throw ValidationError("torus motion probabilities must be nonnegative");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError("torus motion probabilities sum to " + std::to_string(total));
  if (spec.x0_i < 0 || spec.x0_i >= spec.i_max || spec.x0_j < 0 || spec.x0_j >= spec.j_max)
    throw ValidationError("torus initial cell out of range");

  auto n = static_cast<std::size_t>(spec.i_max * spec.j_max);
  std::vector<double> P(n * n, 0.0);
  auto wrap = [](int v, int m) { return ((v % m) + m) % m; };
  for (int j = 0; j < spec.j_max; ++j)
    for (int i = 0; i < spec.i_max; ++i)
    {
      auto from = static_cast<std::size_t>(torus_state(spec, i, j));
      auto add = [&](int ti, int tj, double p) {
        auto to = static_cast<std::size_t>(torus_state(spec, wrap(ti, spec.i_max), wrap(tj, spec.j_max)));
        P[from * n + to] += p;
      };
      add(i, j, spec.p_stay);
      add(i, j + 1, spec.p_up);
      add(i, j - 1, spec.p_down);
      add(i - 1, j, spec.p_left);
      add(i + 1, j, spec.p_right);
    }
  return {TransitionMatrix(n, std::move(P)), CellPartition::singletons(n), torus_state(spec, spec.x0_i, spec.x0_j),
          params};
}

// Five-state example: 0 -> 1 (0.4) or 3 (0.6), then 1 -> 2 -> 0 and 3 -> 4 -> 0.
// Cells {0}, {1,2}, {3,4}. Every path returns to 0 after three steps.
inline MotionModel build_simple_example(double lambda_p, double page_cost, double reg_cost, double beta, int k_max = 3)
{
  constexpr std::size_t n = 5;
  std::vector<double> P(n * n, 0.0);
  P[0 * n + 1] = 0.4;
  P[0 * n + 3] = 0.6;
  P[1 * n + 2] = 1.0;
  P[2 * n + 0] = 1.0;
  P[3 * n + 4] = 1.0;
  P[4 * n + 0] = 1.0;
  CellPartition cells(n, {{0}, {1, 2}, {3, 4}});
  return {TransitionMatrix(n, std::move(P)), std::move(cells), 0, CostParams{lambda_p, page_cost, reg_cost, beta, k_max}};
}

// Truncated symmetric random walk on {-half_width, ..., half_width}. State s
// is position s - half_width; `center` is the state of position 0.
struct WalkModel
{
  MotionModel model;
  FiniteDistribution kernel;
  int half_width;

  int center() const { return half_width; }
  int position(std::size_t state) const { return static_cast<int>(state) - half_width; }
};

inline bool is_symmetric_unimodal(const FiniteDistribution &b, double tol = 1e-12)
{
  int m = std::max(std::abs(b.lowest()), std::abs(b.highest()));
  for (int i = 0; i <= m; ++i)
  {
    if (std::abs(b[i] - b[-i]) > tol)
      return false;
    if (i > 0 && b[i] > b[i - 1] + tol)
      return false;
  }
  return true;
}

inline WalkModel build_symmetric_walk(int half_width, const FiniteDistribution &b, const CostParams &params)
{
  params.validate();
  if (!is_symmetric_unimodal(b))
    throw ValidationError("walk kernel must be symmetric and unimodal");
  int m = b.reach();
  if (half_width < 1 || half_width < params.k_max * m)
    throw ValidationError("half_width " + std::to_string(half_width) + " is below k_max * reach = " +
                          std::to_string(params.k_max * m));

  auto n = static_cast<std::size_t>(2 * half_width + 1);
  std::vector<double> P(n * n, 0.0);
  for (int s = 0; s < static_cast<int>(n); ++s)
    for (int d = b.lowest(); d <= b.highest(); ++d)
    {
      // Mass that would leave the window stays on the edge state.
      int to = std::clamp(s + d, 0, static_cast<int>(n) - 1);
      P[static_cast<std::size_t>(s) * n + static_cast<std::size_t>(to)] += b[d];
    }
  MotionModel model(TransitionMatrix(n, std::move(P)), CellPartition::singletons(n), half_width, params);
  return {std::move(model), b, half_width};
}

} // namespace pagereg
