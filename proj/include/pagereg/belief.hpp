#pragma once

#include "errors.hpp"
#include "model.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pagereg
{

// Network's conditional distribution of the mobile's state.
using Belief = std::vector<double>;

inline constexpr double kSurvivalFloor = 1e-15;

inline Belief point_mass(std::size_t n, std::size_t at)
{
  Belief w(n, 0.0);
  w[at] = 1.0;
  return w;
}

inline bool is_valid_belief(std::span<const double> w, double tol = 1e-12)
{
  double total = 0.0;
  for (double x : w)
  {
    if (!(x >= 0.0))
      return false;
    total += x;
  }
  return std::abs(total - 1.0) <= tol;
}

// Row vector times matrix: distribution after one move.
inline std::vector<double> propagate(std::span<const double> w, const TransitionMatrix &P)
{
  std::vector<double> out(P.size(), 0.0);
  for (std::size_t j = 0; j < P.size(); ++j)
  {
    if (w[j] == 0.0)
      continue;
    for (const auto &t : P.row(j))
      out[static_cast<std::size_t>(t.to)] += w[j] * t.prob;
  }
  return out;
}

// Conditional distribution after one move given no report, when the mobile
// registers at state l with probability d[l]. Throws ZeroSurvivalMass when the
// no-report branch has probability zero.
template <typename Decision>
Belief phi_update(std::span<const double> w, std::span<const Decision> d, const TransitionMatrix &P)
{
  if (w.size() != P.size() || d.size() != P.size())
    throw ValidationError("belief update dimension mismatch");
  Belief out = propagate(w, P);
  double total = 0.0;
  for (std::size_t l = 0; l < out.size(); ++l)
  {
    double dl = static_cast<double>(d[l]);
    if (!(dl >= 0.0 && dl <= 1.0))
      throw ValidationError("registration decision outside [0,1]");
    out[l] *= 1.0 - dl;
    total += out[l];
  }
  if (total <= kSurvivalFloor)
    throw ZeroSurvivalMass("no-report probability is " + std::to_string(total));
  double rescale = 0.0;
  for (double &x : out)
  {
    x /= total;
    if (x < kSurvivalFloor)
      x = 0.0;
    rescale += x;
  }
  for (double &x : out)
    x /= rescale;
  return out;
}

inline Belief phi_update(std::span<const double> w, std::span<const double> d, const TransitionMatrix &P)
{
  return phi_update<double>(w, d, P);
}

// Beliefs w(i0, 0..k_max) between reports, starting from a report at i0.
struct BeliefPath
{
  std::vector<Belief> beliefs;
  // Set when the no-report branch becomes impossible: beliefs then stop at
  // index *truncated_at - 1 and elapsed times >= *truncated_at are unreachable.
  std::optional<int> truncated_at;

  int last() const { return static_cast<int>(beliefs.size()) - 1; }
};

// w(i0,0) = delta(i0), w(i0,k) = Phi(w(i0,k-1), g(i0,k)).
inline BeliefPath belief_recursion(const MotionModel &model, const RegistrationRCL &g, std::size_t i0)
{
  BeliefPath path;
  path.beliefs.push_back(point_mass(model.n_states(), i0));
  for (int k = 1; k <= model.k_max(); ++k)
  {
    try
    {
      path.beliefs.push_back(phi_update<std::uint8_t>(path.beliefs.back(), g.decisions(i0, k), model.transitions()));
    }
    catch (const ZeroSurvivalMass &)
    {
      path.truncated_at = k;
      break;
    }
  }
  return path;
}

} // namespace pagereg
