#pragma once

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace pagereg
{

// Probability mass on a contiguous block of integers starting at `offset`.
// Mass outside [offset, offset + size) is zero.
class FiniteDistribution
{
public:
  FiniteDistribution() : offset_(0), mass_{1.0} {}

  FiniteDistribution(int offset, std::vector<double> mass) : offset_(offset), mass_(std::move(mass))
  {
    if (mass_.empty())
      throw ValidationError("distribution has empty support");
    double total = 0.0;
    for (double m : mass_)
    {
      if (!(m >= 0.0))
        throw ValidationError("distribution has a negative or NaN mass");
      total += m;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw ValidationError("distribution masses sum to " + std::to_string(total));
  }

  static FiniteDistribution point(int at) { return {at, {1.0}}; }

  // Symmetric kernel given by its masses on {-m, ..., m}.
  static FiniteDistribution centered(std::vector<double> mass)
  {
    if (mass.size() % 2 == 0)
      throw ValidationError("centered distribution needs an odd number of masses");
    int m = static_cast<int>(mass.size() / 2);
    return {-m, std::move(mass)};
  }

  int offset() const { return offset_; }
  int lowest() const { return offset_; }
  int highest() const { return offset_ + static_cast<int>(mass_.size()) - 1; }
  std::size_t size() const { return mass_.size(); }
  std::span<const double> masses() const { return mass_; }

  double operator[](int i) const
  {
    if (i < lowest() || i > highest())
      return 0.0;
    return mass_[static_cast<std::size_t>(i - offset_)];
  }

  // Largest |i| with nonzero mass.
  int reach() const
  {
    int r = 0;
    for (int i = lowest(); i <= highest(); ++i)
      if ((*this)[i] > 0.0)
        r = std::max(r, std::abs(i));
    return r;
  }

private:
  int offset_;
  std::vector<double> mass_;
};

} // namespace pagereg
