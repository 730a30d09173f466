#pragma once

#include <stdexcept>
#include <string>

namespace pagereg
{

class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Model, policy or configuration data violates an invariant.
class ValidationError : public Error
{
public:
  explicit ValidationError(const std::string &what) : Error("validation: " + what) {}
};

// The no-report branch of a belief update has zero probability, so the
// conditional distribution is undefined.
class ZeroSurvivalMass : public Error
{
public:
  explicit ZeroSurvivalMass(const std::string &what) : Error("zero survival mass: " + what) {}
};

class NonConvergence : public Error
{
public:
  explicit NonConvergence(const std::string &what) : Error("no convergence: " + what) {}
};

class CapExceeded : public Error
{
public:
  explicit CapExceeded(const std::string &what) : Error("cap exceeded: " + what) {}
};

} // namespace pagereg
