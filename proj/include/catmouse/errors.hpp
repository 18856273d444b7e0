#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace catmouse {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structural problem with a kernel; `states` lists the offending indices.
struct ChainError : Error {
  ChainError(const std::string& what, std::vector<std::size_t> offending = {})
      : Error(what), states(std::move(offending)) {}
  std::vector<std::size_t> states;
};

struct SolveError : Error {
  SolveError(const std::string& what, double rcond_estimate)
      : Error(what), rcond(rcond_estimate) {}
  double rcond;
};

// An experiment declared more work than the configured cap allows.
struct BudgetExceeded : Error {
  BudgetExceeded(const std::string& what, double declared_steps, double cap_steps)
      : Error(what), declared(declared_steps), cap(cap_steps) {}
  double declared;
  double cap;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace catmouse
