#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gapsched {

// A problem size exceeded the configured cap for an operation.
class CapExceeded : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The iterative eigensolver ran out of basis space before reaching the
// requested residual tolerance. Never degrades to a silent inaccuracy.
class EigensolverDidNotConverge : public std::runtime_error {
 public:
  EigensolverDidNotConverge(const std::string& msg, int basis_used)
      : std::runtime_error(msg), basis_used_(basis_used) {}
  int basis_used() const { return basis_used_; }

 private:
  int basis_used_;
};

// A fitted gap curve touches zero or dips below it somewhere on [0,1].
// The gap appears in a denominator, so this is reported, never floored.
class CurveNotPositive : public std::runtime_error {
 public:
  CurveNotPositive(std::vector<double> ordinates, double min_value, double at_s)
      : std::runtime_error("fitted curve is non-positive: min value " +
                           std::to_string(min_value) + " at s = " +
                           std::to_string(at_s)),
        ordinates_(std::move(ordinates)),
        min_value_(min_value),
        at_s_(at_s) {}
  const std::vector<double>& ordinates() const { return ordinates_; }
  double min_value() const { return min_value_; }
  double at_s() const { return at_s_; }

 private:
  std::vector<double> ordinates_;
  double min_value_;
  double at_s_;
};

// An objective returned NaN or infinity; carries the offending parameters.
class NonFiniteObjective : public std::runtime_error {
 public:
  explicit NonFiniteObjective(std::vector<double> params)
      : std::runtime_error("objective returned a non-finite value"),
        params_(std::move(params)) {}
  const std::vector<double>& params() const { return params_; }

 private:
  std::vector<double> params_;
};

// Bad or missing experiment configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gapsched
