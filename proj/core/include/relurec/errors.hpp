#pragma once

#include <stdexcept>
#include <string>

namespace relurec {

enum class ErrorCode {
  invalid_input,
  invalid_shape,
  degenerate_stack,
  accuracy_not_reached,
  size_limit,
  rank_deficient,
  missing_plant,
  degenerate_plant,
  infeasible,
  inconsistent_solution,
  schema,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Quadrature that could not reach its target carries the bound it did reach.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double achieved)
      : Error(ErrorCode::accuracy_not_reached, what), achieved_(achieved) {}
  double achieved_bound() const noexcept { return achieved_; }

 private:
  double achieved_;
};

}  // namespace relurec
