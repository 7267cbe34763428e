#pragma once

#include <stdexcept>
#include <string>

namespace relcoh {

enum class ErrorCode {
  invalid_domain,
  invalid_point,
  invalid_argument,
  empty_partition,
  out_of_range,
  diverged,
  parse,
  empty_matrix,
  empty_selection,
  convergence,
  undefined_ratio,
  no_split,
  undefined_measure,
  advisory,
  validation,
  io,
};

const char* to_string(ErrorCode code) noexcept;

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace relcoh
