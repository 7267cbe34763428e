#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "relcoh/pipeline.hpp"

namespace relcoh {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool ok() const;
  const CheckResult* find(const std::string& name) const;
};

/// Invariant checks on a loaded bundle:
///   matrix-nonnegative, row-conservation, closed-outflow, tree-nesting,
///   tree-labels, stopping-soundness, rho-recomputation, cell-labels.
VerifyReport verify_bundle(const LoadedBundle& bundle);

/// Loads the bundle directory first; throws ErrorCode::io when it cannot be
/// read.
VerifyReport verify_bundle(const std::string& dir);

void write_report(std::ostream& out, const VerifyReport& report);

}  // namespace relcoh
