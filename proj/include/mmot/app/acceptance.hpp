#pragma once

#include <string>

#include "mmot/app/io.hpp"

namespace mmot::acceptance {

inline constexpr int kCriteria = 10;

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string summary;  // one line, human readable
  io::json detail;      // machine-readable evidence
};

// Runs criterion `id` (1..10) with its fixed seed. Throws InvalidArgument for
// an unknown id.
CriterionResult run_criterion(int id);

}  // namespace mmot::acceptance
