#pragma once

#include <stdexcept>

namespace qsurf {

// Resource-limit failures (enumeration nodes, subspace-search vector budget,
// brute-force cell budget).  Kept distinct from invalid-input errors so the
// command line tool can map them to its own exit code.
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qsurf
