#pragma once

#include <stdexcept>
#include <string>

namespace bisectd {

// Closure exceeded its bisection budget. Usually means the seed violates the
// admissibility condition on initial triangulations; the budget itself is an
// engineering cap, not a theoretical bound.
struct BudgetExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A refinement that must not require closure (uniform steps, aux rounds)
// produced a hanging vertex.
struct NeedsClosure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An internal consistency check failed; if triggered on valid input this
// falsifies an invariant the implementation relies on.
struct InvariantViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// Malformed or rejected input document.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bisectd
