#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace jumpcurve {

// States live on the nonnegative integers. Product-space points are encoded
// into a single integer with a fixed radix per coordinate.
using State = std::int64_t;

// Real-valued function of the state, used as test function / observable.
using Observable = std::function<double(State)>;

// A measure, generator table or weight table was asked for a state it cannot
// represent and no extension rule was declared.
struct TableRangeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// The chain failed the ergodicity screen (normalizer diverges or the
// non-explosion series looks summable).
struct NonErgodicError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Probability mass escaped the working truncation beyond the tolerance.
struct TruncationError : std::runtime_error {
  TruncationError(const std::string& what, State suggested)
      : std::runtime_error(what), suggested_truncation(suggested) {}
  State suggested_truncation;
};

// A scanned supremum (jump second moment, weight ratio bound) keeps growing
// toward the end of the scan window; no finite constant can be certified.
struct DivergentConstantError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A simulated path exceeded the jump-count ceiling before the horizon.
struct ExplosionSuspectError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace jumpcurve
