#pragma once

#include <stdexcept>
#include <string>

namespace cbandits {

/// An estimator was queried with no matching records.
struct NoDataError : std::runtime_error {
  explicit NoDataError(const std::string& what) : std::runtime_error(what) {}
};

/// A separating-set index was requested while some effective-domain value
/// has no pooled data; the caller should skip the set this round.
struct IncompleteSupportError : std::runtime_error {
  explicit IncompleteSupportError(const std::string& what) : std::runtime_error(what) {}
};

/// An exact computation would exceed the configured state-space cap.
struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cbandits
