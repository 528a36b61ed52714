#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rigidfield {

/// Precondition violated by the caller (bad dimensions, non-finite data,
/// under-resolved grids, malformed configs).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative method failed to reach its tolerance. Carries the last
/// iterate when one is available.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what,
                            std::vector<double> last_iterate = {})
      : std::runtime_error(what), last_iterate_(std::move(last_iterate)) {}

  const std::vector<double>& last_iterate() const { return last_iterate_; }

 private:
  std::vector<double> last_iterate_;
};

/// Field file whose header and payload disagree.
class CorruptFile : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Internal consistency check tripped; indicates a kernel bug.
class InconsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace rigidfield
