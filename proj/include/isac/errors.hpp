#pragma once

#include <stdexcept>
#include <string>

namespace isac {

// Raised when an iterative numeric routine (quadrature, series, continued
// fraction) exhausts its budget before reaching its tolerance.  Callers that
// cannot recover should surface this as a distinct failure class rather than
// folding it into invalid-input errors.
class convergence_error : public std::runtime_error {
 public:
  explicit convergence_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace isac
