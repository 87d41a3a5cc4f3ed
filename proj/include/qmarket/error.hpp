#pragma once

#include <stdexcept>
#include <string>

namespace qmarket {

/// Malformed or out-of-range input to an operation.
class InputError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A bid that violates the active mechanism. Carries the offending GENCO.
class ValidationError : public InputError {
  public:
    ValidationError(int genco_id, const std::string &what)
        : InputError("genco " + std::to_string(genco_id) + ": " + what),
          genco_id_(genco_id) {}

    int genco_id() const noexcept { return genco_id_; }

  private:
    int genco_id_;
};

} // namespace qmarket
