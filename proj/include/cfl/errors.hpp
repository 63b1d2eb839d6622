#pragma once

#include <stdexcept>
#include <string>

namespace cfl {

/// Error taxonomy shared by the library and the CLI.
///
/// Every error belongs to one of three kinds, which the CLI maps to
/// process exit codes:
///   validation -> 2   (malformed input, bad dimensions, misuse)
///   infeasible -> 3   (negative certificate: restriction violated,
///                      infeasible marginals, empty propensity cell)
///   guard      -> 4   (enumeration guard exceeded)
class Error : public std::runtime_error {
 public:
  enum class Kind { validation, infeasible, guard };

  Error(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

  int exit_code() const {
    switch (kind_) {
      case Kind::validation: return 2;
      case Kind::infeasible: return 3;
      case Kind::guard: return 4;
    }
    return 2;
  }

 private:
  Kind kind_;
};

struct ValidationError : Error {
  explicit ValidationError(const std::string& what) : Error(Kind::validation, what) {}
};

struct InfeasibleError : Error {
  explicit InfeasibleError(const std::string& what) : Error(Kind::infeasible, what) {}
};

struct GuardError : Error {
  explicit GuardError(const std::string& what) : Error(Kind::guard, what) {}
};

// Validation (exit 2)
struct MalformedRationalError final : ValidationError { using ValidationError::ValidationError; };
struct BadDimensionsError final : ValidationError { using ValidationError::ValidationError; };
struct MissingEntryError final : ValidationError { using ValidationError::ValidationError; };
struct DuplicateEntryError final : ValidationError { using ValidationError::ValidationError; };
struct SchemaError final : ValidationError { using ValidationError::ValidationError; };
struct MissingParamError final : ValidationError { using ValidationError::ValidationError; };
struct ConstraintViolatedError final : ValidationError { using ValidationError::ValidationError; };
struct DimensionMismatchError final : ValidationError { using ValidationError::ValidationError; };
struct OutcomeNotBinaryError final : ValidationError { using ValidationError::ValidationError; };
struct DecisionNotBinaryError final : ValidationError { using ValidationError::ValidationError; };
struct DecisionBinaryError final : ValidationError { using ValidationError::ValidationError; };
struct NeedExtendedViewError final : ValidationError { using ValidationError::ValidationError; };
struct NeedExactLossError final : ValidationError { using ValidationError::ValidationError; };
struct PreconditionError final : ValidationError { using ValidationError::ValidationError; };

// Infeasibility / negative certificates (exit 3)
struct RestrictionViolatedError final : InfeasibleError { using InfeasibleError::InfeasibleError; };
struct InfeasibleMarginalsError final : InfeasibleError { using InfeasibleError::InfeasibleError; };
struct EmptyPropensityCellError final : InfeasibleError { using InfeasibleError::InfeasibleError; };

// Guards (exit 4)
struct TooLargeError final : GuardError { using GuardError::GuardError; };
struct SearchSpaceTooLargeError final : GuardError { using GuardError::GuardError; };

}  // namespace cfl
