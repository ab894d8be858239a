#pragma once

#include <stdexcept>
#include <string>

namespace syrlab {

/// Base of every error raised by the library. The CLI maps the category to
/// an exit code.
class Error : public std::runtime_error {
 public:
  enum class Category { Argument, Budget, Invariant };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

#define SYRLAB_DEFINE_ERROR(Name, Cat)                                   \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& what)                               \
        : Error(Category::Cat, std::string(#Name ": ") + what) {}        \
  }

// Precondition failures on caller-supplied values.
SYRLAB_DEFINE_ERROR(ZeroInput, Argument);
SYRLAB_DEFINE_ERROR(BadLevel, Argument);
SYRLAB_DEFINE_ERROR(BadParameter, Argument);
SYRLAB_DEFINE_ERROR(SpaceMismatch, Argument);
SYRLAB_DEFINE_ERROR(EmptyRange, Argument);
SYRLAB_DEFINE_ERROR(OutOfStrip, Argument);
SYRLAB_DEFINE_ERROR(UnsupportedB, Argument);
SYRLAB_DEFINE_ERROR(BadEps, Argument);

// Work or memory would exceed the configured budget.
SYRLAB_DEFINE_ERROR(LevelTooLarge, Budget);
SYRLAB_DEFINE_ERROR(BudgetExceeded, Budget);
SYRLAB_DEFINE_ERROR(WindowTooLarge, Budget);
SYRLAB_DEFINE_ERROR(CapExceeded, Budget);

// An internal consistency check failed.
SYRLAB_DEFINE_ERROR(InvariantViolation, Invariant);

#undef SYRLAB_DEFINE_ERROR

}  // namespace syrlab
