#ifndef PENCIL_ERRORS_HPP
#define PENCIL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pencil {

// Base for all hard failures. kind() is stable and machine-parsable; the CLI
// maps kinds to exit codes.
class Error : public std::runtime_error {
public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(msg), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

private:
  std::string kind_;
};

#define PENCIL_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                       \
  public:                                                           \
    explicit Name(const std::string& msg) : Error(#Name, msg) {}    \
  }

PENCIL_DEFINE_ERROR(ParseError);
PENCIL_DEFINE_ERROR(ValidationError);
PENCIL_DEFINE_ERROR(DomainError);
PENCIL_DEFINE_ERROR(StepFailure);
PENCIL_DEFINE_ERROR(NonFinite);
PENCIL_DEFINE_ERROR(ScanExhausted);
PENCIL_DEFINE_ERROR(BoundaryRoot);
PENCIL_DEFINE_ERROR(SpecMismatch);
PENCIL_DEFINE_ERROR(UnboundedKernel);
PENCIL_DEFINE_ERROR(AllDiverged);

#undef PENCIL_DEFINE_ERROR

}  // namespace pencil

#endif
