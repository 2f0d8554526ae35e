#pragma once

#include <stdexcept>
#include <string>

namespace spinswap {

// Base class for every error raised by the toolkit. Each subclass maps to one
// failure mode so callers (and the CLI) can report it by name.
class Error : public std::runtime_error {
 public:
  Error(const std::string& kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), kind_(kind) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define SPINSWAP_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(#Name, what) {}    \
  }

// spin algebra
SPINSWAP_DEFINE_ERROR(NotWernerForm);
SPINSWAP_DEFINE_ERROR(DimensionOverflow);
SPINSWAP_DEFINE_ERROR(BadSubsystemSet);
SPINSWAP_DEFINE_ERROR(ZeroProbability);
SPINSWAP_DEFINE_ERROR(DomainError);

// sequences and grids
SPINSWAP_DEFINE_ERROR(LengthMismatch);
SPINSWAP_DEFINE_ERROR(GridMismatch);

// deterministic solvers
SPINSWAP_DEFINE_ERROR(StabilityViolation);
SPINSWAP_DEFINE_ERROR(NegativeDensity);
SPINSWAP_DEFINE_ERROR(ZeroDensity);

// stochastic simulator and statistics
SPINSWAP_DEFINE_ERROR(ConfigError);
SPINSWAP_DEFINE_ERROR(DeadRadical);
SPINSWAP_DEFINE_ERROR(RegistryCorrupt);
SPINSWAP_DEFINE_ERROR(NoTripletEvents);
SPINSWAP_DEFINE_ERROR(InsufficientEvents);

#undef SPINSWAP_DEFINE_ERROR

}  // namespace spinswap
