#pragma once

#include <stdexcept>
#include <string>

namespace eqweyl {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define EQWEYL_DEFINE_ERROR(Name)          \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

EQWEYL_DEFINE_ERROR(UnknownModel);
EQWEYL_DEFINE_ERROR(InvalidModel);
EQWEYL_DEFINE_ERROR(NoExactBackend);
EQWEYL_DEFINE_ERROR(SpectrumCapExceeded);
EQWEYL_DEFINE_ERROR(MixedParameters);
EQWEYL_DEFINE_ERROR(NonRegularValue);
EQWEYL_DEFINE_ERROR(ZeroShell);
EQWEYL_DEFINE_ERROR(ShoulderTooWide);
EQWEYL_DEFINE_ERROR(InsufficientSpectrum);
EQWEYL_DEFINE_ERROR(ValidationError);

#undef EQWEYL_DEFINE_ERROR

/// Inverse iteration did not converge for eigenvalue `index` of a mode.
class EigvecFailure : public Error {
 public:
  EigvecFailure(std::size_t index, const std::string& what)
      : Error(what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace eqweyl
