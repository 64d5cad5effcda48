#pragma once

#include <stdexcept>
#include <string>

namespace mtlse {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MTLSE_DEFINE_ERROR(Name)            \
  class Name : public Error {               \
   public:                                  \
    using Error::Error;                     \
  }

MTLSE_DEFINE_ERROR(InputTooShort);
MTLSE_DEFINE_ERROR(FilterbankDegenerate);
MTLSE_DEFINE_ERROR(FormatError);
MTLSE_DEFINE_ERROR(ShapeError);
MTLSE_DEFINE_ERROR(DegenerateBatch);
MTLSE_DEFINE_ERROR(LabelError);
MTLSE_DEFINE_ERROR(NumericalError);
MTLSE_DEFINE_ERROR(ConfigError);
MTLSE_DEFINE_ERROR(InputError);
MTLSE_DEFINE_ERROR(SpecError);

#undef MTLSE_DEFINE_ERROR

}  // namespace mtlse
