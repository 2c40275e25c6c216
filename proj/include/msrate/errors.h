#pragma once

#include <stdexcept>
#include <string>

namespace msrate {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MSRATE_DECLARE_ERROR(Name)            \
  class Name : public Error {                 \
   public:                                    \
    using Error::Error;                       \
  }

MSRATE_DECLARE_ERROR(InvalidArgument);
MSRATE_DECLARE_ERROR(NumericalFailure);
MSRATE_DECLARE_ERROR(NotPositiveDefinite);
MSRATE_DECLARE_ERROR(NotPsd);
MSRATE_DECLARE_ERROR(DimensionMismatch);
MSRATE_DECLARE_ERROR(ParseError);
MSRATE_DECLARE_ERROR(InvalidSigma);
MSRATE_DECLARE_ERROR(Degenerate);
MSRATE_DECLARE_ERROR(DegenerateTrace);
MSRATE_DECLARE_ERROR(ConfigError);
MSRATE_DECLARE_ERROR(NoConvergedStage);
MSRATE_DECLARE_ERROR(OracleNonConvergence);
MSRATE_DECLARE_ERROR(NonPositiveEnergy);

#undef MSRATE_DECLARE_ERROR

}  // namespace msrate
