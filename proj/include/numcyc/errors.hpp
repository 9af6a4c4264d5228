#pragma once

#include <stdexcept>
#include <string>

namespace numcyc {

// Exit-code classes used by the command line front end.
enum class ErrorClass { Input = 2, Precision = 3, Cap = 4, Failure = 1 };

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), cls_(cls) {}
  ErrorClass error_class() const { return cls_; }

 private:
  ErrorClass cls_;
};

#define NUMCYC_ERROR(Name, Cls)                                             \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& what) : Error(ErrorClass::Cls, what) {} \
  };

NUMCYC_ERROR(PrecisionUnreachable, Precision)
NUMCYC_ERROR(CapExceeded, Cap)
NUMCYC_ERROR(InvalidInput, Input)
NUMCYC_ERROR(ZeroVector, Input)
NUMCYC_ERROR(DimensionMismatch, Input)
NUMCYC_ERROR(InvalidPrimes, Input)
NUMCYC_ERROR(ConvergenceFailure, Failure)
NUMCYC_ERROR(EigensolveFailure, Failure)
NUMCYC_ERROR(CalibrationFailure, Failure)
NUMCYC_ERROR(OutOfCalibratedRegion, Input)
NUMCYC_ERROR(SearchExhausted, Cap)
NUMCYC_ERROR(Unreachable, Input)
NUMCYC_ERROR(ScheduleOverflow, Cap)
NUMCYC_ERROR(SingularConfiguration, Input)
NUMCYC_ERROR(LeftRegion, Failure)

#undef NUMCYC_ERROR

}  // namespace numcyc
