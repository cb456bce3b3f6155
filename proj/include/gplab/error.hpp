#pragma once

#include <stdexcept>
#include <string>

namespace gplab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define GPLAB_ERROR_KIND(Name)             \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  };

GPLAB_ERROR_KIND(UnsupportedSpec)
GPLAB_ERROR_KIND(CholeskyFailure)
GPLAB_ERROR_KIND(SingularGram)
GPLAB_ERROR_KIND(SolveFailure)
GPLAB_ERROR_KIND(DomainError)
GPLAB_ERROR_KIND(IncompatibleSpecs)
GPLAB_ERROR_KIND(Infeasible)
GPLAB_ERROR_KIND(BracketFailure)
GPLAB_ERROR_KIND(RangeError)
GPLAB_ERROR_KIND(ConfigError)

#undef GPLAB_ERROR_KIND

}  // namespace gplab
