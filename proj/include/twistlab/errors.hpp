// Exception hierarchy shared by all twistlab modules.
#pragma once

#include <stdexcept>
#include <string>

namespace twistlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define TWISTLAB_DEFINE_ERROR(Name)                                 \
  class Name : public Error {                                       \
   public:                                                          \
    using Error::Error;                                             \
    const char* kind() const noexcept override { return #Name; }    \
  };

TWISTLAB_DEFINE_ERROR(NotAPermutation)
TWISTLAB_DEFINE_ERROR(DisconnectedSurface)
TWISTLAB_DEFINE_ERROR(EvenGridSize)
TWISTLAB_DEFINE_ERROR(NoConvergence)
TWISTLAB_DEFINE_ERROR(LambdaOutOfRange)
TWISTLAB_DEFINE_ERROR(InsufficientBasis)
TWISTLAB_DEFINE_ERROR(RankAmbiguous)
TWISTLAB_DEFINE_ERROR(LsqNoConvergence)
TWISTLAB_DEFINE_ERROR(DimensionMismatch)
TWISTLAB_DEFINE_ERROR(BoundaryDivergence)
TWISTLAB_DEFINE_ERROR(SingularHit)
TWISTLAB_DEFINE_ERROR(BumpOverlapsSection)
TWISTLAB_DEFINE_ERROR(Unsupported)
TWISTLAB_DEFINE_ERROR(ParseError)
TWISTLAB_DEFINE_ERROR(ConfigError)
TWISTLAB_DEFINE_ERROR(CacheError)

#undef TWISTLAB_DEFINE_ERROR

}  // namespace twistlab
