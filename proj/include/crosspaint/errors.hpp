#pragma once

#include <stdexcept>
#include <string>

namespace crosspaint {

// Base for every error raised by the library. Each subclass maps to one named
// failure in the public contract so callers can catch precisely.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CROSSPAINT_DEFINE_ERROR(Name)   \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  }

// kinematics
CROSSPAINT_DEFINE_ERROR(MalformedDescription);
CROSSPAINT_DEFINE_ERROR(BranchingChain);
CROSSPAINT_DEFINE_ERROR(MissingLimit);
CROSSPAINT_DEFINE_ERROR(ConfigLengthMismatch);

// replay
CROSSPAINT_DEFINE_ERROR(FractionOutOfRange);
CROSSPAINT_DEFINE_ERROR(EmptyTrajectory);

// render
CROSSPAINT_DEFINE_ERROR(MeshLoadFailure);

// images and masks
CROSSPAINT_DEFINE_ERROR(DimensionMismatch);
CROSSPAINT_DEFINE_ERROR(BadKernel);
CROSSPAINT_DEFINE_ERROR(ImageIoError);

// inpaint
CROSSPAINT_DEFINE_ERROR(EmptySequence);
CROSSPAINT_DEFINE_ERROR(ToolLaunchFailure);
CROSSPAINT_DEFINE_ERROR(ProtocolViolation);

// composite
CROSSPAINT_DEFINE_ERROR(LengthMismatch);

// pipeline
CROSSPAINT_DEFINE_ERROR(EmptyDataset);
CROSSPAINT_DEFINE_ERROR(InvalidContainer);
CROSSPAINT_DEFINE_ERROR(ConfigError);
CROSSPAINT_DEFINE_ERROR(OutputWriteError);

#undef CROSSPAINT_DEFINE_ERROR

}  // namespace crosspaint
