#pragma once

#include <stdexcept>
#include <string>

namespace trajnav {

// Base of every error raised by the library. Subclasses name the contract
// that was broken so callers (and the CLI) can map them to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TRAJNAV_DEFINE_ERROR(Name) \
  class Name : public Error {      \
   public:                         \
    using Error::Error;            \
  }

TRAJNAV_DEFINE_ERROR(DimensionError);
TRAJNAV_DEFINE_ERROR(IndexError);
TRAJNAV_DEFINE_ERROR(InvariantError);
TRAJNAV_DEFINE_ERROR(CacheError);
TRAJNAV_DEFINE_ERROR(ConfigError);
TRAJNAV_DEFINE_ERROR(OptimizerError);
TRAJNAV_DEFINE_ERROR(CheckpointError);
TRAJNAV_DEFINE_ERROR(LookupError);
TRAJNAV_DEFINE_ERROR(GenerationError);
TRAJNAV_DEFINE_ERROR(SamplingError);
TRAJNAV_DEFINE_ERROR(SpeakerError);
TRAJNAV_DEFINE_ERROR(VocabError);
TRAJNAV_DEFINE_ERROR(ContractError);
TRAJNAV_DEFINE_ERROR(IntegrityError);
TRAJNAV_DEFINE_ERROR(RoutingError);
TRAJNAV_DEFINE_ERROR(MetricsError);
TRAJNAV_DEFINE_ERROR(IoError);

#undef TRAJNAV_DEFINE_ERROR

}  // namespace trajnav
