#pragma once

#include <stdexcept>
#include <string>

namespace bcnn {

// Root of every error thrown by the library. Subclasses name the failure class
// so callers (and the CLI exit-code mapping) can react without parsing text.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

#define BCNN_DEFINE_ERROR(Name)                                                \
  class Name : public Error {                                                  \
  public:                                                                      \
    using Error::Error;                                                        \
  }

BCNN_DEFINE_ERROR(DimensionError);
BCNN_DEFINE_ERROR(IndexError);
BCNN_DEFINE_ERROR(NumericError);
BCNN_DEFINE_ERROR(ConfigError);
BCNN_DEFINE_ERROR(ConsistencyError);
BCNN_DEFINE_ERROR(UpdateError);
BCNN_DEFINE_ERROR(CorpusError);
BCNN_DEFINE_ERROR(IoError);
BCNN_DEFINE_ERROR(FormatError);
BCNN_DEFINE_ERROR(VersionError);
BCNN_DEFINE_ERROR(IntegrityError);
BCNN_DEFINE_ERROR(TrainingError);

#undef BCNN_DEFINE_ERROR

} // namespace bcnn
