#pragma once

#include <stdexcept>
#include <string>

namespace sketchreg {

// Base for all library errors so callers can catch one type.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define SKETCHREG_ERROR(Name)                                  \
  struct Name : Error {                                        \
    explicit Name(const std::string& msg) : Error(msg) {}      \
  }

SKETCHREG_ERROR(InvalidMatrix);
SKETCHREG_ERROR(NumericalFailure);
SKETCHREG_ERROR(NotPSD);
SKETCHREG_ERROR(DomainError);
SKETCHREG_ERROR(InvalidRegularization);
SKETCHREG_ERROR(InvalidGrid);
SKETCHREG_ERROR(ShapeMismatch);
SKETCHREG_ERROR(InvalidLength);
SKETCHREG_ERROR(InvalidInput);
SKETCHREG_ERROR(InvalidDimension);
SKETCHREG_ERROR(DegenerateScores);
SKETCHREG_ERROR(InvalidModel);
SKETCHREG_ERROR(InvalidNormSpec);
SKETCHREG_ERROR(UnsupportedKernel);
SKETCHREG_ERROR(InvalidProjection);
SKETCHREG_ERROR(UnsupportedSize);
SKETCHREG_ERROR(ConfigError);
SKETCHREG_ERROR(ParseError);
SKETCHREG_ERROR(InvalidValue);
SKETCHREG_ERROR(IoError);
SKETCHREG_ERROR(InvalidPoints);

#undef SKETCHREG_ERROR

}  // namespace sketchreg
