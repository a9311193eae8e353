#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mcmx {

// Base for all domain errors. `name()` is the stable machine-readable
// identifier the CLI prints on stderr before exiting with status 1.
class Error : public std::runtime_error {
 public:
  Error(std::string name, const std::string& message)
      : std::runtime_error(name + ": " + message), name_(std::move(name)) {}

  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

#define MCMX_DEFINE_ERROR(ErrorName)                         \
  struct ErrorName : Error {                                 \
    explicit ErrorName(const std::string& message)           \
        : Error(#ErrorName, message) {}                      \
  }

// chain-core
MCMX_DEFINE_ERROR(NotSquare);
MCMX_DEFINE_ERROR(NegativeEntry);
MCMX_DEFINE_ERROR(RowSumOutOfTolerance);
MCMX_DEFINE_ERROR(NotErgodic);
MCMX_DEFINE_ERROR(ZeroStationaryMass);
// spectral
MCMX_DEFINE_ERROR(NotReversible);
MCMX_DEFINE_ERROR(DimensionTooLargeForExact);
// sampler
MCMX_DEFINE_ERROR(InvalidDimension);
// learner / bounds
MCMX_DEFINE_ERROR(OutOfRange);
// families
MCMX_DEFINE_ERROR(InvalidParams);
MCMX_DEFINE_ERROR(PerturbationOutOfSimplex);
MCMX_DEFINE_ERROR(SupportViolation);
MCMX_DEFINE_ERROR(TooLargeForExact);
// risk harness
MCMX_DEFINE_ERROR(NoCrossing);
// I/O surface
MCMX_DEFINE_ERROR(FileError);
MCMX_DEFINE_ERROR(ParseError);
MCMX_DEFINE_ERROR(StateOutOfRange);

#undef MCMX_DEFINE_ERROR

}  // namespace mcmx
