#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace navkit {

/// Error families; the CLI maps each family to a distinct process exit code.
enum class ErrorFamily : int {
  validation = 11,  // bad arguments, empty inputs, broken invariants
  numeric = 12,     // estimation preconditions and conditioning failures
  graph = 13,       // map / path / annotation errors
  io = 14,          // file format and parse errors
  geometry = 15,    // scene and reprojection errors
};

class Error : public std::runtime_error {
 public:
  Error(ErrorFamily family, std::string name, const std::string& what)
      : std::runtime_error(name + ": " + what),
        family_(family),
        name_(std::move(name)) {}

  ErrorFamily family() const { return family_; }
  const std::string& name() const { return name_; }
  int exit_code() const { return static_cast<int>(family_); }

 private:
  ErrorFamily family_;
  std::string name_;
};

#define NAVKIT_DEFINE_ERROR(ClassName, family)                      \
  class ClassName : public Error {                                  \
   public:                                                          \
    explicit ClassName(const std::string& what)                     \
        : Error(ErrorFamily::family, #ClassName, what) {}           \
  }

// camera_motion
NAVKIT_DEFINE_ERROR(NonPositiveDepth, numeric);
NAVKIT_DEFINE_ERROR(InsufficientSamples, numeric);
NAVKIT_DEFINE_ERROR(RankDeficient, numeric);
NAVKIT_DEFINE_ERROR(NotEnoughValidPixels, numeric);

// heading_labeler / nav_metrics
NAVKIT_DEFINE_ERROR(EmptySeries, validation);
NAVKIT_DEFINE_ERROR(EmptyInput, validation);
NAVKIT_DEFINE_ERROR(LengthMismatch, validation);
NAVKIT_DEFINE_ERROR(MisalignedPath, validation);

// route_graph
NAVKIT_DEFINE_ERROR(UnknownNode, graph);
NAVKIT_DEFINE_ERROR(NoPath, graph);
NAVKIT_DEFINE_ERROR(GraphTooSmall, graph);
NAVKIT_DEFINE_ERROR(MissingTriplet, graph);
NAVKIT_DEFINE_ERROR(DuplicateTriplet, graph);

// mask_augment
NAVKIT_DEFINE_ERROR(InvalidSizeRange, validation);
NAVKIT_DEFINE_ERROR(DegenerateAttention, validation);

// sim_world
NAVKIT_DEFINE_ERROR(OpenWorld, geometry);
NAVKIT_DEFINE_ERROR(BehindCamera, geometry);

// dataset_io
NAVKIT_DEFINE_ERROR(BadMagic, io);
NAVKIT_DEFINE_ERROR(VersionUnsupported, io);
NAVKIT_DEFINE_ERROR(TruncatedPayload, io);
NAVKIT_DEFINE_ERROR(DimensionMismatch, io);
NAVKIT_DEFINE_ERROR(FileIoError, io);
NAVKIT_DEFINE_ERROR(InvariantViolation, validation);
NAVKIT_DEFINE_ERROR(UnknownTarget, validation);
NAVKIT_DEFINE_ERROR(TooManyTargets, validation);

#undef NAVKIT_DEFINE_ERROR

/// Parse failure carrying the 1-based line number of the offending record.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : Error(ErrorFamily::io, "ParseError",
              "line " + std::to_string(line) + ": " + reason),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace navkit
