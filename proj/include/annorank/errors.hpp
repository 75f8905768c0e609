#pragma once

#include <stdexcept>
#include <string>

namespace annorank {

/// Base class for every error raised by the library. The CLI maps these to
/// exit code 1; usage errors exit with 2.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A histogram with zero L1 mass: a degenerate region that must be rejected
/// at ingest rather than epsilon-smoothed.
struct ZeroHistogramError : Error {
  using Error::Error;
};

struct DimensionMismatchError : Error {
  using Error::Error;
};

struct MissingGroundTruthError : Error {
  using Error::Error;
};

/// Rank labels of one image are not a permutation of 1..M.
struct InvalidLabelsError : Error {
  using Error::Error;
};

struct NoPairsError : Error {
  using Error::Error;
};

/// Objective or gradient overflowed; signals a bad C or corrupt data.
struct NonFiniteError : Error {
  using Error::Error;
};

struct TooFewImagesError : Error {
  using Error::Error;
};

struct InsufficientClassesError : Error {
  using Error::Error;
};

/// Binary training data contains a single class.
struct DegenerateLabelsError : Error {
  using Error::Error;
};

struct MissingScoresError : Error {
  using Error::Error;
};

struct LengthMismatchError : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct ValidationError : Error {
  using Error::Error;
};

struct VersionMismatchError : Error {
  using Error::Error;
};

}  // namespace annorank
