#pragma once

#include <stdexcept>
#include <string>

namespace mdpmine {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- event log ---
struct MissingColumnError : Error {
  using Error::Error;
};
struct UnparseableTimestampError : Error {
  UnparseableTimestampError(std::size_t row, const std::string& reason)
      : Error("row " + std::to_string(row) + ": " + reason), row(row) {}
  std::size_t row;
};
struct EmptyLogError : Error {
  using Error::Error;
};
struct UnknownActivityError : Error {
  using Error::Error;
};
struct MissingAttributeError : Error {
  using Error::Error;
};
struct DegeneratePartitionError : Error {
  using Error::Error;
};

// --- encoding ---
struct OutOfRangePrefixError : Error {
  using Error::Error;
};

// --- clustering ---
struct KTooLargeError : Error {
  using Error::Error;
};
struct DimensionMismatchError : Error {
  using Error::Error;
};
struct SingleClusterError : Error {
  using Error::Error;
};

// --- mdp ---
struct EncodingMismatchError : Error {
  using Error::Error;
};

// --- rl / recommender ---
struct NoAgentDecisionsError : Error {
  using Error::Error;
};
struct NoActionsAvailableError : Error {
  using Error::Error;
};
struct UnknownStateError : Error {
  using Error::Error;
};
// The state exists but only the environment can move there.
struct NotADecisionPointError : Error {
  using Error::Error;
};

// --- simulation ---
struct InvalidModelError : Error {
  using Error::Error;
};
struct IncompatibleAlphabetError : Error {
  using Error::Error;
};

// --- evaluation ---
struct InsufficientSamplesError : Error {
  using Error::Error;
};

// --- pipeline / cli ---
struct ConfigError : Error {
  using Error::Error;
};
struct MissingArtifactError : Error {
  using Error::Error;
};
struct AlphabetMismatchError : Error {
  using Error::Error;
};

}  // namespace mdpmine
