#pragma once

#include <stdexcept>
#include <string>

namespace stereoflow {

// Operand extents disagree, or a field violates a structural invariant.
struct ShapeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or unsupported file content.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad key/value configuration input.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An evaluation was requested over an empty pixel set.
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A synthetic scene cannot be rendered as specified.
struct DegenerateSceneError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Optimization hit a non-finite loss value.
struct OptimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace stereoflow
