#pragma once

#include <stdexcept>
#include <string>

namespace oaa {

// Coordinate or box outside the image.
class BoundsError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Two operands disagree on dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Bad parameters: empty coordinate set, mu <= 0, epsilon <= 1 and so on.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The attack precondition (original correctly classified) does not hold.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The oracle could not answer: dead child process, protocol violation,
// invalid probability vector.
class OracleFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File decode/encode or parse failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace oaa
