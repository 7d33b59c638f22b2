#pragma once

#include <stdexcept>
#include <string>

namespace negobench {

// Base for every error the library raises. Rule violations by players are
// not errors; they are values (see Violation in engine.hpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Scoring denominators are zero (OPT_p = 0, max_total = 0, ...).
class DegenerateInstance : public Error {
 public:
  using Error::Error;
};

// Exhaustive enumeration would exceed the configured cap.
class InstanceTooLarge : public Error {
 public:
  using Error::Error;
};

// Malformed input data: instance files, transcripts, configs, arguments.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A remote agent could not be reached or returned an unusable payload.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace negobench
