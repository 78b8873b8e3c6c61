#pragma once

#include <stdexcept>
#include <string>

namespace cpr {

// Bad dimensions, bad hyperparameters, malformed configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File ingestion failures; message names the file and line.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// API misuse, e.g. backward() before any forward pass.
struct StateError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace cpr
