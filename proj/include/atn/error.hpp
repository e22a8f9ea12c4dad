#pragma once

#include <stdexcept>
#include <string>

namespace atn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shape contract violations.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Malformed input files (CoNLL-U, embeddings, datasets).
class ParseError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

// Invalid user configuration. The CLI maps this to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace atn
