#pragma once

#include <stdexcept>
#include <string>

namespace botdgt {

// Input/config problems surfaced to the user. CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Training produced a non-finite loss. CLI maps this to exit code 2.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int epoch)
      : std::runtime_error(what), epoch(epoch) {}
  int epoch;
};

}  // namespace botdgt
