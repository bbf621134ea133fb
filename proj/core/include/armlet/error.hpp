#pragma once

#include <stdexcept>
#include <string>

namespace armlet {

// Coarse error classes. The CLI maps these onto its exit codes.
enum class ErrorKind {
  kParse,
  kSchema,
  kData,
  kShape,
  kArgument,
  kNumeric,
  kOptimizer,
  kMetric,
  kForward,
  kContract,
  kLookup,
  kIo,
  kTraining,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + " error: " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace armlet
