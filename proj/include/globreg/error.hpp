#pragma once

#include <stdexcept>
#include <string>

namespace globreg {

enum class ErrorKind {
  kInvalidArgument,
  kEmptyCloud,
  kDegenerateNeighborhood,
  kCoincidentPoints,
  kNoReliablePoints,
  kInsufficientSupport,
  kRankDeficient,
  kSolverDegenerate,
  kEmptyPrune,
  kIo,
  kParse,
};

const char* to_string(ErrorKind kind);

// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace globreg
