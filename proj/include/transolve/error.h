#pragma once

#include <stdexcept>
#include <string>

namespace transolve {

enum class ErrorCode {
  kInvalidInput,
  kDisconnectedGraph,
  kIdenticalPairs,
  kEmptySystem,
  kInfeasibleConfig,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace transolve
