#pragma once

#include <stdexcept>
#include <string>

namespace ksync {

enum class ErrorCode {
  NotEnabled,
  BufferHeadMismatch,
  ReservedName,
  LastActionNotReceive,
  UnmatchedFinalReceive,
  CyclicOrder,
  NotCausalDelivery,
  MissingDeviationVertices,
  CausalDeliveryViolation,
  SecondDeviation,
  PiSendsEarly,
  FeasibilityViolation,
  InconsistentGuess,
  ExplosionLimit,
  P2pCausalDeliveryViolation,
  P2pFeasibilityViolation,
  UnknownState,
  InvalidInput,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what, int index = -1)
      : std::runtime_error(what), code_(code), index_(index) {}

  ErrorCode code() const { return code_; }
  // Position of the offending action for run(), -1 otherwise.
  int index() const { return index_; }

 private:
  ErrorCode code_;
  int index_;
};

}  // namespace ksync
