#pragma once

#include <stdexcept>
#include <string>

namespace sepx {

enum class Errc {
  NonNormalized,
  AsymmetricInput,
  InfiniteMgf,
  EmptySupport,
  ZeroOffset,
  TimeNegative,
  TruncationBudgetExceeded,
  OutOfChernoffRange,
  AllZeroDensities,
  DensityOutOfRange,
  ChernoffRangeExceeded,
  WindowOverflow,
  EmptyRun,
  RatioOutOfRange,
  DominationViolated,
  TimeTooSmall,
  LTooSmall,
  MissingC,
  InfiniteRangeUnsupported,
  SampleTooSmall,
  WindowMismatch,
  ConfigInvalid,
  InvalidArgument,
};

const char* errc_name(Errc c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace sepx
