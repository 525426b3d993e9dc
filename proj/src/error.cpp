#include "sepx/error.hpp"

namespace sepx {

const char* errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::NonNormalized: return "NonNormalized";
    case Errc::AsymmetricInput: return "AsymmetricInput";
    case Errc::InfiniteMgf: return "InfiniteMgf";
    case Errc::EmptySupport: return "EmptySupport";
    case Errc::ZeroOffset: return "ZeroOffset";
    case Errc::TimeNegative: return "TimeNegative";
    case Errc::TruncationBudgetExceeded: return "TruncationBudgetExceeded";
    case Errc::OutOfChernoffRange: return "OutOfChernoffRange";
    case Errc::AllZeroDensities: return "AllZeroDensities";
    case Errc::DensityOutOfRange: return "DensityOutOfRange";
    case Errc::ChernoffRangeExceeded: return "ChernoffRangeExceeded";
    case Errc::WindowOverflow: return "WindowOverflow";
    case Errc::EmptyRun: return "EmptyRun";
    case Errc::RatioOutOfRange: return "RatioOutOfRange";
    case Errc::DominationViolated: return "DominationViolated";
    case Errc::TimeTooSmall: return "TimeTooSmall";
    case Errc::LTooSmall: return "LTooSmall";
    case Errc::MissingC: return "MissingC";
    case Errc::InfiniteRangeUnsupported: return "InfiniteRangeUnsupported";
    case Errc::SampleTooSmall: return "SampleTooSmall";
    case Errc::WindowMismatch: return "WindowMismatch";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

}  // namespace sepx
