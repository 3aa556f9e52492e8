#include "renewal/error.hpp"

namespace renewal {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::NonzeroConstantTerm: return "NonzeroConstantTerm";
    case Errc::OrderTooSmall: return "OrderTooSmall";
    case Errc::NotRevertible: return "NotRevertible";
    case Errc::ZeroConditioningMass: return "ZeroConditioningMass";
    case Errc::TailTooHeavy: return "TailTooHeavy";
    case Errc::InfiniteSupport: return "InfiniteSupport";
    case Errc::InvalidPath: return "InvalidPath";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Io: return "IoError";
    case Errc::Format: return "FormatError";
  }
  return "Unknown";
}

}  // namespace renewal
