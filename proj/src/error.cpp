#include "dimlab/error.hpp"

namespace dimlab {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::OutOfDomain: return "OutOfDomain";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::NotUnique: return "NotUnique";
    case Errc::BudgetExceeded: return "BudgetExceeded";
    case Errc::OrbitEscaped: return "OrbitEscaped";
    case Errc::Degenerate: return "Degenerate";
    case Errc::EmptySelection: return "EmptySelection";
    case Errc::NoBracket: return "NoBracket";
    case Errc::Infeasible: return "Infeasible";
    case Errc::HarvestFailed: return "HarvestFailed";
    case Errc::MalformedScheme: return "MalformedScheme";
    case Errc::PadSymbolInvalid: return "PadSymbolInvalid";
    case Errc::TooFewPoints: return "TooFewPoints";
    case Errc::Precondition: return "Precondition";
    case Errc::Parse: return "Parse";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace dimlab
