#include "rsg/errors.hpp"

#include <sstream>

namespace rsg {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::kNegativeOffDiagonal: return "NegativeOffDiagonal";
    case Errc::kRowSumNonzero: return "RowSumNonzero";
    case Errc::kInvalidArgument: return "InvalidArgument";
    case Errc::kParseError: return "ParseError";
    case Errc::kRiccatiSingular: return "RiccatiSingular";
    case Errc::kNonFiniteDerivative: return "NonFiniteDerivative";
    case Errc::kSingularRL: return "SingularRL";
    case Errc::kSingularRF: return "SingularRF";
    case Errc::kRequiresL3: return "RequiresL3";
    case Errc::kStructuralMismatch: return "StructuralMismatch";
    case Errc::kGridMismatch: return "GridMismatch";
  }
  return "Unknown";
}

namespace {
std::string decorate(Errc code, const std::string& what, std::optional<double> t,
                     std::optional<int> regime) {
  std::ostringstream os;
  os << errc_name(code) << ": " << what;
  if (t) os << " (t = " << *t;
  if (t && regime) os << ", regime " << *regime + 1;
  if (!t && regime) os << " (regime " << *regime + 1;
  if (t || regime) os << ")";
  return os.str();
}
}  // namespace

Error::Error(Errc code, const std::string& what, std::optional<double> t, std::optional<int> regime)
    : std::runtime_error(decorate(code, what, t, regime)), code_(code), time_(t), regime_(regime) {}

bool Error::is_solver_failure() const {
  switch (code_) {
    case Errc::kRiccatiSingular:
    case Errc::kNonFiniteDerivative:
    case Errc::kSingularRL:
    case Errc::kSingularRF:
      return true;
    default:
      return false;
  }
}

}  // namespace rsg
