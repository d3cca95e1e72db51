#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace rsg {

enum class Errc {
  kNegativeOffDiagonal,
  kRowSumNonzero,
  kInvalidArgument,
  kParseError,
  kRiccatiSingular,
  kNonFiniteDerivative,
  kSingularRL,
  kSingularRF,
  kRequiresL3,
  kStructuralMismatch,
  kGridMismatch,
};

const char* errc_name(Errc code);

/// Library error. Carries an error code and, for solver failures, the grid
/// location (time, 0-based regime) where the failure was detected.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what, std::optional<double> t = std::nullopt,
        std::optional<int> regime = std::nullopt);

  Errc code() const { return code_; }
  std::optional<double> time() const { return time_; }
  std::optional<int> regime() const { return regime_; }

  /// True for failures raised while integrating or inverting (CLI exit 3).
  bool is_solver_failure() const;

 private:
  Errc code_;
  std::optional<double> time_;
  std::optional<int> regime_;
};

}  // namespace rsg
