#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "rsg/regime_ode.hpp"

namespace rsg {

/// Shortest round-trip-safe text for a double: printf "%.17g".
std::string fmt(double v);
inline std::string fmt(int v) { return std::to_string(v); }
inline std::string fmt(std::uint64_t v) { return std::to_string(v); }
inline std::string fmt(const std::string& v) { return v; }
inline std::string fmt(const char* v) { return v; }

/// Comma-separated file with a header row, "\n" line endings.
class CsvWriter {
 public:
  /// Throws Error{kInvalidArgument} when the file cannot be opened.
  CsvWriter(const std::string& path, const std::vector<std::string>& header);

  template <class... Ts>
  void row(const Ts&... values) {
    std::vector<std::string> cells{fmt(values)...};
    write(cells);
  }
  void write(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

/// Columns t, regime, row, col, value with 1-based regime, row and col; nodes
/// outermost, then regimes, then column-major entries.
void write_grid_csv(const std::string& path, const RegimeGrid& grid);

}  // namespace rsg
