#include "rsg/csv.hpp"

#include <cstdio>

#include "rsg/errors.hpp"

namespace rsg {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header)
    : out_(path, std::ios::binary), columns_(header.size()) {
  if (!out_) throw Error(Errc::kInvalidArgument, "cannot write " + path);
  write(header);
}

void CsvWriter::write(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw Error(Errc::kInvalidArgument, "CSV row width differs from the header");
  for (std::size_t c = 0; c < cells.size(); ++c) {
    if (c) out_ << ',';
    out_ << cells[c];
  }
  out_ << '\n';
}

void write_grid_csv(const std::string& path, const RegimeGrid& grid) {
  CsvWriter w(path, {"t", "regime", "row", "col", "value"});
  for (int k = 0; k <= grid.grid().N; ++k)
    for (int i = 0; i < grid.regimes(); ++i)
      for (int c = 0; c < grid.cols(); ++c)
        for (int r = 0; r < grid.rows(); ++r) w.row(grid.grid().t(k), i + 1, r + 1, c + 1, grid.value(k, i, r, c));
}

}  // namespace rsg
