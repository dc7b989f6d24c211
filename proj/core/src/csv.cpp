// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

#include "mwrf/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "mwrf/error.hpp"

namespace mwrf {

void write_csv(const std::filesystem::path& path, const std::string& schema,
               const std::string& header, const std::vector<std::string>& rows, bool append) {
  bool write_header = true;
  if (append && std::filesystem::exists(path) && std::filesystem::file_size(path) > 0) {
    std::ifstream in(path);
    std::string s, h;
    std::getline(in, s);
    std::getline(in, h);
    if (s != schema || h != header) {
      fail(ErrorCode::kInvalidArgument, "existing CSV " + path.string() + " has a different schema");
    }
    write_header = false;
  }
  std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path.string());
  if (write_header) out << schema << '\n' << header << '\n';
  for (const std::string& r : rows) out << r << '\n';
  if (!out) fail(ErrorCode::kIo, "short write to " + path.string());
}

std::string csv_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

}  // namespace mwrf
