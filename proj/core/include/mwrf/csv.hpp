// SPDX-FileCopyrightText: 2026 The mwrf Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef MWRF_CSV_HPP
#define MWRF_CSV_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace mwrf {

// Writes `schema` (a "# ..." line), `header` and the rows. With `append`
// set and an existing non-empty file, the file's first two lines must equal
// schema and header (InvalidArgument otherwise) and only rows are added.
void write_csv(const std::filesystem::path& path, const std::string& schema,
               const std::string& header, const std::vector<std::string>& rows, bool append);

// Shortest round-trip decimal form; infinities print as "inf"/"-inf".
std::string csv_number(double v);

}  // namespace mwrf

#endif  // MWRF_CSV_HPP
