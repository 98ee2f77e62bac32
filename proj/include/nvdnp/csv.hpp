#pragma once

#include <string>
#include <vector>

// CSV interchange: 9 significant digits, RFC-style quoting for text fields,
// atomic write (temp file + rename).

namespace nvdnp {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::string format_double(double v);           // %.9g
std::string csv_quote(const std::string& s);   // quotes only when needed

std::string render_csv(const CsvTable& table);

// Writes via a temporary file in the same directory, then renames.
void write_file_atomic(const std::string& path, const std::string& content);
void write_csv(const std::string& path, const CsvTable& table);

// Reads a numeric CSV; a single leading non-numeric header line is skipped.
CsvTable read_numeric_csv(const std::string& path);

}  // namespace nvdnp
