#pragma once

#include <string>
#include <vector>

namespace ioeq {

// Comma-separated text with a mandatory header row, UTF-8, "." decimal
// point. Values are kept as raw strings; numeric interpretation is the
// caller's concern. No quoting: the canonical formats never embed commas.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);
void write_csv(const std::string& path, const CsvTable& table);

// Shortest decimal form that parses back to the identical double
// (std::to_chars round-trip guarantee). Canonical for every on-disk real.
std::string format_double(double v);
double parse_double(const std::string& s);   // throws on malformed input
long long parse_int(const std::string& s);   // throws on malformed input

}  // namespace ioeq
