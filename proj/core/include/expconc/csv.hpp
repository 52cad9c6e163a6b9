#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace expconc {

// Minimal RFC-4180 CSV: fields containing comma, quote, or newline are
// quoted, embedded quotes doubled. Doubles print as %.17g so round-trips are
// exact.
std::string csv_escape(const std::string& field);
std::string csv_format(double v);
void write_csv_row(std::ostream& os, const std::vector<std::string>& fields);

// Parses one logical CSV record (which may span physical lines inside quoted
// fields). Returns false at end of input.
bool read_csv_row(std::istream& is, std::vector<std::string>& fields);

}  // namespace expconc
