// CSV helpers: dot-decimal, header row, newline-terminated output.
#pragma once

#include <string>
#include <vector>

namespace epm {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Reads a CSV with a header row. Throws DataFormatError (with line number)
// on ragged rows.
CsvTable read_csv(const std::string& path);

// Formats a double with enough digits to round-trip, dot-decimal.
std::string csv_num(double v);

void write_csv(const std::string& path, const CsvTable& table);

double parse_csv_double(const std::string& cell, long line);

} // namespace epm
