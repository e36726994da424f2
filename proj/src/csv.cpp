#include "epm/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "epm/errors.hpp"

namespace epm {

namespace {

std::vector<std::string> split_row(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

} // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open CSV file: " + path);
    CsvTable t;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto cells = split_row(line);
        if (lineno == 1) {
            t.header = cells;
        } else {
            if (cells.size() != t.header.size())
                throw DataFormatError("row has " + std::to_string(cells.size()) +
                                          " cells, expected " + std::to_string(t.header.size()),
                                      lineno);
            t.rows.push_back(cells);
        }
    }
    if (t.header.empty()) throw DataFormatError("missing header row", 1);
    return t;
}

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write CSV file: " + path);
    auto emit = [&out](const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    };
    emit(table.header);
    for (const auto& r : table.rows) emit(r);
}

double parse_csv_double(const std::string& cell, long line) {
    try {
        size_t pos = 0;
        double d = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        return d;
    } catch (const std::exception&) {
        throw DataFormatError("not a number: '" + cell + "'", line);
    }
}

} // namespace epm
