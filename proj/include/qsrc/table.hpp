#pragma once

#include <string>
#include <vector>

namespace qsrc {

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    // per-row model-validity flag; empty = no warning column
    std::vector<bool> warnings;
};

// RFC-style CSV: header row, '.' decimal separator, 12 significant digits,
// LF line endings. Byte-stable across runs and worker counts.
std::string format_csv(const ResultTable& table);
void emit_csv(const ResultTable& table, const std::string& path);

std::string format_value(double v);  // %.12g

} // namespace qsrc
