#include "qsrc/table.hpp"

#include <cstdio>
#include <fstream>

#include "qsrc/errors.hpp"

namespace qsrc {

std::string format_value(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

std::string format_csv(const ResultTable& table) {
    std::string out;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out += ',';
        out += table.columns[c];
    }
    bool with_warnings = !table.warnings.empty();
    if (with_warnings) out += ",warning";
    out += '\n';
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t c = 0; c < table.rows[r].size(); ++c) {
            if (c) out += ',';
            out += format_value(table.rows[r][c]);
        }
        if (with_warnings) {
            out += ',';
            out += table.warnings[r] ? '1' : '0';
        }
        out += '\n';
    }
    return out;
}

void emit_csv(const ResultTable& table, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open output file: " + path);
    f << format_csv(table);
    if (!f.good()) throw ConfigError("write failed: " + path);
}

} // namespace qsrc
