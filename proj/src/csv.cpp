#include "mwtgc/csv.hpp"
#include "mwtgc/error.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mwtgc::csv {

std::string format_double(double value) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        throw NumericError("format_double: value not representable");
    }
    return std::string(buf, ptr);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

Table read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open CSV file: " + path);
    }
    Table table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        auto fields = split_line(line);
        if (first) {
            table.header = std::move(fields);
            first = false;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw InputError(path + ": row " + std::to_string(table.rows.size() + 2) +
                             " has " + std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    if (first) {
        throw InputError(path + ": empty CSV file");
    }
    return table;
}

void write_file(const std::string& path, const Table& table) {
    std::ofstream out(path);
    if (!out) {
        throw InputError("cannot write CSV file: " + path);
    }
    auto write_row = [&out](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) {
                out << ',';
            }
            out << row[i];
        }
        out << '\n';
    };
    write_row(table.header);
    for (const auto& row : table.rows) {
        write_row(row);
    }
    if (!out) {
        throw InputError("write failed: " + path);
    }
}

double parse_double(const std::string& field, const std::string& context) {
    const char* begin = field.c_str();
    char* end = nullptr;
    const double value = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw InputError(context + ": cannot parse '" + field + "' as a number");
    }
    return value;
}

long long parse_int(const std::string& field, const std::string& context) {
    long long value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw InputError(context + ": cannot parse '" + field + "' as an integer");
    }
    return value;
}

} // namespace mwtgc::csv
