#pragma once

#include <string>
#include <vector>

namespace mwtgc::csv {

/// Shortest round-trip decimal representation of a double.
std::string format_double(double value);

/// Split one CSV line on commas. No quoting; fields must not contain commas.
std::vector<std::string> split_line(const std::string& line);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Read a whole CSV file (first line is the header). Throws InputError on
/// missing file or ragged rows.
Table read_file(const std::string& path);

/// Write rows with a header line. Throws InputError if the file cannot be opened.
void write_file(const std::string& path, const Table& table);

double parse_double(const std::string& field, const std::string& context);
long long parse_int(const std::string& field, const std::string& context);

} // namespace mwtgc::csv
