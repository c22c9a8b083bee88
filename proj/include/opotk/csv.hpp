#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace opotk {

/// Tabular container shared by all toolkit file formats: `# key=value`
/// metadata lines, one header row naming the columns, then numeric rows.
/// row_lines holds the 1-based source line of each row when the table was
/// parsed from text, so format errors can point at the offending line.
struct Table {
    std::map<std::string, std::string> metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<int> row_lines;
};

/// Writes metadata lines, the header row, then the data rows. Values are
/// printed with enough digits to round-trip a double.
void write_table(std::ostream& out, const Table& table);
void write_table_file(const std::string& path, const Table& table);

/// Parses a table written by write_table (or any file following the same
/// layout). Throws ParseError with a line number on malformed input.
Table read_table(std::istream& in, const std::string& source_name = "<stream>");
Table read_table_file(const std::string& path);

} // namespace opotk
