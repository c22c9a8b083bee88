#include "opotk/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "opotk/errors.hpp"

namespace opotk {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(std::string_view line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.emplace_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return fields;
}

double parse_double(std::string_view field, const std::string& source, int line_no) {
    double value = 0.0;
    const auto* begin = field.data();
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end)
        throw ParseError(source + ":" + std::to_string(line_no) +
                         ": expected a number, got '" + std::string(field) + "'");
    return value;
}

} // namespace

void write_table(std::ostream& out, const Table& table) {
    for (const auto& [key, value] : table.metadata)
        out << "# " << key << "=" << value << "\n";
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << (i ? "," : "") << table.columns[i];
    out << "\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << format_double(row[i]);
        out << "\n";
    }
}

void write_table_file(const std::string& path, const Table& table) {
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot open '" + path + "' for writing");
    write_table(out, table);
}

Table read_table(std::istream& in, const std::string& source_name) {
    Table table;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        const auto content = trim(line);
        if (content.empty())
            continue;
        if (content.front() == '#') {
            const auto body = trim(content.substr(1));
            const auto eq = body.find('=');
            if (eq == std::string_view::npos)
                throw ParseError(source_name + ":" + std::to_string(line_no) +
                                 ": metadata line is not 'key=value'");
            table.metadata.emplace(std::string(trim(body.substr(0, eq))),
                                   std::string(trim(body.substr(eq + 1))));
            continue;
        }
        if (!have_header) {
            table.columns = split_csv(content);
            have_header = true;
            continue;
        }
        const auto fields = split_csv(content);
        if (fields.size() != table.columns.size())
            throw ParseError(source_name + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(table.columns.size()) + " fields, got " +
                             std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto& f : fields)
            row.push_back(parse_double(f, source_name, line_no));
        table.rows.push_back(std::move(row));
        table.row_lines.push_back(line_no);
    }
    if (!have_header)
        throw ParseError(source_name + ": no header row found");
    return table;
}

Table read_table_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open '" + path + "'");
    return read_table(in, path);
}

} // namespace opotk
