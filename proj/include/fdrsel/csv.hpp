#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fdrsel::csv {

using Row = std::vector<std::string>;

/// Parse RFC-4180 text: quoted fields, doubled quotes, CRLF or LF endings.
std::vector<Row> parse(std::string_view text);

std::vector<Row> read_file(const std::filesystem::path& path);

/// Parse a numeric cell with '.' as decimal separator. Returns false on
/// anything that is not a complete finite or infinite floating-point literal.
bool parse_double(std::string_view cell, double& out);

/// Quote a field if it contains a comma, quote or line break.
std::string escape(std::string_view field);

/// Shortest representation that reads back to the same double.
std::string format_double(double v);

void write_row(std::ostream& os, const Row& row);

/// A header plus numeric body, the shape of every table the CLI writes.
struct NumericTable
{
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(std::string_view name) const;
};

NumericTable read_numeric_table(const std::filesystem::path& path);
void write_numeric_table(const std::filesystem::path& path, const NumericTable& table);

} // namespace fdrsel::csv
