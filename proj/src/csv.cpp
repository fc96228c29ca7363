#include "fdrsel/csv.hpp"

#include "fdrsel/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace fdrsel::csv {

std::vector<Row> parse(std::string_view text)
{
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        // a bare trailing newline produces a single empty field; drop it
        if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
        row.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field_started && field.empty()) in_quotes = true;
            else field.push_back(c);
            field_started = true;
            break;
        case ',':
            end_field();
            break;
        case '\r':
            if (i + 1 < text.size() && text[i + 1] == '\n') ++i;
            end_row();
            break;
        case '\n':
            end_row();
            break;
        default:
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) throw DataError(ErrorCode::io, "csv: unterminated quoted field");
    if (!field.empty() || !row.empty() || field_started) end_row();
    return rows;
}

std::vector<Row> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(ErrorCode::io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

bool parse_double(std::string_view cell, double& out)
{
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
    if (cell.empty()) return false;
    if (cell.front() == '+') cell.remove_prefix(1);
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && !std::isnan(out);
}

std::string escape(std::string_view field)
{
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string format_double(double v)
{
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_row(std::ostream& os, const Row& row)
{
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) os << ',';
        os << escape(row[i]);
    }
    os << '\n';
}

std::size_t NumericTable::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return i;
    throw DataError(ErrorCode::missing_column, "missing column '" + std::string(name) + "'");
}

NumericTable read_numeric_table(const std::filesystem::path& path)
{
    auto rows = read_file(path);
    if (rows.empty()) throw DataError(ErrorCode::io, path.string() + ": empty file");
    NumericTable table;
    table.header = rows.front();
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != table.header.size())
            throw DataError(ErrorCode::io, path.string() + ": row " + std::to_string(r + 1) + " has "
                                               + std::to_string(rows[r].size()) + " fields, expected "
                                               + std::to_string(table.header.size()));
        std::vector<double> values(rows[r].size());
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            const auto& cell = rows[r][c];
            if (cell == "nan") values[c] = std::nan("");
            else if (!parse_double(cell, values[c]))
                throw DataError(ErrorCode::non_numeric, path.string() + ": non-numeric cell '" + cell + "' in column '"
                                                            + table.header[c] + "', row " + std::to_string(r + 1));
        }
        table.rows.push_back(std::move(values));
    }
    return table;
}

void write_numeric_table(const std::filesystem::path& path, const NumericTable& table)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot write " + path.string());
    write_row(out, table.header);
    for (const auto& row : table.rows) {
        Row cells;
        cells.reserve(row.size());
        for (double v : row) cells.push_back(format_double(v));
        write_row(out, cells);
    }
}

} // namespace fdrsel::csv
