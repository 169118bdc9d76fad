// table.hpp
// Result tables and their CSV / JSON encodings. Floats are written with 17
// significant digits and '.' as the decimal separator regardless of locale.
// NaN cells are written empty (CSV) or null (JSON).

#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace caslab {

using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);  // throws on width mismatch
    std::size_t column_index(const std::string& name) const;  // throws std::out_of_range
    bool has_column(const std::string& name) const;
};

std::string format_double(double v);
std::string format_cell(const Cell& cell);

std::string to_csv(const Table& table);
// Array of row objects with keys in column order.
nlohmann::ordered_json to_json(const Table& table);
nlohmann::ordered_json cell_to_json(const Cell& cell);

// Parses CSV text (RFC 4180 quoting). Every cell comes back as a string, or
// monostate when empty. Throws std::invalid_argument on ragged rows.
Table parse_csv(const std::string& text);

// Numeric value of a parsed cell; NaN for empty cells, throws on garbage.
double cell_number(const Cell& cell);

}  // namespace caslab
