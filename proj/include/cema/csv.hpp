#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace cema {

/// Empty cells are written as "" in CSV and null in JSON.
using Cell = std::variant<std::monostate, std::string, std::int64_t, std::uint64_t, double>;

/// A header plus rows, written as RFC-4180 CSV or as a JSON array of objects.
/// Doubles use the shortest round-trip representation.
class Table {
public:
    explicit Table(std::vector<std::string> columns);

    Table& add(std::vector<Cell> row);

    const std::vector<std::string>& columns() const noexcept { return columns_; }
    const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }

    void write_csv(std::ostream& out) const;
    void write_json(std::ostream& out) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

enum class OutputFormat { csv, json };

OutputFormat parse_output_format(std::string_view s);
std::string extension(OutputFormat f);

/// Writes `stem` + extension into `dir`, returning the path.
std::filesystem::path write_table(const Table& table, const std::filesystem::path& dir, const std::string& stem,
                                  OutputFormat format);

std::string csv_escape(std::string_view field);
std::string format_number(double v);

/// Parses RFC-4180 text into rows of fields.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

} // namespace cema
