#include <cema/csv.hpp>
#include <cema/error.hpp>

#include <fmt/format.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <ostream>

namespace cema {

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

Table& Table::add(std::vector<Cell> row)
{
    if (row.size() != columns_.size())
        throw std::logic_error(fmt::format("row has {} cells, table has {} columns", row.size(), columns_.size()));
    rows_.push_back(std::move(row));
    return *this;
}

std::string csv_escape(std::string_view field)
{
    if (field.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (v == 0.0)
        return "0"; // also folds -0
    return fmt::format("{}", v);
}

namespace {

std::string cell_text(const Cell& c)
{
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>)
                return {};
            else if constexpr (std::is_same_v<T, std::string>)
                return v;
            else if constexpr (std::is_same_v<T, double>)
                return format_number(v);
            else
                return fmt::format("{}", v);
        },
        c);
}

} // namespace

void Table::write_csv(std::ostream& out) const
{
    for (std::size_t i = 0; i < columns_.size(); ++i)
        out << (i ? "," : "") << csv_escape(columns_[i]);
    out << "\r\n";
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << csv_escape(cell_text(row[i]));
        out << "\r\n";
    }
}

void Table::write_json(std::ostream& out) const
{
    // Numbers are emitted through format_number so JSON and CSV agree digit
    // for digit.
    out << "[";
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        out << (r ? ",\n " : "\n ") << "{";
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            out << (i ? ", " : "") << nlohmann::json(columns_[i]).dump() << ": ";
            const auto& c = rows_[r][i];
            if (std::holds_alternative<std::monostate>(c))
                out << "null";
            else if (const auto* s = std::get_if<std::string>(&c))
                out << nlohmann::json(*s).dump();
            else if (const auto* d = std::get_if<double>(&c); d && !std::isfinite(*d))
                out << "null";
            else
                out << cell_text(c);
        }
        out << "}";
    }
    out << (rows_.empty() ? "]\n" : "\n]\n");
}

OutputFormat parse_output_format(std::string_view s)
{
    if (s == "csv")
        return OutputFormat::csv;
    if (s == "json")
        return OutputFormat::json;
    throw UsageError("unknown output format: " + std::string(s));
}

std::string extension(OutputFormat f)
{
    return f == OutputFormat::csv ? ".csv" : ".json";
}

std::filesystem::path write_table(const Table& table, const std::filesystem::path& dir, const std::string& stem,
                                  OutputFormat format)
{
    const auto path = dir / (stem + extension(format));
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write " + path.string());
    if (format == OutputFormat::csv)
        table.write_csv(out);
    else
        table.write_json(out);
    if (!out)
        throw DataError("write failed: " + path.string());
    return path;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text)
{
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        any = true;
        if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n')
                ++i;
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
            any = false;
        } else {
            field += c;
        }
    }
    if (any || !field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace cema
