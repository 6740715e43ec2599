#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace cdmara::report {

inline constexpr std::string_view kToolName = "cdmara";
inline constexpr std::string_view kToolVersion = "1.0.0";

/// One table cell. monostate renders as an empty CSV field / JSON null.
using Cell = std::variant<std::monostate, double, std::int64_t, std::uint64_t, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
};

/// Shortest decimal that round-trips the double; "inf"/"-inf"/"nan" for
/// non-finite values. Locale independent.
std::string format_double(double x);

/// RFC 4180 field quoting: fields containing a comma, quote, CR or LF are
/// wrapped in quotes with inner quotes doubled.
std::string csv_field(std::string_view s);

/// CSV with '#'-prefixed metadata lines (tool, version, compact JSON of
/// `meta`) ahead of the header row. Lines end in CRLF-free '\n'.
void write_csv(std::ostream& out, const Table& table, const nlohmann::json& meta);

/// {"tool", "version", "meta", "columns", "rows": [{column: value}]}.
nlohmann::json to_json(const Table& table, const nlohmann::json& meta);
void write_json(std::ostream& out, const Table& table, const nlohmann::json& meta);

}  // namespace cdmara::report
