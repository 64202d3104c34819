#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace powerpanel::csv {

struct Table {
    std::vector<std::string> header;
    // Each row keeps the 1-based physical line number it came from.
    struct Row {
        std::size_t line = 0;
        std::vector<std::string> fields;
    };
    std::vector<Row> rows;

    // Index of a header column; throws schema error naming the column.
    std::size_t column(std::string_view name, const std::filesystem::path& source) const;
    std::optional<std::size_t> find_column(std::string_view name) const;
};

// Reads a UTF-8 CSV file with a mandatory header row. Quoted fields follow
// the usual doubled-quote escaping.
Table read(const std::filesystem::path& path);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

// Shortest round-trip decimal text; non-finite values become "nan"/"inf".
std::string format_double(double value);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace powerpanel::csv
