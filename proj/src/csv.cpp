#include "powerpanel/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "powerpanel/error.hpp"

namespace powerpanel::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// RFC 4180 fields: quotes wrap a field and "" inside quotes is a literal
// quote. Records never span lines.
std::vector<std::string> split_line(const std::string& line, const std::filesystem::path& path,
                                    std::size_t line_no) {
    auto malformed = [&](const std::string& why) {
        return Error(ErrorKind::schema, path.string() + ":" + std::to_string(line_no) + ": malformed quoting (" +
                                            why + ")");
    };
    std::vector<std::string> out;
    std::string field;
    bool quoted = false, was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c != '"') {
                field += c;
            } else if (i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else {
                quoted = false;
            }
        } else if (c == ',') {
            out.emplace_back(was_quoted ? std::string_view(field) : trim(field));
            field.clear();
            was_quoted = false;
        } else if (c == '"') {
            if (!trim(field).empty() || was_quoted) throw malformed("quote inside unquoted field");
            field.clear();
            quoted = was_quoted = true;
        } else if (was_quoted) {
            if (c != ' ' && c != '\t' && c != '\r') throw malformed("text after closing quote");
        } else {
            field += c;
        }
    }
    if (quoted) throw malformed("unterminated quote");
    out.emplace_back(was_quoted ? std::string_view(field) : trim(field));
    return out;
}

}  // namespace

std::optional<std::size_t> Table::find_column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return std::nullopt;
}

std::size_t Table::column(std::string_view name, const std::filesystem::path& source) const {
    if (auto idx = find_column(name)) return *idx;
    throw Error(ErrorKind::schema,
                source.string() + ": missing required column '" + std::string(name) + "'");
}

Table read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open '" + path.string() + "'");

    Table table;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto fields = split_line(line, path, line_no);
        if (!have_header) {
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        table.rows.push_back({line_no, std::move(fields)});
    }
    if (in.bad()) throw Error(ErrorKind::io, "read failure on '" + path.string() + "'");
    if (!have_header) throw Error(ErrorKind::schema, path.string() + ": header row is mandatory");
    return table;
}

std::optional<double> parse_double(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::optional<long long> parse_int(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    long long value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        const auto& f = fields[i];
        if (f.find_first_of(",\"\n") != std::string::npos) {
            out << '"';
            for (char c : f) {
                if (c == '"') out << '"';
                out << c;
            }
            out << '"';
        } else {
            out << f;
        }
    }
    out << '\n';
}

}  // namespace powerpanel::csv
