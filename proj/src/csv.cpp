#include "csv.hpp"

#include "errors.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

namespace wta {

namespace {

std::vector<std::string> split_fields(std::string_view line)
{
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string_view field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
            field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t'))
            field.remove_suffix(1);
        fields.emplace_back(field);
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return fields;
}

} // namespace

std::size_t CsvTable::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return i;
    throw ParseError("csv: missing column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text, const std::string& source)
{
    CsvTable table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty())
            continue;
        auto fields = split_fields(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size())
            throw ParseError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(table.header.size())
                             + " fields, got " + std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty())
        throw ParseError(source + ": missing header row");
    return table;
}

CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str(), path);
}

std::string format_number(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double parse_number(std::string_view text, const std::string& context)
{
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (!text.empty() && *first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (text.empty() || ec != std::errc() || ptr != last)
        throw ParseError(context + ": not a number: '" + std::string(text) + "'");
    return value;
}

CsvWriter::CsvWriter(const std::string& path, std::span<const std::string> header)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path), columns_(header.size())
{
    if (!out_)
        throw IoError("cannot open '" + path + "' for writing");
    row(header);
}

void CsvWriter::row(std::span<const double> values)
{
    if (values.size() != columns_)
        throw IoError(path_ + ": row has " + std::to_string(values.size()) + " fields, header has "
                      + std::to_string(columns_));
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            out_ << ',';
        out_ << format_number(values[i]);
    }
    out_ << '\n';
}

void CsvWriter::row(std::span<const std::string> fields)
{
    if (fields.size() != columns_)
        throw IoError(path_ + ": row has " + std::to_string(fields.size()) + " fields, header has "
                      + std::to_string(columns_));
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            out_ << ',';
        out_ << fields[i];
    }
    out_ << '\n';
}

void CsvWriter::close()
{
    out_.close();
    if (out_.fail())
        throw IoError("error writing '" + path_ + "'");
}

} // namespace wta
