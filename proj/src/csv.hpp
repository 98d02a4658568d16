#pragma once

#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wta {

// Comma-separated, '.' decimal, mandatory header, LF line endings.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(std::string_view name) const; // throws ParseError if absent
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(std::string_view text, const std::string& source = "<memory>");

// 12 significant digits.
std::string format_number(double v);

// Whole-string parse; throws ParseError mentioning `context`.
double parse_number(std::string_view text, const std::string& context);

class CsvWriter {
public:
    CsvWriter(const std::string& path, std::span<const std::string> header);

    void row(std::span<const double> values);
    void row(std::span<const std::string> fields);
    void close();

private:
    std::ofstream out_;
    std::string path_;
    std::size_t columns_;
};

} // namespace wta
