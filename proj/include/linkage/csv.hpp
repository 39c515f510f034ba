#pragma once
// Small CSV reader/writer (RFC 4180 quoting) plus number formatting helpers.

#include <iosfwd>
#include <string>
#include <vector>

namespace linkage {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // column index by header name, -1 if absent
    int column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

std::string csv_quote(const std::string& field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);
void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows);

// %.17g: round-trips a double exactly through text
std::string fmt_full(double v);
// %.6g: compact form for report tables
std::string fmt_g6(double v);

// strict numeric parse; throws DataError with `context` in the message
double parse_double(const std::string& s, const std::string& context);
long parse_long(const std::string& s, const std::string& context);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace linkage
