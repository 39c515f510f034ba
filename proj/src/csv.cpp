#include "linkage/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "linkage/common.hpp"

namespace linkage {

int CsvTable::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return int(i);
    return -1;
}

namespace {

// Parses one record starting at `pos`; handles quoted fields with embedded
// newlines, doubled quotes, and both \n and \r\n line ends.
bool parse_record(const std::string& text, size_t& pos, std::vector<std::string>& out) {
    out.clear();
    if (pos >= text.size()) return false;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    while (pos < text.size()) {
        char c = text[pos];
        if (in_quotes) {
            if (c == '"') {
                if (pos + 1 < text.size() && text[pos + 1] == '"') {
                    field += '"';
                    pos += 2;
                } else {
                    in_quotes = false;
                    ++pos;
                }
            } else {
                field += c;
                ++pos;
            }
            any = true;
            continue;
        }
        if (c == '"') {
            in_quotes = true;
            any = true;
            ++pos;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
            any = true;
            ++pos;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && pos + 1 < text.size() && text[pos + 1] == '\n') ++pos;
            ++pos;
            out.push_back(field);
            return true;
        } else {
            field += c;
            any = true;
            ++pos;
        }
    }
    if (in_quotes) throw DataError("csv: unterminated quoted field");
    if (!any && out.empty()) return false;
    out.push_back(field);
    return true;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    CsvTable t;
    size_t pos = 0;
    std::vector<std::string> rec;
    if (!parse_record(text, pos, rec)) return t;
    t.header = rec;
    while (parse_record(text, pos, rec)) {
        if (rec.size() == 1 && rec[0].empty()) continue;  // trailing blank line
        t.rows.push_back(rec);
    }
    return t;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    return read_csv(in);
}

std::string csv_quote(const std::string& field) {
    bool needs = field.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << csv_quote(fields[i]);
    }
    out << '\n';
}

void write_csv_file(const std::string& path, const std::vector<std::string>& header,
                    const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    write_csv_row(out, header);
    for (const auto& r : rows) write_csv_row(out, r);
    if (!out) throw DataError("write failed: " + path);
}

std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_g6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

double parse_double(const std::string& s, const std::string& context) {
    if (s.empty()) throw DataError(context + ": empty numeric field");
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (errno == ERANGE || end == s.c_str() || *end != '\0')
        throw DataError(context + ": bad number '" + s + "'");
    return v;
}

long parse_long(const std::string& s, const std::string& context) {
    if (s.empty()) throw DataError(context + ": empty integer field");
    errno = 0;
    char* end = nullptr;
    long v = std::strtol(s.c_str(), &end, 10);
    if (errno == ERANGE || end == s.c_str() || *end != '\0')
        throw DataError(context + ": bad integer '" + s + "'");
    return v;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path);
    out << content;
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace linkage
