#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "flutrack/common.hpp"

namespace flutrack {

// RFC-4180 CSV. Fields containing commas, quotes, CR or LF are quoted on
// output; quoted input fields may span lines. Line numbers are tracked for
// error reporting and refer to the line a record starts on.

struct CsvRecord {
    std::vector<std::string> fields;
    std::size_t line = 0; // 1-based
};

class CsvReader {
public:
    CsvReader(std::string text, std::string source_name)
        : text_(std::move(text)), name_(std::move(source_name)) {}

    static CsvReader from_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw config_error("cannot open file: " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return CsvReader(ss.str(), path);
    }

    const std::string& source_name() const { return name_; }

    // Returns false at end of input.
    bool next(CsvRecord& out) {
        if (pos_ >= text_.size()) return false;
        out.fields.clear();
        out.line = line_;
        std::string field;
        bool in_quotes = false;
        while (pos_ <= text_.size()) {
            if (pos_ == text_.size()) {
                out.fields.push_back(std::move(field));
                ++pos_;
                return true;
            }
            const char c = text_[pos_];
            if (in_quotes) {
                if (c == '"') {
                    if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '"') {
                        field.push_back('"');
                        pos_ += 2;
                    } else {
                        in_quotes = false;
                        ++pos_;
                    }
                } else {
                    if (c == '\n') ++line_;
                    field.push_back(c);
                    ++pos_;
                }
                continue;
            }
            switch (c) {
            case '"':
                if (field.empty()) {
                    in_quotes = true;
                    ++pos_;
                } else {
                    field.push_back(c);
                    ++pos_;
                }
                break;
            case ',':
                out.fields.push_back(std::move(field));
                field.clear();
                ++pos_;
                break;
            case '\r':
                ++pos_;
                if (pos_ < text_.size() && text_[pos_] == '\n') ++pos_;
                ++line_;
                out.fields.push_back(std::move(field));
                return true;
            case '\n':
                ++pos_;
                ++line_;
                out.fields.push_back(std::move(field));
                return true;
            default:
                field.push_back(c);
                ++pos_;
            }
        }
        return true;
    }

    [[noreturn]] void fail(const CsvRecord& rec, std::size_t column, const std::string& what) const {
        throw config_error(name_ + ":" + std::to_string(rec.line) + ":" +
                           std::to_string(column + 1) + ": " + what);
    }

private:
    std::string text_;
    std::string name_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

inline std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline void csv_append_row(std::string& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out.push_back(',');
        out += csv_escape(fields[i]);
    }
    out.push_back('\n');
}

// Shortest round-trip decimal form; stable across runs, parses back exactly.
inline std::string format_double(double v) {
    char buf[40];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, p);
}

inline double parse_double_field(const CsvReader& r, const CsvRecord& rec, std::size_t col) {
    const std::string& s = rec.fields[col];
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        r.fail(rec, col, "expected a number, got '" + s + "'");
    return v;
}

inline std::int64_t parse_int_field(const CsvReader& r, const CsvRecord& rec, std::size_t col) {
    const std::string& s = rec.fields[col];
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        r.fail(rec, col, "expected an integer, got '" + s + "'");
    return v;
}

} // namespace flutrack
