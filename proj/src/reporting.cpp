#include "ospfock/reporting.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <system_error>

namespace ospfock {

namespace {

bool needs_quoting(std::string_view value) {
    if (value.empty()) return true;
    for (char c : value) {
        if (c == ' ' || c == '"' || c == '=' || c == '\\' || c == '\n') {
            return true;
        }
    }
    return false;
}

void append_value(std::string& out, std::string_view value) {
    if (!needs_quoting(value)) {
        out.append(value);
        return;
    }
    out.push_back('"');
    for (char c : value) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
}

void append_field(std::string& out, std::string_view key,
                  std::string_view value) {
    if (!out.empty()) out.push_back(' ');
    out.append(key);
    out.push_back('=');
    append_value(out, value);
}

}  // namespace

std::string format_double(double value) {
    char buffer[64];
    auto [ptr, ec] =
        std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc()) {
        throw std::runtime_error("format_double: conversion failed");
    }
    return std::string(buffer, ptr);
}

double parse_double(std::string_view text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw std::invalid_argument("parse_double: invalid literal '" +
                                    std::string(text) + "'");
    }
    return value;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        hash ^= static_cast<std::uint64_t>(c);
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::string fnv1a64_hex(std::string_view bytes) {
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(bytes)));
    return std::string(buffer, 16);
}

std::string report_line(std::string_view suite, const IdentityReport& report) {
    std::string out;
    out.append("report");
    append_field(out, "suite", suite);
    append_field(out, "name", report.name);
    append_field(out, "pass", report.pass ? "1" : "0");
    append_field(out, "residual", format_double(report.residual));
    append_field(out, "tolerance", format_double(report.tolerance));
    append_field(out, "safe_degree", std::to_string(report.safe_degree));
    if (report.has_scalar) {
        append_field(out, "fitted_re", format_double(report.fitted_scalar.real()));
        append_field(out, "fitted_im", format_double(report.fitted_scalar.imag()));
        append_field(out, "reference_re",
                     format_double(report.reference_scalar.real()));
        append_field(out, "reference_im",
                     format_double(report.reference_scalar.imag()));
        append_field(out, "off_scalar", format_double(report.off_scalar));
    }
    return out;
}

namespace {

struct Field {
    std::string key;
    std::string value;
};

std::vector<Field> tokenize(std::string_view line) {
    std::vector<Field> fields;
    std::size_t i = 0;
    const std::size_t n = line.size();
    auto skip_spaces = [&] {
        while (i < n && line[i] == ' ') ++i;
    };
    skip_spaces();
    // Leading record-type token has no '='.
    std::size_t start = i;
    while (i < n && line[i] != ' ') {
        if (line[i] == '=') {
            throw std::invalid_argument("report line: missing record type");
        }
        ++i;
    }
    fields.push_back({"", std::string(line.substr(start, i - start))});
    while (true) {
        skip_spaces();
        if (i >= n) break;
        start = i;
        while (i < n && line[i] != '=' && line[i] != ' ') ++i;
        if (i >= n || line[i] != '=') {
            throw std::invalid_argument("report line: field without '='");
        }
        std::string key(line.substr(start, i - start));
        ++i;  // skip '='
        std::string value;
        if (i < n && line[i] == '"') {
            ++i;
            bool closed = false;
            while (i < n) {
                char c = line[i++];
                if (c == '\\') {
                    if (i >= n) break;
                    value.push_back(line[i++]);
                } else if (c == '"') {
                    closed = true;
                    break;
                } else {
                    value.push_back(c);
                }
            }
            if (!closed) {
                throw std::invalid_argument("report line: unterminated quote");
            }
        } else {
            std::size_t vstart = i;
            while (i < n && line[i] != ' ') ++i;
            value.assign(line.substr(vstart, i - vstart));
        }
        fields.push_back({std::move(key), std::move(value)});
    }
    return fields;
}

const std::string* find_field(const std::vector<Field>& fields,
                              std::string_view key) {
    for (const Field& f : fields) {
        if (f.key == key) return &f.value;
    }
    return nullptr;
}

const std::string& require_field(const std::vector<Field>& fields,
                                 std::string_view key) {
    const std::string* value = find_field(fields, key);
    if (value == nullptr) {
        throw std::invalid_argument("report line: missing field '" +
                                    std::string(key) + "'");
    }
    return *value;
}

}  // namespace

ParsedReportLine parse_report_line(std::string_view line) {
    std::vector<Field> fields = tokenize(line);
    if (fields.empty() || fields.front().value != "report") {
        throw std::invalid_argument("report line: expected 'report' record");
    }
    ParsedReportLine parsed;
    parsed.suite = require_field(fields, "suite");
    parsed.report.name = require_field(fields, "name");
    const std::string& pass = require_field(fields, "pass");
    if (pass != "0" && pass != "1") {
        throw std::invalid_argument("report line: pass must be 0 or 1");
    }
    parsed.report.pass = (pass == "1");
    parsed.report.residual = parse_double(require_field(fields, "residual"));
    parsed.report.tolerance = parse_double(require_field(fields, "tolerance"));
    parsed.report.safe_degree =
        static_cast<int>(parse_double(require_field(fields, "safe_degree")));
    if (const std::string* fitted = find_field(fields, "fitted_re")) {
        parsed.report.has_scalar = true;
        parsed.report.fitted_scalar =
            Complex(parse_double(*fitted),
                    parse_double(require_field(fields, "fitted_im")));
        parsed.report.reference_scalar =
            Complex(parse_double(require_field(fields, "reference_re")),
                    parse_double(require_field(fields, "reference_im")));
        parsed.report.off_scalar =
            parse_double(require_field(fields, "off_scalar"));
    }
    return parsed;
}

std::string error_line(std::string_view kind, std::string_view message) {
    std::string out;
    out.append("error");
    append_field(out, "kind", kind);
    append_field(out, "message", message);
    return out;
}

std::string csv_text(const CsvTable& table) {
    auto append_cell = [](std::string& out, const std::string& cell) {
        bool quote = cell.find_first_of(",\"\n") != std::string::npos;
        if (!quote) {
            out.append(cell);
            return;
        }
        out.push_back('"');
        for (char c : cell) {
            if (c == '"') out.push_back('"');
            out.push_back(c);
        }
        out.push_back('"');
    };
    auto append_row = [&](std::string& out,
                          const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) out.push_back(',');
            append_cell(out, row[i]);
        }
        out.push_back('\n');
    };
    std::string out;
    append_row(out, table.header);
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size()) {
            throw std::invalid_argument("csv_text: row width mismatch in '" +
                                        table.name + "'");
        }
        append_row(out, row);
    }
    return out;
}

}  // namespace ospfock
