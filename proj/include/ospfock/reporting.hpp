#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ospfock/verify.hpp"

namespace ospfock {

/// Shortest decimal string that parses back to exactly the same double
/// (round-trip safe). Used for every floating-point value that reaches a
/// report file, so identical runs produce byte-identical output.
std::string format_double(double value);

/// Inverse of format_double; throws std::invalid_argument unless the whole
/// string is a valid decimal floating-point literal.
double parse_double(std::string_view text);

/// FNV-1a 64-bit hash of a byte string.
std::uint64_t fnv1a64(std::string_view bytes);

/// fnv1a64 rendered as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

/// One identity check as a single line of space-separated key=value fields
/// in a fixed order. Values containing spaces, quotes, or '=' are quoted
/// with backslash escapes. Ends without a newline.
std::string report_line(std::string_view suite, const IdentityReport& report);

struct ParsedReportLine {
    std::string suite;
    IdentityReport report;
};

/// Inverse of report_line. Throws std::invalid_argument on malformed input,
/// unknown record type, or missing mandatory fields.
ParsedReportLine parse_report_line(std::string_view line);

/// Machine-readable error record sharing the key=value line grammar:
/// `error kind=<kind> message=<message>`.
std::string error_line(std::string_view kind, std::string_view message);

/// A named table destined for a CSV file.
struct CsvTable {
    std::string name;  ///< file stem, e.g. "series-radius"
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Renders header + rows, comma-separated, one trailing newline per line.
/// Cells containing commas, quotes, or newlines are double-quote escaped
/// per RFC 4180.
std::string csv_text(const CsvTable& table);

}  // namespace ospfock
