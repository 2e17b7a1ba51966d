#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ta_gate::text {

/// Replaces "\r\n" and lone "\r" with "\n".
std::string normalize_newlines(std::string_view s);

/// Splits on '\n'. A trailing newline does not produce an empty last line.
std::vector<std::string_view> split_lines(std::string_view s);

std::string_view trim(std::string_view s);
std::string_view trim_right(std::string_view s);
std::string to_lower(std::string_view s);
bool starts_with_icase(std::string_view s, std::string_view prefix);
bool contains_icase(std::string_view haystack, std::string_view needle);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Decodes UTF-8 into code points. Invalid bytes decode to themselves
/// (as U+0080..U+00FF) so that every input has a well-defined length.
std::u32string decode_utf8(std::string_view s);

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// True if `name` occurs in `s` delimited by non-identifier characters.
bool contains_identifier(std::string_view s, std::string_view name);

/// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_escape(std::string_view field);
/// Splits one CSV line (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> parse_csv_line(std::string_view line);

}  // namespace ta_gate::text
