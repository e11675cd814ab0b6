#pragma once

#include <map>
#include <string>
#include <vector>

namespace erlocal {

/// Parses "key = value" lines. Blank lines and text after '#' are ignored.
/// Duplicate keys and lines without '=' raise ValidationError.
std::map<std::string, std::string> parse_key_values(const std::string& text);

double parse_double(const std::string& key, const std::string& value);
long long parse_integer(const std::string& key, const std::string& value);
unsigned long long parse_unsigned(const std::string& key, const std::string& value);
bool parse_bool(const std::string& key, const std::string& value);
std::vector<std::string> split(const std::string& text, char sep);
std::string trim(const std::string& s);
std::string read_text_file(const std::string& path);

}  // namespace erlocal
