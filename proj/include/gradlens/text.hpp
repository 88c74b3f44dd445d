#pragma once
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gradlens {

std::string_view trim(std::string_view s);
std::vector<std::string> split_words(std::string_view s);
std::vector<std::string> split(std::string_view s, char delimiter);

// Ordered "key<sep>value" records. Blank lines and lines starting with '#'
// are skipped; a line without the separator throws naming its line number.
using KeyValues = std::vector<std::pair<std::string, std::string>>;
KeyValues parse_key_values(std::string_view text, char separator);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

}  // namespace gradlens
