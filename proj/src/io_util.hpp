#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace stylegraph::detail {

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

// Splits on '\n', dropping a trailing '\r' from each line.
std::vector<std::string> split_lines(const std::string& text);

// Shortest decimal text that parses back to the identical double.
std::string format_double(double value);
// Fixed 17 significant digits in scientific notation.
std::string format_double_sci(double value);

std::string xml_escape(const std::string& text);

}  // namespace stylegraph::detail
