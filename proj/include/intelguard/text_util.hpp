#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace intelguard::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_lines(std::string_view s);

/// Collapses whitespace runs to one space and strips both ends.
std::string normalize_whitespace(std::string_view s);

/// True when some line of `s` is exactly "```".
bool has_fence_line(std::string_view s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace intelguard::text
