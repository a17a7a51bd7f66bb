#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace hyq {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
bool ci_equal(std::string_view a, std::string_view b);

// [A-Za-z_][A-Za-z0-9_]* — the shape required of spec names and attribute names.
bool is_identifier(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// FNV-1a, 64 bit. Stable across platforms; used for prompt hashes.
std::uint64_t fnv1a64(std::string_view s);
std::string fnv1a64_hex(std::string_view s);

// UTC wall clock as "YYYY-MM-DDTHH:MM:SSZ".
std::string now_utc_iso8601();

} // namespace hyq
