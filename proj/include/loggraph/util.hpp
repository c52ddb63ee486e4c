#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace loggraph::util {

// FNV-1a, 64 bit. Used for stub-response keys and fallback session keys.
std::uint64_t fnv1a64(std::string_view data);

std::string to_hex(std::uint64_t value);

// SHA-256 hex digest (lowercase). Backed by OpenSSL.
std::string sha256_hex(std::string_view data);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

// Microseconds since the Unix epoch, UTC.
using Micros = std::int64_t;

// Accepts "YYYY-MM-DD HH:MM:SS", "YYYY-MM-DDTHH:MM:SS", optional fractional
// seconds and optional "Z" / "+HH:MM" / "-HHMM" offset. No offset means UTC.
std::optional<Micros> parse_datetime(std::string_view text);

// Canonical form: "YYYY-MM-DDTHH:MM:SSZ", fractional part kept when nonzero.
std::string format_datetime(Micros micros);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// Write to a sibling temp file, then rename over the target.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace loggraph::util
