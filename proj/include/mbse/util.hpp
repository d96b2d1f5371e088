#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace mbse {

// SplitMix64 step; used to derive independent RNG streams from one seed.
std::uint64_t mix64(std::uint64_t x);

bool is_valid_utf8(std::string_view bytes);

std::string lowercase_ascii(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);

// Reads a whole file; path "-" reads standard input.
std::string read_file(const std::string& path);

// Writes via temp file + rename so readers never see a truncated file.
// Path "-" streams to standard output.
void atomic_write_file(const std::string& path, std::string_view content);

// Runs fn(i) for i in [0, n) on `jobs` threads. Results must be written to
// index-addressed storage by the caller; completion order is unspecified.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace mbse
