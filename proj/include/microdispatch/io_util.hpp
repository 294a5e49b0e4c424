#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace microdispatch::io {

// Shortest representation that round-trips to the same double.
std::string format_double(double v);

double parse_double(std::string_view text, const std::string& context);
long long parse_int(std::string_view text, const std::string& context);

std::vector<std::string> split_csv_line(std::string_view line);
// RFC-4180 quoting when the field needs it.
std::string csv_field(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

// Reads a `hour,value` sidecar with hours 0..steps-1.
std::vector<double> read_profile_csv(const std::filesystem::path& path, int steps);

// SplitMix64 finalizer; used to derive independent RNG seeds from (seed, index...).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace microdispatch::io
