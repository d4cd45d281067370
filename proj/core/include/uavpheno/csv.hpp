#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace uavpheno::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index of `name`; throws InputError if absent.
  std::size_t column(std::string_view name) const;
};

/// Splits comma-separated text. Blank lines are skipped, fields are trimmed,
/// no quoting. With `has_header` the first line becomes the header.
Table parse(std::string_view text, bool has_header = true);
Table read(const std::filesystem::path& path, bool has_header = true);

/// Throws InputError unless the header starts with exactly these names.
void require_header(const Table& table, const std::vector<std::string>& names,
                    std::string_view what);

double to_double(std::string_view field, std::string_view what);
long long to_int(std::string_view field, std::string_view what);

/// Shortest decimal representation that round-trips, locale independent.
std::string format(double value);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace uavpheno::csv
