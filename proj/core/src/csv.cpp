#include "uavpheno/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "uavpheno/error.hpp"

namespace uavpheno::csv {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) {
      return k;
    }
  }
  throw InputError("CSV is missing column '" + std::string(name) + "'");
}

Table parse(std::string_view text, bool has_header) {
  Table table;
  bool header_done = !has_header;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    const std::string_view line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty()) {
      continue;
    }
    if (!header_done) {
      table.header = split(line);
      header_done = true;
    } else {
      table.rows.push_back(split(line));
    }
  }
  return table;
}

Table read(const std::filesystem::path& path, bool has_header) {
  return parse(read_text(path), has_header);
}

void require_header(const Table& table, const std::vector<std::string>& names,
                    std::string_view what) {
  bool ok = table.header.size() >= names.size();
  for (std::size_t k = 0; ok && k < names.size(); ++k) {
    ok = table.header[k] == names[k];
  }
  if (!ok) {
    std::string expected;
    for (const auto& n : names) {
      expected += (expected.empty() ? "" : ",") + n;
    }
    throw InputError(std::string(what) + ": expected CSV header '" + expected + "'");
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.rows[r].size() < names.size()) {
      throw InputError(std::string(what) + ": row " + std::to_string(r + 1) + " has " +
                       std::to_string(table.rows[r].size()) + " fields");
    }
  }
}

double to_double(std::string_view field, std::string_view what) {
  double v = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  if (!field.empty() && *first == '+') {
    ++first;
  }
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) {
    throw InputError(std::string(what) + ": '" + std::string(field) + "' is not a number");
  }
  return v;
}

long long to_int(std::string_view field, std::string_view what) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw InputError(std::string(what) + ": '" + std::string(field) + "' is not an integer");
  }
  return v;
}

std::string format(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw InputError("cannot open '" + path.string() + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw InputError("cannot write '" + path.string() + "'");
  }
  out << text;
  if (!out) {
    throw InputError("write failed for '" + path.string() + "'");
  }
}

}  // namespace uavpheno::csv
