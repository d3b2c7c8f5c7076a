#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gripstream {

// "key = value" text files shared by the device config, simulation plans and
// session metadata. Blank lines and lines starting with '#' are ignored. Keys
// are unique; the order of first appearance is preserved.
class KeyValueFile {
 public:
  struct Entry {
    std::string key;
    std::string value;
    std::size_t line = 0;
  };

  static KeyValueFile parse(std::istream& in, std::string source_name);
  static KeyValueFile load(const std::string& path);

  const std::string& source() const { return source_; }
  const std::vector<Entry>& entries() const { return entries_; }

  const Entry* find(std::string_view key) const;
  bool contains(std::string_view key) const { return find(key) != nullptr; }

  std::optional<std::string> get_string(std::string_view key) const;
  std::optional<double> get_double(std::string_view key) const;
  std::optional<std::int64_t> get_int(std::string_view key) const;
  std::optional<std::uint64_t> get_uint(std::string_view key) const;

  // Throws ParseError naming the first key not in `known` (exact match or,
  // for entries ending in '.', prefix match).
  void reject_unknown(const std::vector<std::string_view>& known) const;

 private:
  std::string source_;
  std::vector<Entry> entries_;
};

// Strict numeric parsing helpers; the whole string must be consumed.
std::optional<double> parse_double(std::string_view text);
std::optional<std::int64_t> parse_int(std::string_view text);
std::optional<std::uint64_t> parse_uint(std::string_view text);

std::string_view trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char delimiter);

// Shortest decimal text that reads back to exactly the same double.
std::string format_double(double value);

}  // namespace gripstream
