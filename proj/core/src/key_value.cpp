#include "gripstream/key_value.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <system_error>

#include "gripstream/error.hpp"

namespace gripstream {

std::string_view trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return text.substr(first, last - first + 1);
}

std::vector<std::string> split(std::string_view text, char delimiter) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(delimiter, start);
    parts.emplace_back(trim(text.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<std::int64_t> parse_int(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  std::int64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<std::uint64_t> parse_uint(std::string_view text) {
  text = trim(text);
  if (text.empty() || text.front() == '-') return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ec == std::errc{} ? ptr : buf);
}

KeyValueFile KeyValueFile::parse(std::istream& in, std::string source_name) {
  KeyValueFile file;
  file.source_ = std::move(source_name);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(file.source_, line_no, "expected 'key = value'");
    }
    std::string key{trim(line.substr(0, eq))};
    if (key.empty()) throw ParseError(file.source_, line_no, "empty key");
    if (file.find(key) != nullptr) {
      throw ParseError(file.source_, line_no, "duplicate key '" + key + "'");
    }
    file.entries_.push_back(Entry{std::move(key), std::string{trim(line.substr(eq + 1))}, line_no});
  }
  return file;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse(in, path);
}

const KeyValueFile::Entry* KeyValueFile::find(std::string_view key) const {
  for (const auto& e : entries_) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

std::optional<std::string> KeyValueFile::get_string(std::string_view key) const {
  if (const auto* e = find(key)) return e->value;
  return std::nullopt;
}

std::optional<double> KeyValueFile::get_double(std::string_view key) const {
  const auto* e = find(key);
  if (e == nullptr) return std::nullopt;
  auto v = parse_double(e->value);
  if (!v) throw ParseError(source_, e->line, "'" + e->key + "' is not a number: " + e->value);
  return v;
}

std::optional<std::int64_t> KeyValueFile::get_int(std::string_view key) const {
  const auto* e = find(key);
  if (e == nullptr) return std::nullopt;
  auto v = parse_int(e->value);
  if (!v) throw ParseError(source_, e->line, "'" + e->key + "' is not an integer: " + e->value);
  return v;
}

std::optional<std::uint64_t> KeyValueFile::get_uint(std::string_view key) const {
  const auto* e = find(key);
  if (e == nullptr) return std::nullopt;
  auto v = parse_uint(e->value);
  if (!v) {
    throw ParseError(source_, e->line,
                     "'" + e->key + "' is not a non-negative integer: " + e->value);
  }
  return v;
}

void KeyValueFile::reject_unknown(const std::vector<std::string_view>& known) const {
  for (const auto& e : entries_) {
    bool ok = false;
    for (auto k : known) {
      if (!k.empty() && k.back() == '.') {
        ok = std::string_view{e.key}.starts_with(k);
      } else {
        ok = e.key == k;
      }
      if (ok) break;
    }
    if (!ok) throw ParseError(source_, e.line, "unknown key '" + e.key + "'");
  }
}

}  // namespace gripstream
