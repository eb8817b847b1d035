#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace eamon {

/// `key = value` lines; `#` starts a comment; keys may repeat. Values are raw strings.
class KeyValueFile {
 public:
  static KeyValueFile parse(std::string_view text, const std::string& origin = "<text>");
  static KeyValueFile load(const std::filesystem::path& path);

  bool contains(std::string_view key) const;
  /// Last occurrence wins.
  std::optional<std::string> find(std::string_view key) const;
  std::vector<std::string> all(std::string_view key) const;
  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

  /// Throws ParseError if missing or not a finite number.
  double get_double(std::string_view key) const;
  double get_double(std::string_view key, double fallback) const;

 private:
  std::string origin_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Strict number parsing for config values and CLI lists. Throws ParseError.
double parse_double(std::string_view text, std::string_view what);
std::vector<double> parse_double_list(std::string_view text, std::string_view what);

}  // namespace eamon
