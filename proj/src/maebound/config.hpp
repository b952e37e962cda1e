#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace maebound {

/// Plain-text `section.key = value` file. Blank lines and `#` comments are
/// ignored; keys keep their file order and may not repeat.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text);

  [[nodiscard]] bool contains(std::string_view key) const;
  [[nodiscard]] std::optional<std::string> get(std::string_view key) const;
  [[nodiscard]] std::string require_string(std::string_view key) const;

  [[nodiscard]] std::string get_string(std::string_view key, std::string fallback) const;
  [[nodiscard]] double get_double(std::string_view key, double fallback) const;
  [[nodiscard]] double require_double(std::string_view key) const;
  [[nodiscard]] std::uint64_t get_u64(std::string_view key, std::uint64_t fallback) const;
  [[nodiscard]] bool get_bool(std::string_view key, bool fallback) const;

  /// Entries whose key starts with `prefix`, in file order, prefix stripped.
  [[nodiscard]] std::vector<std::pair<std::string, std::string>> with_prefix(std::string_view prefix) const;
  [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

  /// Sorted `key=value` lines; independent of whitespace, comments and order.
  [[nodiscard]] std::string canonical() const;
  /// FNV-1a 64 of canonical(), as 16 hex digits.
  [[nodiscard]] std::string fingerprint() const;

  void set(std::string key, std::string value);

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace maebound
