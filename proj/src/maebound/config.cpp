#include "maebound/config.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "maebound/error.hpp"
#include "maebound/numerics.hpp"

namespace maebound {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
  KeyValueConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    require(eq != std::string::npos, ErrorKind::Config, "line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(std::string_view(body).substr(0, eq));
    std::string value = trim(std::string_view(body).substr(eq + 1));
    require(!key.empty(), ErrorKind::Config, "line " + std::to_string(lineno) + ": empty key");
    require(!cfg.contains(key), ErrorKind::Config, "line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    cfg.entries_.emplace_back(std::move(key), std::move(value));
  }
  return cfg;
}

bool KeyValueConfig::contains(std::string_view key) const { return get(key).has_value(); }

std::optional<std::string> KeyValueConfig::get(std::string_view key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

std::string KeyValueConfig::require_string(std::string_view key) const {
  auto v = get(key);
  require(v.has_value(), ErrorKind::Config, "missing required key '" + std::string(key) + "'");
  return *v;
}

std::string KeyValueConfig::get_string(std::string_view key, std::string fallback) const {
  auto v = get(key);
  return v ? *v : std::move(fallback);
}

double KeyValueConfig::get_double(std::string_view key, double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used == v->size()) return d;
  } catch (const std::exception&) {
  }
  fail(ErrorKind::Config, "key '" + std::string(key) + "': '" + *v + "' is not a number");
}

double KeyValueConfig::require_double(std::string_view key) const {
  require(contains(key), ErrorKind::Config, "missing required key '" + std::string(key) + "'");
  return get_double(key, 0.0);
}

std::uint64_t KeyValueConfig::get_u64(std::string_view key, std::uint64_t fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    if (!v->empty() && (*v)[0] != '-') {
      const auto n = std::stoull(*v, &used);
      if (used == v->size()) return n;
    }
  } catch (const std::exception&) {
  }
  fail(ErrorKind::Config, "key '" + std::string(key) + "': '" + *v + "' is not a nonnegative integer");
}

bool KeyValueConfig::get_bool(std::string_view key, bool fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes" || *v == "on") return true;
  if (*v == "false" || *v == "0" || *v == "no" || *v == "off") return false;
  fail(ErrorKind::Config, "key '" + std::string(key) + "': '" + *v + "' is not a boolean");
}

std::vector<std::pair<std::string, std::string>> KeyValueConfig::with_prefix(std::string_view prefix) const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [k, v] : entries_)
    if (k.size() > prefix.size() && std::string_view(k).substr(0, prefix.size()) == prefix)
      out.emplace_back(k.substr(prefix.size()), v);
  return out;
}

std::string KeyValueConfig::canonical() const {
  auto sorted = entries_;
  std::sort(sorted.begin(), sorted.end());
  std::string out;
  for (const auto& [k, v] : sorted) out += k + '=' + v + '\n';
  return out;
}

std::string KeyValueConfig::fingerprint() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

void KeyValueConfig::set(std::string key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

}  // namespace maebound
