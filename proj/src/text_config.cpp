#include "bwe/text_config.hpp"

#include <algorithm>
#include <sstream>

#include "bwe/error.hpp"

namespace bwe {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
  const auto dot = k.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == k.size()) return false;
  return std::all_of(k.begin(), k.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  });
}

}  // namespace

TextConfig TextConfig::parse(const std::string& text, const std::string& source) {
  TextConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line.substr(0, line.find('#')));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'section.key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (!valid_key(key)) throw ConfigError(where + ": malformed key '" + key + "'");
    if (cfg.has(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    cfg.entries_.emplace_back(key, value);
  }
  return cfg;
}

void TextConfig::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw ConfigError("malformed key '" + key + "'");
  if (value.find_first_of("#\r\n") != std::string::npos || trim(value) != value)
    throw ConfigError(key + ": value cannot be written as a config line");
  for (auto& [k, v] : entries_)
    if (k == key) {
      v = value;
      return;
    }
  entries_.emplace_back(key, value);
}

bool TextConfig::has(const std::string& key) const { return get(key).has_value(); }

std::optional<std::string> TextConfig::get(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  return std::nullopt;
}

void TextConfig::erase(const std::string& key) {
  std::erase_if(entries_, [&](const auto& e) { return e.first == key; });
}

std::string TextConfig::serialize() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace bwe
