#pragma once

#include <optional>
#include <string>
#include <vector>

namespace bwe {

// Line-based `section.key = value` text. '#' starts a comment, blank lines
// are ignored, duplicate keys are an error. Insertion order is kept so a
// serialized config reads the same way it was written.
class TextConfig {
 public:
  static TextConfig parse(const std::string& text, const std::string& source = "config");

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;
  void erase(const std::string& key);
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string serialize() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace bwe
