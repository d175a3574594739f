#ifndef DISSOLVE_KEYVALUE_HPP
#define DISSOLVE_KEYVALUE_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dissolve {

/// One `[name]` section of a key=value file. Keys before the first header
/// land in a section with an empty name.
struct KeyValueSection {
  std::string name;
  std::vector<std::pair<std::string, std::string>> entries;

  std::optional<std::string> find(std::string_view key) const;
  void set(std::string key, std::string value);
};

/// Minimal UTF-8 `key=value` format with `[section]` headers and `#` comments.
struct KeyValueFile {
  std::vector<KeyValueSection> sections;

  /// Throws ParseError on malformed lines or duplicate keys within a section.
  static KeyValueFile parse(std::string_view text, const std::string& origin);
  /// Throws IoError if the file cannot be read.
  static KeyValueFile read(const std::filesystem::path& path);

  const KeyValueSection* section(std::string_view name) const;
  KeyValueSection& add_section(std::string name);
  std::string render() const;
};

}  // namespace dissolve

#endif  // DISSOLVE_KEYVALUE_HPP
