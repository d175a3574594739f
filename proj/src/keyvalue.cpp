#include "dissolve/keyvalue.hpp"

#include "dissolve/csv.hpp"
#include "dissolve/types.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace dissolve {

std::optional<std::string> KeyValueSection::find(std::string_view key) const {
  for (const auto& [k, v] : entries) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void KeyValueSection::set(std::string key, std::string value) {
  for (auto& [k, v] : entries) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries.emplace_back(std::move(key), std::move(value));
}

KeyValueFile KeyValueFile::parse(std::string_view text, const std::string& origin) {
  KeyValueFile file;
  file.sections.push_back({});
  std::set<std::string> seen_sections{""};
  std::set<std::string> seen_keys;

  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++lineno;
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;

    auto fail = [&](const std::string& what) {
      throw ParseError(origin + ":" + std::to_string(lineno) + ": " + what);
    };
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      std::string name(trim(line.substr(1, line.size() - 2)));
      if (name.empty()) fail("empty section name");
      if (!seen_sections.insert(name).second) fail("duplicate section [" + name + "]");
      file.sections.push_back({name, {}});
      seen_keys.clear();
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) fail("expected key=value");
    std::string key(trim(line.substr(0, eq)));
    std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) fail("empty key");
    if (!seen_keys.insert(key).second) fail("duplicate key '" + key + "'");
    file.sections.back().entries.emplace_back(std::move(key), std::move(value));
  }
  return file;
}

KeyValueFile KeyValueFile::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

const KeyValueSection* KeyValueFile::section(std::string_view name) const {
  for (const auto& s : sections) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

KeyValueSection& KeyValueFile::add_section(std::string name) {
  sections.push_back({std::move(name), {}});
  return sections.back();
}

std::string KeyValueFile::render() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& s : sections) {
    if (s.name.empty() && s.entries.empty()) continue;
    if (!first) os << '\n';
    first = false;
    if (!s.name.empty()) os << '[' << s.name << "]\n";
    for (const auto& [k, v] : s.entries) os << k << '=' << v << '\n';
  }
  return os.str();
}

}  // namespace dissolve
