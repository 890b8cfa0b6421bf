#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mc {

// key=value text with '#' comments. Unknown keys are kept so that one file can
// carry settings for several components.
class KeyValues {
public:
  static KeyValues parse(std::string_view text);
  static KeyValues load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key) const; // comma separated

  // Entries whose key starts with prefix, with the prefix stripped.
  KeyValues with_prefix(const std::string& prefix) const;
  void set(const std::string& key, std::string value) { values_[key] = {std::move(value), 0}; }

private:
  struct Entry {
    std::string value;
    std::size_t line;
  };
  const Entry* find(const std::string& key) const;
  std::map<std::string, Entry> values_;
};

} // namespace mc
