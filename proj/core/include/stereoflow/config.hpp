#pragma once

#include <string>
#include <utility>
#include <vector>

namespace stereoflow {

// "key = value" settings file. '#' starts a comment, blank lines are
// skipped, repeated keys are preserved in order.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text);
  static KeyValueFile load(const std::string& path);

  bool has(const std::string& key) const;
  // Last value wins for scalar lookups.
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  unsigned long long get_uint64(const std::string& key,
                                unsigned long long fallback) const;
  std::vector<std::string> all(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace stereoflow
