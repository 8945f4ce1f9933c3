#include "stereoflow/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "stereoflow/errors.hpp"

namespace stereoflow {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text) {
  KeyValueFile kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    }
    kv.entries_.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool KeyValueFile::has(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return true;
  }
  return false;
}

std::string KeyValueFile::get(const std::string& key,
                              const std::string& fallback) const {
  std::string out = fallback;
  for (const auto& [k, v] : entries_) {
    if (k == key) out = v;
  }
  return out;
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
  const std::string s = get(key, "");
  if (s.empty()) return fallback;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw ConfigError("key '" + key + "': not a number: " + s);
  }
  return v;
}

int KeyValueFile::get_int(const std::string& key, int fallback) const {
  const double v = get_double(key, static_cast<double>(fallback));
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) {
    throw ConfigError("key '" + key + "': not an integer");
  }
  return i;
}

unsigned long long KeyValueFile::get_uint64(const std::string& key,
                                            unsigned long long fallback) const {
  const std::string s = get(key, "");
  if (s.empty()) return fallback;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0') {
    throw ConfigError("key '" + key + "': not an unsigned integer: " + s);
  }
  return v;
}

std::vector<std::string> KeyValueFile::all(const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (k == key) out.push_back(v);
  }
  return out;
}

}  // namespace stereoflow
