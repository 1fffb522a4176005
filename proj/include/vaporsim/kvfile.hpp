#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace vaporsim {

// Line-oriented "key = value" file with optional [section] headers that
// prefix subsequent keys as "section.key". '#' starts a comment. Used for
// both the atomic data file and CLI run configs, so both share one syntax.
class KvFile {
 public:
  static KvFile parse_file(const std::string& path);
  static KvFile parse_text(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const;
  // Typed getters mark the key consumed; require_* throw std::runtime_error
  // naming the missing key, get_* fall back to a default.
  std::string require_string(const std::string& key);
  double require_double(const std::string& key);
  long require_int(const std::string& key);
  std::string get_string(const std::string& key, const std::string& fallback);
  double get_double(const std::string& key, double fallback);
  long get_int(const std::string& key, long fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::vector<double> get_double_list(const std::string& key);

  // Insert or overwrite one entry; command-line overrides go through here.
  void set(const std::string& key, const std::string& value) {
    entries_[key] = value;
  }

  // Keys present in the file but never consumed by a getter; used to reject
  // unknown config keys by name.
  std::vector<std::string> unconsumed_keys() const;
  const std::map<std::string, std::string>& entries() const { return entries_; }
  const std::string& origin() const { return origin_; }
  const std::string& raw_text() const { return raw_; }

 private:
  std::string lookup(const std::string& key);

  std::map<std::string, std::string> entries_;
  std::set<std::string> consumed_;
  std::string origin_;
  std::string raw_;
};

// FNV-1a 64-bit hash, printed as 16 hex digits; used for config hashes in
// run manifests.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace vaporsim
