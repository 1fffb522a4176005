#include "vaporsim/kvfile.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vaporsim {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

KvFile KvFile::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

KvFile KvFile::parse_text(const std::string& text, const std::string& origin) {
  KvFile kv;
  kv.origin_ = origin;
  kv.raw_ = text;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) {
      line.erase(pos);
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                 ": unterminated section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                               ": expected 'key = value'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                               ": empty key");
    }
    if (!value.empty() && value.front() == '"' && value.back() == '"' &&
        value.size() >= 2) {
      value = value.substr(1, value.size() - 2);
    }
    if (!section.empty()) key = section + "." + key;
    if (kv.entries_.count(key)) {
      throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                               ": duplicate key '" + key + "'");
    }
    kv.entries_[key] = value;
  }
  return kv;
}

bool KvFile::has(const std::string& key) const {
  return entries_.count(key) != 0;
}

std::string KvFile::lookup(const std::string& key) {
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw std::runtime_error(origin_ + ": missing required key '" + key + "'");
  }
  consumed_.insert(key);
  return it->second;
}

std::string KvFile::require_string(const std::string& key) {
  return lookup(key);
}

double KvFile::require_double(const std::string& key) {
  const std::string v = lookup(key);
  try {
    size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::runtime_error(origin_ + ": key '" + key +
                             "' is not a number: '" + v + "'");
  }
}

long KvFile::require_int(const std::string& key) {
  const std::string v = lookup(key);
  try {
    size_t used = 0;
    long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw std::runtime_error(origin_ + ": key '" + key +
                             "' is not an integer: '" + v + "'");
  }
}

std::string KvFile::get_string(const std::string& key,
                               const std::string& fallback) {
  return has(key) ? lookup(key) : fallback;
}

double KvFile::get_double(const std::string& key, double fallback) {
  return has(key) ? require_double(key) : fallback;
}

long KvFile::get_int(const std::string& key, long fallback) {
  return has(key) ? require_int(key) : fallback;
}

bool KvFile::get_bool(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  std::string v = lookup(key);
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::runtime_error(origin_ + ": key '" + key +
                           "' is not a boolean: '" + v + "'");
}

std::vector<double> KvFile::get_double_list(const std::string& key) {
  std::vector<double> out;
  if (!has(key)) return out;
  std::istringstream in(lookup(key));
  std::string tok;
  while (in >> tok) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw std::runtime_error(origin_ + ": key '" + key +
                               "' has a non-numeric entry: '" + tok + "'");
    }
  }
  return out;
}

std::vector<std::string> KvFile::unconsumed_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) {
    if (!consumed_.count(k)) out.push_back(k);
  }
  return out;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace vaporsim
