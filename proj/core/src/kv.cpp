#include "ioeq/kv.hpp"

#include <fstream>
#include <sstream>

#include "ioeq/csv.hpp"

namespace ioeq {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KvFile KvFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open config file: " + path);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str());
}

KvFile KvFile::parse_text(const std::string& text) {
  KvFile kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected `key = value`", lineno);
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw ParseError("empty key", lineno);
    }
    if (kv.index_.count(key)) {
      throw ParseError("duplicate key `" + key + "`", lineno);
    }
    kv.index_[key] = kv.entries_.size();
    kv.entries_.emplace_back(key, value);
  }
  return kv;
}

bool KvFile::has(const std::string& key) const { return index_.count(key) > 0; }

const std::string& KvFile::get(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) {
    throw std::out_of_range("missing config key: " + key);
  }
  return entries_[it->second].second;
}

std::string KvFile::get_or(const std::string& key,
                           const std::string& fallback) const {
  auto it = index_.find(key);
  return it == index_.end() ? fallback : entries_[it->second].second;
}

double KvFile::get_double(const std::string& key) const {
  return parse_double(get(key));
}

double KvFile::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long KvFile::get_int(const std::string& key) const {
  return parse_int(get(key));
}

long long KvFile::get_int_or(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

void KvFile::set(const std::string& key, const std::string& value) {
  auto it = index_.find(key);
  if (it != index_.end()) {
    entries_[it->second].second = value;
    return;
  }
  index_[key] = entries_.size();
  entries_.emplace_back(key, value);
}

void KvFile::set_double(const std::string& key, double value) {
  set(key, format_double(value));
}

void KvFile::set_int(const std::string& key, long long value) {
  set(key, std::to_string(value));
}

std::string KvFile::serialize() const {
  std::string out;
  for (const auto& [k, v] : entries_) {
    out += k;
    out += " = ";
    out += v;
    out += '\n';
  }
  return out;
}

}  // namespace ioeq
