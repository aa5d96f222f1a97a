#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ioeq {

// Parse error carrying the 1-based line number of the offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Flat key-value configuration text: one `key = value` per line, `#` starts
// a comment, blank lines ignored. Keys keep their first-seen order so that
// serialization is diff-stable; duplicate keys are rejected.
class KvFile {
 public:
  KvFile() = default;

  static KvFile parse_file(const std::string& path);
  static KvFile parse_text(const std::string& text);

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int_or(const std::string& key, long long fallback) const;

  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double value);
  void set_int(const std::string& key, long long value);

  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

  std::string serialize() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace ioeq
