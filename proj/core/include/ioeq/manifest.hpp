#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ioeq/kv.hpp"

namespace ioeq {

// Content digest of a file: "fnv64:" + 16 lowercase hex digits over raw bytes.
std::string file_digest(const std::string& path);

// Record of one command invocation: tool version, command line, config
// snapshot, seeds, counters, and content digests of every input and output.
// Everything except `created_unix` is a pure function of (inputs, flags,
// seed), so two runs agree on all digest entries.
class RunManifest {
 public:
  RunManifest();

  void set(const std::string& key, const std::string& value) { kv_.set(key, value); }
  void set_int(const std::string& key, long long value) { kv_.set_int(key, value); }
  void set_double(const std::string& key, double value) { kv_.set_double(key, value); }

  // Digest `path` and store it under "input.<label>" / "output.<label>".
  void record_input(const std::string& label, const std::string& path);
  void record_output(const std::string& label, const std::string& path);

  const KvFile& kv() const { return kv_; }

  // Just the digest entries, for rerun comparisons that must ignore clocks.
  std::vector<std::pair<std::string, std::string>> digest_entries() const;

  std::string serialize() const { return kv_.serialize(); }
  void save(const std::string& path) const;
  static RunManifest load(const std::string& path);

 private:
  KvFile kv_;
};

}  // namespace ioeq
