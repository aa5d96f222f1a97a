#include "ioeq/manifest.hpp"

#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ioeq/hash.hpp"
#include "ioeq/version.hpp"

namespace ioeq {

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file for digest: " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
  }
  return "fnv64:" + hex64(h);
}

RunManifest::RunManifest() {
  kv_.set("tool_version", kVersion);
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  kv_.set_int("created_unix",
              std::chrono::duration_cast<std::chrono::seconds>(now).count());
}

void RunManifest::record_input(const std::string& label, const std::string& path) {
  kv_.set("input." + label, file_digest(path));
}

void RunManifest::record_output(const std::string& label, const std::string& path) {
  kv_.set("output." + label, file_digest(path));
}

std::vector<std::pair<std::string, std::string>> RunManifest::digest_entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : kv_.entries()) {
    if (e.first.rfind("input.", 0) == 0 || e.first.rfind("output.", 0) == 0) {
      out.push_back(e);
    }
  }
  return out;
}

void RunManifest::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << serialize();
}

RunManifest RunManifest::load(const std::string& path) {
  RunManifest m;
  m.kv_ = KvFile::parse_file(path);
  return m;
}

}  // namespace ioeq
