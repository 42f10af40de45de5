#include "spinpair/manifest.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace spinpair {

uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex16(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

RunManifest::RunManifest(std::string command, uint64_t config_hash, uint64_t seed,
                         std::string kernel, int threads)
    : command_(std::move(command)),
      kernel_(std::move(kernel)),
      config_hash_(config_hash),
      seed_(seed),
      threads_(threads) {}

void RunManifest::write_output(const std::string& path, const std::string& bytes) {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file '" + path + "'");
  out << bytes;
  outputs_[path] = fnv1a64(bytes);
}

void RunManifest::add_timing(const std::string& name, double milliseconds) {
  timings_[name] = milliseconds;
}

std::string RunManifest::csv_header() const {
  return "# " + std::string(kArtifactVersion) + " " + command_ + " config=" + hex16(config_hash_) +
         " seed=" + std::to_string(seed_) + "\n";
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["artifact"] = kArtifactVersion;
  j["command"] = command_;
  j["config_hash"] = hex16(config_hash_);
  j["seed"] = seed_;
  j["kernel"] = kernel_;
  j["threads"] = threads_;
  for (const auto& [path, sum] : outputs_) j["outputs"][path] = hex16(sum);
  for (const auto& [name, ms] : timings_) j["timings_ms"][name] = ms;
  return j.dump(2) + "\n";
}

void RunManifest::write(const std::string& path) const {
  std::filesystem::create_directories(std::filesystem::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest '" + path + "'");
  out << to_json();
}

}  // namespace spinpair
