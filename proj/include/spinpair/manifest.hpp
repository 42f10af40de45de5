#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace spinpair {

inline constexpr const char* kArtifactVersion = "spinpair 1.0.0";

/// FNV-1a 64-bit; used for config hashes and output checksums.
uint64_t fnv1a64(const std::string& bytes);

std::string hex16(uint64_t v);

/// Accumulates per-output checksums and wall-clock timings, then serializes
/// to manifest.json. Re-running with the same config and seed reproduces
/// every data file byte-for-byte; the manifest's timing block is the only
/// thing that varies.
class RunManifest {
 public:
  RunManifest(std::string command, uint64_t config_hash, uint64_t seed, std::string kernel,
              int threads);

  /// Writes a data file and records its checksum.
  void write_output(const std::string& path, const std::string& bytes);

  void add_timing(const std::string& name, double milliseconds);

  /// Stable per-file header line referencing this run.
  std::string csv_header() const;

  std::string to_json() const;
  void write(const std::string& path) const;

  uint64_t config_hash() const { return config_hash_; }
  uint64_t seed() const { return seed_; }

 private:
  std::string command_, kernel_;
  uint64_t config_hash_ = 0, seed_ = 0;
  int threads_ = 1;
  std::map<std::string, uint64_t> outputs_;
  std::map<std::string, double> timings_;
};

}  // namespace spinpair
