#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "spinpair/redfield.hpp"
#include "spinpair/sequences.hpp"

namespace spinpair {

/// Plain-text key/value config with [section] headers, '#' comments and
/// explicit unit suffixes on every physical quantity, e.g.
///   tau_c = 1.95e-11 s
///   J = 138 Hz            # converted to rad/s internally
/// Unknown sections or keys are errors, as are missing required keys and
/// missing/wrong units.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_text(const std::string& text, const std::string& origin = "<text>");

  bool has(const std::string& section, const std::string& key) const;

  /// Dimensioned getters convert to internal units (s, rad/s, 1/s,
  /// rad^2/s^2, K, T). Errors carry the "section.key" path.
  double time(const std::string& sec, const std::string& key) const;
  double angular_frequency(const std::string& sec, const std::string& key) const;
  double rate(const std::string& sec, const std::string& key) const;
  double second_moment(const std::string& sec, const std::string& key) const;
  double tesla(const std::string& sec, const std::string& key) const;
  double kelvin(const std::string& sec, const std::string& key) const;
  double dimensionless(const std::string& sec, const std::string& key) const;
  int64_t integer(const std::string& sec, const std::string& key) const;
  std::string word(const std::string& sec, const std::string& key) const;

  /// "0:0.02:0.6, 0.8, 1:0.5:4 s" -> expanded list of seconds.
  std::vector<double> time_list(const std::string& sec, const std::string& key) const;

  template <typename T>
  T value_or(T fallback, T (Config::*getter)(const std::string&, const std::string&) const,
             const std::string& sec, const std::string& key) const {
    return has(sec, key) ? (this->*getter)(sec, key) : fallback;
  }

  /// Raw text as read (hashed into the run manifest).
  const std::string& text() const { return text_; }

  /// Every known section/key was declared at parse time; this reports any
  /// key the schema does not know (config error, exit code 2 at the CLI).
  void validate_against_schema() const;

 private:
  struct Entry {
    std::string value;
    int line;
  };
  std::string origin_;
  std::string text_;
  std::map<std::string, std::map<std::string, Entry>> sections_;

  const Entry& entry(const std::string& sec, const std::string& key) const;
  double quantity(const std::string& sec, const std::string& key,
                  const char* dimension) const;
};

/// Exception for malformed or incomplete configs (CLI exit code 2).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// ---------------------------------------------------------------------------
// Typed views assembled from a config

struct MicroConfig {
  MicroParams params;
  bool present = false;
};

struct RatesConfig {
  DiagonalRates diag;
  OffDiagonalRates offdiag;
  double eps1 = 0.0, eps2 = 0.0;
  double omega_j = 0.0;
  bool present = false;
};

/// [micro] block; polarizations come from eps1/eps2 directly or from
/// field/temperature via the gyromagnetic ratios.
MicroConfig load_micro(const Config& c);

/// [rates] block for rate-level generation (mu12 derives from the Bell pair).
RatesConfig load_rates(const Config& c);

ExperimentGrids load_grids(const Config& c);
NoiseModel load_noise(const Config& c);

struct OracleSettings {
  double duration = 250.0;
  int n_samples = 50;
  int ensemble = 10000;
  int batches = 16;
  double dt = 0.0;
  double qot_factor = 100.0;
  double z_limit = 4.0;
};
OracleSettings load_oracle(const Config& c);

struct TelegraphSettings {
  int n_dist = 0;
  double j_dist = 0.0;  // rad/s per distant spin (coupled to spin 2)
  double t1dist = 0.0;
  double duration = 0.0;
  int n_times = 50;
  int ensemble = 10000;
  bool present = false;
};
TelegraphSettings load_telegraph(const Config& c);

struct FitSettings {
  double window_fraction = 0.2;
  double rate_guess = 1.0;
};
FitSettings load_fit(const Config& c);

}  // namespace spinpair
