#include "spinpair/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "spinpair/units.hpp"

namespace spinpair {

namespace {

// section -> key -> dimension tag. The schema is global: a key unknown to
// any command is rejected at parse time.
const std::map<std::string, std::map<std::string, const char*>>& schema() {
  static const std::map<std::string, std::map<std::string, const char*>> s = {
      {"micro",
       {{"k", "angular_frequency"},
        {"tau_c", "time"},
        {"omega1", "angular_frequency"},
        {"omega2", "angular_frequency"},
        {"J", "angular_frequency"},
        {"a1perp2", "second_moment"},
        {"a2perp2", "second_moment"},
        {"a1z2", "second_moment"},
        {"a2z2", "second_moment"},
        {"a1z2z", "second_moment"},
        {"xcorr1", "second_moment"},
        {"xcorr2", "second_moment"},
        {"aj1z2", "second_moment"},
        {"aj2z2", "second_moment"},
        {"aj12", "second_moment"},
        {"t1dist", "time"},
        {"field", "tesla"},
        {"temperature", "kelvin"},
        {"eps1", "dimensionless"},
        {"eps2", "dimensionless"}}},
      {"rates",
       {{"mu1", "rate"},
        {"mu2", "rate"},
        {"sigma12", "rate"},
        {"delta1", "rate"},
        {"delta2", "rate"},
        {"mu_zq", "rate"},
        {"mu_dq", "rate"},
        {"lambda_zq", "rate"},
        {"lambda_dq", "rate"},
        {"J", "angular_frequency"},
        {"field", "tesla"},
        {"temperature", "kelvin"},
        {"eps1", "dimensionless"},
        {"eps2", "dimensionless"}}},
      {"experiment",
       {{"ir_times", "time_list"},
        {"bell_zz_times", "time_list"},
        {"bell_xx_times", "time_list"},
        {"cpmg_tau", "time"}}},
      {"noise", {{"sigma_rel", "dimensionless"}, {"seed", "integer"}}},
      {"fit", {{"window_fraction", "dimensionless"}, {"rate_guess", "rate"}}},
      {"oracle",
       {{"duration", "time"},
        {"n_samples", "integer"},
        {"ensemble", "integer"},
        {"batches", "integer"},
        {"dt", "time"},
        {"qot_factor", "dimensionless"},
        {"z_limit", "dimensionless"}}},
      {"telegraph",
       {{"n_dist", "integer"},
        {"j_dist", "angular_frequency"},
        {"t1dist", "time"},
        {"duration", "time"},
        {"n_times", "integer"},
        {"ensemble", "integer"}}},
  };
  return s;
}

double unit_factor(const std::string& unit, const char* dimension, bool& ok) {
  ok = true;
  const std::string d = dimension;
  if (d == "time") {
    if (unit == "s") return 1.0;
    if (unit == "ms") return 1e-3;
    if (unit == "us") return 1e-6;
    if (unit == "ns") return 1e-9;
    if (unit == "ps") return 1e-12;
  } else if (d == "angular_frequency") {
    if (unit == "rad/s") return 1.0;
    if (unit == "Hz") return kTwoPi;
    if (unit == "kHz") return kTwoPi * 1e3;
    if (unit == "MHz") return kTwoPi * 1e6;
    if (unit == "GHz") return kTwoPi * 1e9;
  } else if (d == "rate") {
    if (unit == "/s" || unit == "1/s") return 1.0;
  } else if (d == "second_moment") {
    if (unit == "rad2/s2" || unit == "rad^2/s^2") return 1.0;
  } else if (d == "tesla") {
    if (unit == "T") return 1.0;
  } else if (d == "kelvin") {
    if (unit == "K") return 1.0;
  }
  ok = false;
  return 0.0;
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

Config Config::parse_text(const std::string& text, const std::string& origin) {
  Config c;
  c.origin_ = origin;
  c.text_ = text;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    // trim
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    const auto kb = key.find_last_not_of(" \t");
    key = key.substr(0, kb + 1);
    const auto vb = value.find_first_not_of(" \t");
    if (section.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": key outside any [section]");
    if (vb == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty value for " + section +
                        "." + key);
    value = value.substr(vb);
    if (c.sections_[section].count(key))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key " + section +
                        "." + key);
    c.sections_[section][key] = {value, lineno};
  }
  c.validate_against_schema();
  return c;
}

void Config::validate_against_schema() const {
  for (const auto& [sec, keys] : sections_) {
    const auto sit = schema().find(sec);
    if (sit == schema().end()) throw ConfigError(origin_ + ": unknown section [" + sec + "]");
    for (const auto& [key, entry] : keys) {
      if (!sit->second.count(key))
        throw ConfigError(origin_ + ":" + std::to_string(entry.line) + ": unknown key " + sec +
                          "." + key);
    }
  }
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto it = sections_.find(section);
  return it != sections_.end() && it->second.count(key) > 0;
}

const Config::Entry& Config::entry(const std::string& sec, const std::string& key) const {
  const auto it = sections_.find(sec);
  if (it == sections_.end() || !it->second.count(key))
    throw ConfigError(origin_ + ": missing required key " + sec + "." + key);
  return it->second.at(key);
}

double Config::quantity(const std::string& sec, const std::string& key,
                        const char* dimension) const {
  const Entry& e = entry(sec, key);
  std::istringstream in(e.value);
  double v;
  std::string unit;
  if (!(in >> v))
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": " + sec + "." + key +
                      ": not a number");
  in >> unit;
  bool ok = false;
  const double f = unit_factor(unit, dimension, ok);
  if (!ok)
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": " + sec + "." + key +
                      ": expected a value with a " + dimension + " unit, got '" + unit + "'");
  std::string extra;
  if (in >> extra)
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": " + sec + "." + key +
                      ": trailing content '" + extra + "'");
  return v * f;
}

double Config::time(const std::string& s, const std::string& k) const { return quantity(s, k, "time"); }
double Config::angular_frequency(const std::string& s, const std::string& k) const {
  return quantity(s, k, "angular_frequency");
}
double Config::rate(const std::string& s, const std::string& k) const { return quantity(s, k, "rate"); }
double Config::second_moment(const std::string& s, const std::string& k) const {
  return quantity(s, k, "second_moment");
}
double Config::tesla(const std::string& s, const std::string& k) const { return quantity(s, k, "tesla"); }
double Config::kelvin(const std::string& s, const std::string& k) const { return quantity(s, k, "kelvin"); }

double Config::dimensionless(const std::string& sec, const std::string& key) const {
  const Entry& e = entry(sec, key);
  std::istringstream in(e.value);
  double v;
  std::string extra;
  if (!(in >> v) || (in >> extra))
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": " + sec + "." + key +
                      ": expected a bare number");
  return v;
}

int64_t Config::integer(const std::string& sec, const std::string& key) const {
  const Entry& e = entry(sec, key);
  std::istringstream in(e.value);
  int64_t v;
  std::string extra;
  if (!(in >> v) || (in >> extra))
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": " + sec + "." + key +
                      ": expected an integer");
  return v;
}

std::string Config::word(const std::string& sec, const std::string& key) const {
  return entry(sec, key).value;
}

std::vector<double> Config::time_list(const std::string& sec, const std::string& key) const {
  const Entry& e = entry(sec, key);
  std::string v = e.value;
  // Unit suffix applies to the whole list; only seconds make sense here.
  if (v.size() < 2 || v.substr(v.size() - 2) != " s")
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": " + sec + "." + key +
                      ": time list must end with the unit 's'");
  v = v.substr(0, v.size() - 2);
  std::vector<double> out;
  std::istringstream items(v);
  std::string item;
  while (std::getline(items, item, ',')) {
    std::istringstream is(item);
    std::string token;
    if (!(is >> token)) continue;
    const auto c1 = token.find(':');
    if (c1 == std::string::npos) {
      out.push_back(std::stod(token));
      continue;
    }
    const auto c2 = token.find(':', c1 + 1);
    if (c2 == std::string::npos)
      throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": ranges are start:step:stop");
    const double start = std::stod(token.substr(0, c1));
    const double step = std::stod(token.substr(c1 + 1, c2 - c1 - 1));
    const double stop = std::stod(token.substr(c2 + 1));
    if (step <= 0) throw ConfigError(origin_ + ": range step must be > 0 in " + sec + "." + key);
    for (double t = start; t <= stop + 1e-12 * step; t += step) out.push_back(t);
  }
  if (out.empty())
    throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": empty time list " + sec + "." + key);
  for (size_t i = 1; i < out.size(); ++i)
    if (out[i] <= out[i - 1])
      throw ConfigError(origin_ + ": time list " + sec + "." + key + " must increase");
  return out;
}

namespace {

void fill_polarizations(const Config& c, const std::string& sec, double& eps1, double& eps2) {
  if (c.has(sec, "eps1") != c.has(sec, "eps2"))
    throw ConfigError("config: eps1 and eps2 must be given together");
  if (c.has(sec, "eps1")) {
    eps1 = c.dimensionless(sec, "eps1");
    eps2 = c.dimensionless(sec, "eps2");
    return;
  }
  if (!c.has(sec, "field") || !c.has(sec, "temperature"))
    throw ConfigError("config: [" + sec + "] needs either eps1/eps2 or field+temperature");
  const double b = c.tesla(sec, "field");
  const double t = c.kelvin(sec, "temperature");
  eps1 = polarization(kGamma1H * b, t);
  eps2 = polarization(kGamma13C * b, t);
}

}  // namespace

MicroConfig load_micro(const Config& c) {
  MicroConfig m;
  if (!c.has("micro", "k")) return m;
  m.present = true;
  MicroParams& p = m.params;
  p.k = c.angular_frequency("micro", "k");
  p.tau_c = c.time("micro", "tau_c");
  p.omega1 = c.angular_frequency("micro", "omega1");
  p.omega2 = c.angular_frequency("micro", "omega2");
  p.omega_j = c.angular_frequency("micro", "J");
  p.a1perp2 = c.second_moment("micro", "a1perp2");
  p.a2perp2 = c.second_moment("micro", "a2perp2");
  p.a1z2 = c.second_moment("micro", "a1z2");
  p.a2z2 = c.second_moment("micro", "a2z2");
  p.a1z2z = c.value_or(0.0, &Config::second_moment, "micro", "a1z2z");
  p.xcorr1 = c.value_or(0.0, &Config::second_moment, "micro", "xcorr1");
  p.xcorr2 = c.value_or(0.0, &Config::second_moment, "micro", "xcorr2");
  p.slow_j.aj1z2 = c.value_or(0.0, &Config::second_moment, "micro", "aj1z2");
  p.slow_j.aj2z2 = c.value_or(0.0, &Config::second_moment, "micro", "aj2z2");
  p.slow_j.aj12 = c.value_or(0.0, &Config::second_moment, "micro", "aj12");
  p.slow_j.t1dist = c.value_or(0.0, &Config::time, "micro", "t1dist");
  fill_polarizations(c, "micro", p.eps1, p.eps2);
  p.validate();
  return m;
}

RatesConfig load_rates(const Config& c) {
  RatesConfig r;
  if (!c.has("rates", "mu1")) return r;
  r.present = true;
  r.diag.mu1 = c.rate("rates", "mu1");
  r.diag.mu2 = c.rate("rates", "mu2");
  r.diag.sigma12 = c.rate("rates", "sigma12");
  r.diag.delta1 = c.rate("rates", "delta1");
  r.diag.delta2 = c.rate("rates", "delta2");
  const double mu_zq = c.rate("rates", "mu_zq");
  const double mu_dq = c.rate("rates", "mu_dq");
  r.diag.mu12 = 0.5 * (mu_zq + mu_dq);
  // Rate-level configs carry only the totals; store them in the dipolar slot.
  r.offdiag.zq_d = c.rate("rates", "lambda_zq");
  r.offdiag.dq_d = c.rate("rates", "lambda_dq");
  r.omega_j = c.angular_frequency("rates", "J");
  fill_polarizations(c, "rates", r.eps1, r.eps2);
  return r;
}

ExperimentGrids load_grids(const Config& c) {
  ExperimentGrids g;
  g.ir_times = c.time_list("experiment", "ir_times");
  g.bell_zz_times = c.time_list("experiment", "bell_zz_times");
  g.bell_xx_times = c.time_list("experiment", "bell_xx_times");
  g.cpmg_tau = c.value_or(1e-3, &Config::time, "experiment", "cpmg_tau");
  return g;
}

NoiseModel load_noise(const Config& c) {
  NoiseModel n;
  n.sigma_rel = c.value_or(0.0, &Config::dimensionless, "noise", "sigma_rel");
  n.seed = c.has("noise", "seed") ? static_cast<uint64_t>(c.integer("noise", "seed")) : 0;
  return n;
}

OracleSettings load_oracle(const Config& c) {
  OracleSettings o;
  if (c.has("oracle", "duration")) o.duration = c.time("oracle", "duration");
  if (c.has("oracle", "n_samples")) o.n_samples = static_cast<int>(c.integer("oracle", "n_samples"));
  if (c.has("oracle", "ensemble")) o.ensemble = static_cast<int>(c.integer("oracle", "ensemble"));
  if (c.has("oracle", "batches")) o.batches = static_cast<int>(c.integer("oracle", "batches"));
  if (c.has("oracle", "dt")) o.dt = c.time("oracle", "dt");
  if (c.has("oracle", "qot_factor")) o.qot_factor = c.dimensionless("oracle", "qot_factor");
  if (c.has("oracle", "z_limit")) o.z_limit = c.dimensionless("oracle", "z_limit");
  return o;
}

TelegraphSettings load_telegraph(const Config& c) {
  TelegraphSettings t;
  if (!c.has("telegraph", "n_dist")) return t;
  t.present = true;
  t.n_dist = static_cast<int>(c.integer("telegraph", "n_dist"));
  t.j_dist = c.angular_frequency("telegraph", "j_dist");
  t.t1dist = c.time("telegraph", "t1dist");
  t.duration = c.time("telegraph", "duration");
  t.n_times = static_cast<int>(c.integer("telegraph", "n_times"));
  t.ensemble = static_cast<int>(c.integer("telegraph", "ensemble"));
  return t;
}

FitSettings load_fit(const Config& c) {
  FitSettings f;
  f.window_fraction = c.value_or(0.2, &Config::dimensionless, "fit", "window_fraction");
  f.rate_guess = c.value_or(1.0, &Config::rate, "fit", "rate_guess");
  return f;
}

}  // namespace spinpair
