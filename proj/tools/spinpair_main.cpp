// Command-line front end: reproducible runs of the analytic rate engine, the
// synthetic experiment battery, rate extraction, the brute-force oracles and
// tomography. Exit codes: 0 success, 2 config error, 3 fit failure, 4 oracle
// z-score breach.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "spinpair/config.hpp"
#include "spinpair/fitting.hpp"
#include "spinpair/manifest.hpp"
#include "spinpair/measure.hpp"
#include "spinpair/oracle.hpp"
#include "spinpair/rng.hpp"
#include "spinpair/sequences.hpp"
#include "spinpair/units.hpp"

using nlohmann::json;
using namespace spinpair;

namespace {

struct GlobalOpts {
  std::string config_path;
  std::string out_dir = "out";
  uint64_t seed = 1;
  int threads = 1;
  std::string kernel = "auto";
};

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  }
};

json meas_json(double value, double stat, double sys) {
  return json{{"value", value}, {"stat_err", stat}, {"sys_err", sys}};
}

json rate_meas_json(const RateMeas& m) { return meas_json(m.value, m.stat_err, m.sys_err); }

json diag_json(const DiagonalRates& d) {
  json j;
  j["mu1"] = d.mu1;
  j["mu2"] = d.mu2;
  j["mu12"] = d.mu12;
  j["sigma12"] = d.sigma12;
  j["delta1"] = d.delta1;
  j["delta2"] = d.delta2;
  j["dipolar"] = {{"mu1_d", d.mu1_d}, {"mu2_d", d.mu2_d}, {"mu12_d", d.mu12_d}};
  return j;
}

json offdiag_json(const OffDiagonalRates& o) {
  json j;
  j["lambda_zq"] = o.lambda_zq();
  j["lambda_dq"] = o.lambda_dq();
  j["components"] = {{"zq_d", o.zq_d},     {"zq_alpha", o.zq_alpha}, {"zq_j", o.zq_j},
                     {"dq_d", o.dq_d},     {"dq_alpha", o.dq_alpha}, {"dq_j", o.dq_j}};
  return j;
}

json ratio_json(const Ratio& r) {
  json j;
  j["defined"] = r.defined;
  if (r.defined) {
    j["value"] = r.r.value;
    j["err"] = r.r.err;
  }
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

json meta_json(const RunManifest& m) {
  return json{{"artifact", kArtifactVersion},
              {"config", hex16(m.config_hash())},
              {"seed", m.seed()}};
}

SequenceContext context_from_config(const Config& cfg, json* provenance) {
  const RatesConfig rc = load_rates(cfg);
  SequenceContext ctx;
  if (rc.present) {
    if (load_micro(cfg).present)
      throw ConfigError("config: give either [rates] or [micro], not both");
    ctx.diag = rc.diag;
    ctx.offdiag = rc.offdiag;
    ctx.eps1 = rc.eps1;
    ctx.eps2 = rc.eps2;
    ctx.omega_j = rc.omega_j;
    if (provenance) (*provenance)["generator"] = "rates";
    return ctx;
  }
  const MicroConfig mc = load_micro(cfg);
  if (!mc.present) throw ConfigError("config: need a [rates] or [micro] section");
  ctx.diag = diagonal_rates(mc.params);
  ctx.offdiag = offdiagonal_rates(mc.params);
  ctx.eps1 = mc.params.eps1;
  ctx.eps2 = mc.params.eps2;
  ctx.omega_j = mc.params.omega_j;
  if (provenance) (*provenance)["generator"] = "micro";
  return ctx;
}

std::string out_path(const GlobalOpts& g, const std::string& rel) {
  return (std::filesystem::path(g.out_dir) / rel).string();
}

// ---------------------------------------------------------------------------

int cmd_rates(const GlobalOpts& g) {
  const Config cfg = Config::parse_file(g.config_path);
  const MicroConfig mc = load_micro(cfg);
  if (!mc.present) throw ConfigError("rates: config needs a [micro] section");
  const MicroParams& p = mc.params;

  RunManifest manifest("rates", fnv1a64(cfg.text()), g.seed, "n/a", g.threads);
  Timer timer;

  const DiagonalRates d = diagonal_rates(p);
  const OffDiagonalRates o = offdiagonal_rates(p);
  const double bias = 4.0 * (d.delta1 * p.eps1 + d.delta2 * p.eps2) / (p.eps1 + p.eps2);
  const double mu_zq = d.mu12 + bias;
  const double mu_dq = d.mu12 - bias;
  const RatioReport ratios =
      parameter_free_ratios(d, o, mu_zq, mu_dq, p.eps1, p.eps2, {}, g.seed);
  const auto bounds = cross_correlation_bound(p);

  json j;
  j["meta"] = meta_json(manifest);
  j["diagonal"] = diag_json(d);
  j["off_diagonal"] = offdiag_json(o);
  j["bell_initial_rates"] = {{"mu_zq", mu_zq}, {"mu_dq", mu_dq}};
  j["ratios"] = {{"r1_mu_sigma", ratio_json(ratios.r1)},
                 {"r2_cross_correlation", ratio_json(ratios.r2)},
                 {"r3_lambda_dipolar", ratio_json(ratios.r3)}};
  j["cross_correlation_bounds"] = json::array();
  for (int n = 0; n < 2; ++n)
    j["cross_correlation_bounds"].push_back({{"spin", n + 1},
                                             {"lhs", bounds[static_cast<size_t>(n)].lhs},
                                             {"rhs", bounds[static_cast<size_t>(n)].rhs},
                                             {"pass", bounds[static_cast<size_t>(n)].pass}});
  const double omega_tau = std::max(std::abs(p.omega1), std::abs(p.omega2)) * p.tau_c;
  j["extreme_narrowing"] = {{"omega_max_tau_c", omega_tau}, {"applicable", omega_tau < 0.05}};

  manifest.write_output(out_path(g, "rates.json"), j.dump(2) + "\n");
  manifest.add_timing("total", timer.ms());
  manifest.write(out_path(g, "manifest.json"));
  std::printf("rates: wrote %s\n", out_path(g, "rates.json").c_str());
  return 0;
}

// ---------------------------------------------------------------------------

std::string record_csv(const ExperimentRecord& rec, const RunManifest& manifest,
                       double sigma_abs) {
  std::string out = manifest.csv_header();
  out += "# experiment: " + rec.name + " (channel: " + rec.derived_label + ")\n";
  out += "# program:\n";
  std::istringstream prog(rec.program_template);
  std::string line;
  while (std::getline(prog, line)) out += "#   " + line + "\n";
  out += "t_seconds,value,sigma\n";
  char buf[96];
  for (size_t i = 0; i < rec.times.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", rec.times[i], rec.derived[i],
                  sigma_abs);
    out += buf;
  }
  return out;
}

int cmd_simulate(const GlobalOpts& g) {
  const Config cfg = Config::parse_file(g.config_path);
  json provenance;
  const SequenceContext ctx = context_from_config(cfg, &provenance);
  const ExperimentGrids grids = load_grids(cfg);
  NoiseModel noise = load_noise(cfg);
  if (noise.seed == 0) noise.seed = g.seed;
  const FitSettings fits = load_fit(cfg);

  RunManifest manifest("simulate", fnv1a64(cfg.text()), noise.seed, "n/a", g.threads);
  Timer timer;

  const auto records = run_table_battery(ctx, grids, noise);
  for (const auto& rec : records) {
    const double amp0 = rec.derived.empty() ? 0.0 : std::abs(rec.derived.front());
    const double sigma_abs = noise.enabled() ? noise.sigma_rel * amp0 : 0.0;
    manifest.write_output(out_path(g, "experiments/" + rec.name + ".csv"),
                          record_csv(rec, manifest, sigma_abs));
  }
  manifest.add_timing("battery", timer.ms());

  ExtractionOptions opt;
  opt.window_fraction = fits.window_fraction;
  opt.rate_guess = fits.rate_guess;
  opt.eps1 = ctx.eps1;
  opt.eps2 = ctx.eps2;
  const RateSet rs = extract_rate_set(records, opt);

  RateUncertainties unc;
  unc.mu1 = rs.mu1.err();
  unc.mu2 = rs.mu2.err();
  unc.mu12 = rs.mu12.err();
  unc.sigma12 = rs.sigma12.err();
  unc.delta1 = rs.delta1.err();
  unc.delta2 = rs.delta2.err();
  unc.mu_zq = rs.mu_zq.err();
  unc.mu_dq = rs.mu_dq.err();
  unc.lambda_zq = rs.lambda_zq.err();
  unc.lambda_dq = rs.lambda_dq.err();
  DiagonalRates measured;
  measured.mu1 = rs.mu1.value;
  measured.mu2 = rs.mu2.value;
  measured.mu12 = rs.mu12.value;
  measured.sigma12 = rs.sigma12.value;
  measured.delta1 = rs.delta1.value;
  measured.delta2 = rs.delta2.value;
  OffDiagonalRates od_meas;
  od_meas.zq_d = rs.lambda_zq.value;
  od_meas.dq_d = rs.lambda_dq.value;
  const RatioReport ratios = parameter_free_ratios(measured, od_meas, rs.mu_zq.value,
                                                   rs.mu_dq.value, ctx.eps1, ctx.eps2, unc,
                                                   noise.seed);

  json j;
  j["meta"] = meta_json(manifest);
  j["provenance"] = provenance;
  j["rates"] = {{"mu1", rate_meas_json(rs.mu1)},
                {"mu2", rate_meas_json(rs.mu2)},
                {"sigma12_1", rate_meas_json(rs.sigma12_1)},
                {"sigma12_2", rate_meas_json(rs.sigma12_2)},
                {"sigma12", rate_meas_json(rs.sigma12)},
                {"delta1", rate_meas_json(rs.delta1)},
                {"delta2", rate_meas_json(rs.delta2)},
                {"mu_zq", rate_meas_json(rs.mu_zq)},
                {"mu_dq", rate_meas_json(rs.mu_dq)},
                {"mu12", rate_meas_json(rs.mu12)},
                {"lambda_zq", rate_meas_json(rs.lambda_zq)},
                {"lambda_dq", rate_meas_json(rs.lambda_dq)}};
  j["ratios"] = {{"r1_mu_sigma", ratio_json(ratios.r1)},
                 {"r2_cross_correlation", ratio_json(ratios.r2)}};
  j["gaps"] = rs.gaps;
  manifest.write_output(out_path(g, "rateset.json"), j.dump(2) + "\n");
  manifest.add_timing("total", timer.ms());
  manifest.write(out_path(g, "manifest.json"));
  std::printf("simulate: %zu experiments, rates in %s\n", records.size(),
              out_path(g, "rateset.json").c_str());
  if (!rs.complete()) {
    std::fprintf(stderr, "simulate: missing experiments left gaps in the rate set\n");
    return 3;
  }
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_extract(const GlobalOpts& g, const std::string& series_path, const std::string& model,
                double window_lo, double window_hi, const std::string& flavor) {
  std::ifstream in(series_path);
  if (!in) throw ConfigError("extract: cannot open series '" + series_path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const Series s = series_from_csv(ss.str());

  RunManifest manifest("extract", fnv1a64(ss.str()), g.seed, "n/a", g.threads);
  Timer timer;
  json j;
  j["meta"] = meta_json(manifest);
  j["series"] = series_path;
  j["model"] = model;

  bool ok = false;
  if (model == "parabolic") {
    SlopeFlavor f = SlopeFlavor::normalized_abs;
    if (flavor == "signed") f = SlopeFlavor::normalized_signed;
    else if (flavor == "slope") f = SlopeFlavor::raw_slope;
    else if (flavor != "abs") throw ConfigError("extract: flavor must be abs|signed|slope");
    const double hi = window_hi > 0 ? window_hi : (s.t.empty() ? 0.0 : s.t.back());
    const InitialRate r = parabolic_initial_fit(s, window_lo, hi, f);
    ok = r.ok;
    if (r.ok) {
      j["rate"] = meas_json(r.rate.value, r.stat_err, r.sys_err);
      j["window"] = {window_lo, hi};
      j["parabola"] = {{"a", r.a}, {"b", r.b}};
    } else {
      j["error"] = r.error;
    }
  } else if (model == "monoexp" || model == "recovery") {
    const MonoexpFit r = monoexp_fit(s, model == "monoexp" ? ExpModel::decay : ExpModel::recovery);
    ok = r.ok;
    if (r.ok) {
      j["rate"] = meas_json(r.rate.value, r.rate.err, 0.0);
      j["amplitude"] = r.amplitude;
      if (model == "recovery") j["offset"] = r.offset;
      j["residual_norm"] = r.residual_norm;
      j["iterations"] = r.iterations;
    } else {
      j["error"] = r.error;
    }
  } else {
    throw ConfigError("extract: model must be parabolic|monoexp|recovery");
  }

  manifest.write_output(out_path(g, "fit.json"), j.dump(2) + "\n");
  manifest.add_timing("total", timer.ms());
  manifest.write(out_path(g, "manifest.json"));
  if (!ok) {
    std::fprintf(stderr, "extract: fit failed (%s)\n", j["error"].get<std::string>().c_str());
    return 3;
  }
  std::printf("extract: rate = %.6g, wrote %s\n", j["rate"]["value"].get<double>(),
              out_path(g, "fit.json").c_str());
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_oracle(const GlobalOpts& g) {
  const Config cfg = Config::parse_file(g.config_path);
  const MicroConfig mc = load_micro(cfg);
  if (!mc.present) throw ConfigError("oracle: config needs a [micro] section");
  const MicroParams& p = mc.params;
  const OracleSettings os = load_oracle(cfg);
  const kernels::Backend backend = kernels::parse_backend(g.kernel);

  RunManifest manifest("oracle", fnv1a64(cfg.text()), g.seed, kernels::name(backend), g.threads);
  json j;
  j["meta"] = meta_json(manifest);

  // Oracle B: operator-level reconstruction vs the closed formulas.
  Timer tb;
  const oracle::OperatorRates orates = oracle::appendix_rates(p, os.qot_factor);
  const DiagonalRates ad = diagonal_rates(p);
  const OffDiagonalRates ao = offdiagonal_rates(p);
  const DiagonalRates od = orates.diagonal();
  double max_rel = 0.0;
  auto rel = [&](double oracle_v, double analytic_v) {
    const double scale = std::max(std::abs(analytic_v), 1e-300);
    max_rel = std::max(max_rel, std::abs(oracle_v - analytic_v) / scale);
  };
  rel(od.mu1, ad.mu1);
  rel(od.mu2, ad.mu2);
  rel(od.mu12, ad.mu12);
  rel(od.sigma12, ad.sigma12);
  rel(od.delta1, ad.delta1);
  rel(od.delta2, ad.delta2);
  rel(orates.lambda_zq(), ao.lambda_zq());
  rel(orates.lambda_dq(), ao.lambda_dq());
  j["operator_oracle"] = {{"max_rel_deviation", max_rel},
                          {"zq_dq_mixing", orates.zq_dq_mixing()},
                          {"rates",
                           {{"mu1", od.mu1},
                            {"mu2", od.mu2},
                            {"mu12", od.mu12},
                            {"sigma12", od.sigma12},
                            {"delta1", od.delta1},
                            {"delta2", od.delta2},
                            {"lambda_zq", orates.lambda_zq()},
                            {"lambda_dq", orates.lambda_dq()}}}};
  manifest.add_timing("operator_oracle", tb.ms());

  // Oracle A: stochastic-Liouville ensemble.
  Timer ta;
  oracle::McOptions opt;
  opt.duration = os.duration;
  opt.n_samples = os.n_samples;
  opt.ensemble = os.ensemble;
  opt.batches = os.batches;
  opt.dt = os.dt;
  opt.seed = g.seed;
  opt.threads = g.threads;
  opt.backend = backend;
  const oracle::SectorSeries series = oracle::stochastic_relaxation(p, opt);
  const oracle::McRates mr = oracle::fit_rates(series);
  manifest.add_timing("monte_carlo", ta.ms());

  bool breach = false;
  auto mc_row = [&](const oracle::RateEstimate& e, double analytic) {
    const double z = e.stat_err > 0 ? (e.value - analytic) / e.stat_err : 0.0;
    if (std::abs(z) > os.z_limit) breach = true;
    return json{{"analytic", analytic},
                {"monte_carlo", e.value},
                {"stat_err", e.stat_err},
                {"z_score", z}};
  };
  j["monte_carlo_oracle"] = {{"ensemble", os.ensemble},
                             {"kernel", kernels::name(backend)},
                             {"max_unitarity_drift", series.max_unitarity_drift},
                             {"warnings", series.warnings},
                             {"rates",
                              {{"mu1", mc_row(mr.mu1, ad.mu1)},
                               {"mu2", mc_row(mr.mu2, ad.mu2)},
                               {"mu12", mc_row(mr.mu12, ad.mu12)},
                               {"sigma12", mc_row(mr.sigma12, ad.sigma12)},
                               {"delta1", mc_row(mr.delta1, ad.delta1)},
                               {"delta2", mc_row(mr.delta2, ad.delta2)},
                               {"lambda_zq", mc_row(mr.lambda_zq, ao.lambda_zq())},
                               {"lambda_dq", mc_row(mr.lambda_dq, ao.lambda_dq())}}}};

  // Optional telegraph oracle for the slow-J mechanism.
  const TelegraphSettings ts = load_telegraph(cfg);
  if (ts.present) {
    Timer tt;
    oracle::TelegraphParams tp;
    tp.j1k.assign(static_cast<size_t>(ts.n_dist), 0.0);
    tp.j2k.assign(static_cast<size_t>(ts.n_dist), ts.j_dist);
    tp.t1dist = ts.t1dist;
    const oracle::TelegraphResult tr = oracle::telegraph_relaxation(
        tp, ts.duration, ts.n_times, ts.ensemble, g.seed, g.threads);
    std::string csv = manifest.csv_header();
    csv += "t_seconds,g_zq,err_zq,closed_zq,g_dq,err_dq,closed_dq\n";
    char buf[200];
    for (size_t i = 0; i < tr.times.size(); ++i) {
      const double cz = anderson_weiss_exponential(tr.times[i], tr.h2_zq, ts.t1dist);
      const double cd = anderson_weiss_exponential(tr.times[i], tr.h2_dq, ts.t1dist);
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", tr.times[i],
                    tr.g_zq[i], tr.err_zq[i], cz, tr.g_dq[i], tr.err_dq[i], cd);
      csv += buf;
    }
    manifest.write_output(out_path(g, "telegraph.csv"), csv);
    j["telegraph"] = {{"h2_zq", tr.h2_zq},
                      {"h2_dq", tr.h2_dq},
                      {"tail_rate_zq", 0.5 * tr.h2_zq * 2.0 * ts.t1dist},
                      {"tail_rate_dq", 0.5 * tr.h2_dq * 2.0 * ts.t1dist}};
    manifest.add_timing("telegraph", tt.ms());
  }

  manifest.write_output(out_path(g, "oracle.json"), j.dump(2) + "\n");
  manifest.write(out_path(g, "manifest.json"));
  std::printf("oracle: operator max rel dev %.3e, wrote %s\n", max_rel,
              out_path(g, "oracle.json").c_str());
  if (breach) {
    std::fprintf(stderr, "oracle: |z| > %.1f for at least one rate\n", os.z_limit);
    return 4;
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct RatioRow {
  std::string name;
  double mu1, mu1_e, mu2, mu2_e, mu12, mu12_e, sigma12, sigma12_e;
  bool has_published = false;
  double published = 0.0, published_e = 0.0;
};

std::vector<RatioRow> parse_ratio_table(const std::string& text) {
  std::vector<RatioRow> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("name", 0) == 0) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() < 9) throw ConfigError("ratios: row needs >= 9 columns: " + line);
    RatioRow r;
    r.name = cells[0];
    r.mu1 = std::stod(cells[1]);
    r.mu1_e = std::stod(cells[2]);
    r.mu2 = std::stod(cells[3]);
    r.mu2_e = std::stod(cells[4]);
    r.mu12 = std::stod(cells[5]);
    r.mu12_e = std::stod(cells[6]);
    r.sigma12 = std::stod(cells[7]);
    r.sigma12_e = std::stod(cells[8]);
    if (cells.size() >= 11 && !cells[9].empty()) {
      r.has_published = true;
      r.published = std::stod(cells[9]);
      r.published_e = std::stod(cells[10]);
    }
    rows.push_back(r);
  }
  return rows;
}

int cmd_ratios(const GlobalOpts& g, const std::string& table_path, const std::string& rates_json) {
  std::string input_text;
  std::vector<RatioRow> rows;
  if (!table_path.empty()) {
    std::ifstream in(table_path);
    if (!in) throw ConfigError("ratios: cannot open '" + table_path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    input_text = ss.str();
    rows = parse_ratio_table(input_text);
  } else if (!rates_json.empty()) {
    std::ifstream in(rates_json);
    if (!in) throw ConfigError("ratios: cannot open '" + rates_json + "'");
    json j;
    in >> j;
    input_text = j.dump();
    RatioRow r{};
    r.name = "rateset";
    const json& rj = j.at("rates");
    auto get = [&](const char* k, double& v, double& e) {
      v = rj.at(k).at("value").get<double>();
      const double st = rj.at(k).at("stat_err").get<double>();
      const double sy = rj.at(k).at("sys_err").get<double>();
      e = std::sqrt(st * st + sy * sy);
    };
    get("mu1", r.mu1, r.mu1_e);
    get("mu2", r.mu2, r.mu2_e);
    get("mu12", r.mu12, r.mu12_e);
    get("sigma12", r.sigma12, r.sigma12_e);
    rows.push_back(r);
  } else {
    throw ConfigError("ratios: need --table CSV or --rates rateset.json");
  }

  RunManifest manifest("ratios", fnv1a64(input_text), g.seed, "n/a", g.threads);
  Timer timer;

  json out;
  out["meta"] = meta_json(manifest);
  out["theory"] = 2.8;
  out["rows"] = json::array();
  std::string csv = manifest.csv_header();
  csv += "name,r1,r1_err,consistent_with_2.8,published_r1,skipped\n";
  for (const auto& r : rows) {
    json row;
    row["name"] = r.name;
    if (r.sigma12 == 0.0) {
      row["skipped"] = "sigma12 = 0";
      out["rows"].push_back(row);
      csv += r.name + ",,,,,sigma12=0\n";
      std::fprintf(stderr, "ratios: skipping row '%s' (sigma12 = 0)\n", r.name.c_str());
      continue;
    }
    const double num = r.mu1 + r.mu2 - r.mu12;
    const double value = num / r.sigma12;
    const double err = std::sqrt((r.mu1_e * r.mu1_e + r.mu2_e * r.mu2_e + r.mu12_e * r.mu12_e) /
                                     (r.sigma12 * r.sigma12) +
                                 (num * num / std::pow(r.sigma12, 4)) * r.sigma12_e * r.sigma12_e);
    const bool consistent = std::abs(value - 2.8) <= 2.0 * err;
    row["r1"] = value;
    row["r1_err"] = err;
    row["consistent_with_2.8"] = consistent;
    if (r.has_published) {
      row["published_r1"] = r.published;
      row["published_r1_err"] = r.published_e;
    }
    out["rows"].push_back(row);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s,%.6g,%.2g,%d,%.6g,\n", r.name.c_str(), value, err,
                  consistent ? 1 : 0, r.has_published ? r.published : 0.0);
    csv += buf;
  }

  manifest.write_output(out_path(g, "ratios.json"), out.dump(2) + "\n");
  manifest.write_output(out_path(g, "ratios.csv"), csv);
  manifest.add_timing("total", timer.ms());
  manifest.write(out_path(g, "manifest.json"));
  std::printf("ratios: %zu rows, wrote %s\n", rows.size(), out_path(g, "ratios.json").c_str());
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_tomography(const GlobalOpts& g, const std::string& state) {
  const Config cfg = Config::parse_file(g.config_path);
  json provenance;
  const SequenceContext ctx = context_from_config(cfg, &provenance);
  NoiseModel noise = load_noise(cfg);
  if (noise.seed == 0) noise.seed = g.seed;

  RunManifest manifest("tomography", fnv1a64(cfg.text()), noise.seed, "n/a", g.threads);
  Timer timer;

  Mat4 rho;
  double fidelity = -1.0;
  if (state == "equilibrium") {
    rho = equilibrium_density(ctx.eps1, ctx.eps2);
  } else if (state == "upup") {
    rho = prepare_pps_upup(ctx.eps1, ctx.eps2, ctx.omega_j).rho;
  } else {
    BellId id;
    if (state == "S0") id = BellId::S0;
    else if (state == "T0z") id = BellId::T0z;
    else if (state == "psi_plus") id = BellId::PsiPlusZ;
    else if (state == "psi_minus") id = BellId::PsiMinusZ;
    else throw ConfigError("tomography: state must be S0|T0z|psi_plus|psi_minus|upup|equilibrium");
    const PreparationReport rep = prepare_bell_pps(id, ctx.eps1, ctx.eps2, ctx.omega_j);
    rho = rep.rho;
    fidelity = rep.fidelity;
  }

  int call_count = 0;
  double sigma_abs = 0.0;
  std::function<double(double)> noise_fn;
  if (noise.enabled()) {
    sigma_abs = noise.sigma_rel * 0.25 * std::abs(ctx.eps1 + ctx.eps2);
    noise_fn = [&noise, &call_count, sigma_abs](double v) {
      Philox rng(noise.seed, 0x70303030ULL + static_cast<uint64_t>(call_count));
      ++call_count;
      return v + sigma_abs * rng.normal();
    };
  }
  Tomogram t = tomography([&] { return rho; }, noise_fn);
  if (noise.enabled()) {
    // One observable per coherence component: the element uncertainty is the
    // quadrature sum over contributing basis operators.
    const ProductBasis& basis = product_basis();
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k) {
        double var = 0.0;
        for (int l = 0; l < 15; ++l)
          var += std::norm(basis[static_cast<size_t>(l)](i, k)) * sigma_abs * sigma_abs;
        t.element_err[static_cast<size_t>(4 * i + k)] = std::sqrt(var);
      }
  }

  json j;
  j["meta"] = meta_json(manifest);
  j["state"] = state;
  j["consistent_source"] = t.consistent_source;
  if (fidelity >= 0) j["preparation_fidelity"] = fidelity;
  json re = json::array(), im = json::array(), err = json::array();
  for (int i = 0; i < 4; ++i) {
    json rrow = json::array(), irow = json::array(), erow = json::array();
    for (int k = 0; k < 4; ++k) {
      rrow.push_back(std::real(t.rho(i, k)));
      irow.push_back(std::imag(t.rho(i, k)));
      erow.push_back(t.element_err[static_cast<size_t>(4 * i + k)]);
    }
    re.push_back(rrow);
    im.push_back(irow);
    err.push_back(erow);
  }
  j["rho_real"] = re;
  j["rho_imag"] = im;
  j["rho_err"] = err;

  manifest.write_output(out_path(g, "tomogram.json"), j.dump(2) + "\n");
  manifest.add_timing("total", timer.ms());
  manifest.write(out_path(g, "manifest.json"));
  std::printf("tomography: wrote %s\n", out_path(g, "tomogram.json").c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-spin-1/2 relaxation laboratory: analytic Redfield rates, synthetic "
               "pulse-sequence experiments, rate extraction and brute-force oracles"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--config", g.config_path, "config file path");
  app.add_option("--seed", g.seed, "base RNG seed");
  app.add_option("--out", g.out_dir, "output directory");
  app.add_option("--threads", g.threads, "worker threads");
  app.add_option("--kernel", g.kernel, "propagation kernel: auto|scalar|avx2");

  app.add_subcommand("rates", "analytic rates from microscopic parameters");
  app.add_subcommand("simulate", "run the synthetic experiment battery");
  auto* extract = app.add_subcommand("extract", "fit a rate from a time-series CSV");
  std::string series_path, model = "monoexp", flavor = "abs";
  double window_lo = 0.0, window_hi = -1.0;
  extract->add_option("--series", series_path, "CSV with t_seconds,value,sigma")->required();
  extract->add_option("--model", model, "parabolic|monoexp|recovery");
  extract->add_option("--flavor", flavor, "parabolic rate flavor: abs|signed|slope");
  extract->add_option("--window-lo", window_lo, "fit window start [s]");
  extract->add_option("--window-hi", window_hi, "fit window end [s]");
  app.add_subcommand("oracle", "run both brute-force oracles");
  auto* ratios = app.add_subcommand("ratios", "parameter-free ratio table");
  std::string table_path, rates_json;
  ratios->add_option("--table", table_path, "literature rate table CSV");
  ratios->add_option("--rates", rates_json, "rateset.json from simulate");
  auto* tomo = app.add_subcommand("tomography", "reconstruct a prepared state");
  std::string state = "S0";
  tomo->add_option("--state", state, "S0|T0z|psi_plus|psi_minus|upup|equilibrium");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("rates")) return cmd_rates(g);
    if (app.got_subcommand("simulate")) return cmd_simulate(g);
    if (app.got_subcommand("extract"))
      return cmd_extract(g, series_path, model, window_lo, window_hi, flavor);
    if (app.got_subcommand("oracle")) return cmd_oracle(g);
    if (app.got_subcommand("ratios")) return cmd_ratios(g, table_path, rates_json);
    if (app.got_subcommand("tomography")) return cmd_tomography(g, state);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
