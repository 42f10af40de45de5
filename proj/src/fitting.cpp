#include "spinpair/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace spinpair {

namespace {

// Solves A x = b for small dense systems (n <= 4) in place; returns false on
// (near-)singular pivot. A is row-major n x n.
bool solve_small(std::vector<double>& a, std::vector<double>& b, int n) {
  std::vector<int> perm(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(a[static_cast<size_t>(col * n + col)]);
    for (int r = col + 1; r < n; ++r) {
      const double v = std::abs(a[static_cast<size_t>(r * n + col)]);
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best < 1e-300) return false;
    if (piv != col) {
      for (int j = 0; j < n; ++j) std::swap(a[static_cast<size_t>(col * n + j)], a[static_cast<size_t>(piv * n + j)]);
      std::swap(b[static_cast<size_t>(col)], b[static_cast<size_t>(piv)]);
    }
    const double d = a[static_cast<size_t>(col * n + col)];
    for (int r = col + 1; r < n; ++r) {
      const double f = a[static_cast<size_t>(r * n + col)] / d;
      if (f == 0.0) continue;
      for (int j = col; j < n; ++j) a[static_cast<size_t>(r * n + j)] -= f * a[static_cast<size_t>(col * n + j)];
      b[static_cast<size_t>(r)] -= f * b[static_cast<size_t>(col)];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[static_cast<size_t>(r)];
    for (int j = r + 1; j < n; ++j) s -= a[static_cast<size_t>(r * n + j)] * b[static_cast<size_t>(j)];
    b[static_cast<size_t>(r)] = s / a[static_cast<size_t>(r * n + r)];
  }
  return true;
}

// Inverse of a small SPD-ish matrix via column solves.
bool invert_small(const std::vector<double>& a, std::vector<double>& inv, int n) {
  inv.assign(static_cast<size_t>(n * n), 0.0);
  for (int c = 0; c < n; ++c) {
    std::vector<double> acopy = a;
    std::vector<double> e(static_cast<size_t>(n), 0.0);
    e[static_cast<size_t>(c)] = 1.0;
    if (!solve_small(acopy, e, n)) return false;
    for (int r = 0; r < n; ++r) inv[static_cast<size_t>(r * n + c)] = e[static_cast<size_t>(r)];
  }
  return true;
}

}  // namespace

PolyFit poly_fit(const Series& s, double window_lo, double window_hi, int degree) {
  PolyFit fit;
  fit.window_lo = window_lo;
  fit.window_hi = window_hi;
  const int p = degree + 1;
  std::vector<double> xtx(static_cast<size_t>(p * p), 0.0), xty(static_cast<size_t>(p), 0.0);
  size_t n = 0;
  double rss_base = 0.0;
  std::vector<size_t> used;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s.t[i] < window_lo || s.t[i] > window_hi) continue;
    used.push_back(i);
    ++n;
  }
  fit.points = n;
  if (n < static_cast<size_t>(p + 1)) {
    fit.error = "window contains fewer than " + std::to_string(p + 1) + " points";
    return fit;
  }
  for (size_t i : used) {
    const double w = (!s.sigma.empty() && s.sigma[i] > 0.0) ? 1.0 / (s.sigma[i] * s.sigma[i]) : 1.0;
    double powt[8];
    powt[0] = 1.0;
    for (int k = 1; k < 2 * p - 1 + 1; ++k) powt[k] = powt[k - 1] * s.t[i];
    for (int r = 0; r < p; ++r) {
      for (int c = 0; c < p; ++c) xtx[static_cast<size_t>(r * p + c)] += w * powt[r + c];
      xty[static_cast<size_t>(r)] += w * powt[r] * s.y[i];
    }
    rss_base += w * s.y[i] * s.y[i];
  }
  std::vector<double> beta = xty, a = xtx;
  if (!solve_small(a, beta, p)) {
    fit.error = "singular design matrix";
    return fit;
  }
  fit.coeff = beta;
  double rss = 0.0;
  for (size_t i : used) {
    double model = 0.0, tp = 1.0;
    for (int k = 0; k < p; ++k) {
      model += beta[static_cast<size_t>(k)] * tp;
      tp *= s.t[i];
    }
    const double w = (!s.sigma.empty() && s.sigma[i] > 0.0) ? 1.0 / (s.sigma[i] * s.sigma[i]) : 1.0;
    rss += w * (s.y[i] - model) * (s.y[i] - model);
  }
  fit.residual_norm = std::sqrt(rss);
  std::vector<double> cov;
  if (invert_small(xtx, cov, p)) {
    const double scale = s.sigma.empty() ? rss / std::max<double>(1, static_cast<double>(n) - p) : 1.0;
    fit.coeff_err.resize(static_cast<size_t>(p));
    for (int k = 0; k < p; ++k)
      fit.coeff_err[static_cast<size_t>(k)] = std::sqrt(std::max(0.0, cov[static_cast<size_t>(k * p + k)] * scale));
  }
  fit.ok = true;
  return fit;
}

InitialRate parabolic_initial_fit(const Series& s, double window_lo, double window_hi,
                                  SlopeFlavor flavor) {
  InitialRate out;
  out.window_hi = window_hi;
  const PolyFit para = poly_fit(s, window_lo, window_hi, 2);
  if (!para.ok) {
    out.error = para.error;
    return out;
  }
  const double a = para.coeff[0], b = para.coeff[1];
  out.a = a;
  out.b = b;
  const double sa = para.coeff_err.empty() ? 0.0 : para.coeff_err[0];
  const double sb = para.coeff_err.empty() ? 0.0 : para.coeff_err[1];

  double value = 0.0, stat = 0.0;
  switch (flavor) {
    case SlopeFlavor::normalized_abs:
    case SlopeFlavor::normalized_signed: {
      if (std::abs(a) < 1e-300) {
        out.error = "normalized slope undefined: y(0) ~ 0";
        return out;
      }
      value = -b / a;
      stat = std::sqrt((sb * sb) / (a * a) + (b * b * sa * sa) / (a * a * a * a));
      if (flavor == SlopeFlavor::normalized_abs) value = std::abs(value);
      break;
    }
    case SlopeFlavor::raw_slope:
      value = b;
      stat = sb;
      break;
  }

  // Systematic error from the parabolic-vs-cubic initial-slope difference.
  const PolyFit cubic = poly_fit(s, window_lo, window_hi, 3);
  double sys = 0.0;
  if (cubic.ok) {
    const double a3 = cubic.coeff[0], b3 = cubic.coeff[1];
    if (flavor == SlopeFlavor::raw_slope) {
      sys = std::abs(b - b3);
    } else if (std::abs(a3) > 1e-300) {
      sys = std::abs(b / a - b3 / a3);
    }
  }
  out.ok = true;
  out.stat_err = stat;
  out.sys_err = sys;
  out.rate = {value, std::sqrt(stat * stat + sys * sys)};
  return out;
}

MonoexpFit monoexp_fit(const Series& s, ExpModel model) {
  MonoexpFit out;
  const size_t n = s.size();
  const int np = model == ExpModel::decay ? 2 : 3;
  if (n < static_cast<size_t>(np + 0) || n < 3) {
    out.error = "need at least 3 points";
    return out;
  }

  // Initial guesses from log-linear regression.
  double p[3] = {0, 0, 0};  // decay: (A, lambda); recovery: (y_inf, A, lambda)
  if (model == ExpModel::decay) {
    const double sign = s.y[0] >= 0 ? 1.0 : -1.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    size_t m = 0;
    for (size_t i = 0; i < n; ++i) {
      const double v = sign * s.y[i];
      if (v <= 0) continue;
      const double ly = std::log(v);
      sx += s.t[i];
      sy += ly;
      sxx += s.t[i] * s.t[i];
      sxy += s.t[i] * ly;
      ++m;
    }
    if (m < 2) {
      out.error = "not enough one-signed points for initialization";
      return out;
    }
    const double denom = m * sxx - sx * sx;
    const double slope = denom != 0 ? (m * sxy - sx * sy) / denom : 0.0;
    const double icept = (sy - slope * sx) / m;
    p[0] = sign * std::exp(icept);
    p[1] = -slope;
  } else {
    double tail = 0.0;
    const size_t k = std::max<size_t>(1, n / 5);
    for (size_t i = n - k; i < n; ++i) tail += s.y[i];
    p[0] = tail / k;
    p[1] = (p[0] - s.y[0]) / (p[0] != 0.0 ? p[0] : 1.0);
    // lambda guess from the half-approach time.
    double lam = 1.0;
    for (size_t i = 0; i < n; ++i) {
      if (std::abs(s.y[i] - p[0]) < 0.5 * std::abs(s.y[0] - p[0])) {
        if (s.t[i] > 0) lam = std::log(2.0) / s.t[i];
        break;
      }
    }
    p[2] = lam;
  }

  auto eval = [&](const double* q, size_t i, double jac[3]) {
    if (model == ExpModel::decay) {
      const double e = std::exp(-q[1] * s.t[i]);
      jac[0] = e;
      jac[1] = -q[0] * s.t[i] * e;
      jac[2] = 0;
      return q[0] * e;
    }
    const double e = std::exp(-q[2] * s.t[i]);
    jac[0] = 1.0 - q[1] * e;
    jac[1] = -q[0] * e;
    jac[2] = q[0] * q[1] * s.t[i] * e;
    return q[0] * (1.0 - q[1] * e);
  };

  auto chi2 = [&](const double* q) {
    double c = 0;
    double jac[3];
    for (size_t i = 0; i < n; ++i) {
      const double r = eval(q, i, jac) - s.y[i];
      const double w = (!s.sigma.empty() && s.sigma[i] > 0) ? 1.0 / (s.sigma[i] * s.sigma[i]) : 1.0;
      c += w * r * r;
    }
    return c;
  };

  double mu = 1e-6;
  double cost = chi2(p);
  int iter = 0;
  for (; iter < 200; ++iter) {
    double jtj[9] = {0};
    double jtr[3] = {0};
    double jac[3];
    for (size_t i = 0; i < n; ++i) {
      const double r = eval(p, i, jac) - s.y[i];
      const double w = (!s.sigma.empty() && s.sigma[i] > 0) ? 1.0 / (s.sigma[i] * s.sigma[i]) : 1.0;
      for (int a = 0; a < np; ++a) {
        jtr[a] += w * jac[a] * r;
        for (int b = 0; b < np; ++b) jtj[3 * a + b] += w * jac[a] * jac[b];
      }
    }
    std::vector<double> m(static_cast<size_t>(np * np)), rhs(static_cast<size_t>(np));
    for (int a = 0; a < np; ++a) {
      rhs[static_cast<size_t>(a)] = -jtr[a];
      for (int b = 0; b < np; ++b)
        m[static_cast<size_t>(a * np + b)] = jtj[3 * a + b] + (a == b ? mu * (1.0 + jtj[3 * a + a]) : 0.0);
    }
    if (!solve_small(m, rhs, np)) {
      out.error = "singular normal equations";
      return out;
    }
    double trial[3] = {p[0], p[1], p[2]};
    double step = 0.0, scale = 0.0;
    for (int a = 0; a < np; ++a) {
      trial[a] += rhs[static_cast<size_t>(a)];
      step += rhs[static_cast<size_t>(a)] * rhs[static_cast<size_t>(a)];
      scale += p[a] * p[a];
    }
    const double trial_cost = chi2(trial);
    if (trial_cost <= cost) {
      for (int a = 0; a < np; ++a) p[a] = trial[a];
      cost = trial_cost;
      mu = std::max(mu / 3.0, 1e-14);
      if (std::sqrt(step) < 1e-10 * (std::sqrt(scale) + 1e-30)) break;
    } else {
      mu *= 3.0;
      if (mu > 1e12) {
        out.error = "no convergence (damping exhausted)";
        return out;
      }
    }
  }
  if (iter == 200) {
    out.error = "no convergence after 200 iterations";
    return out;
  }

  // Covariance-derived uncertainty for lambda.
  double jtj[9] = {0};
  double jac[3];
  double rss = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = eval(p, i, jac) - s.y[i];
    const double w = (!s.sigma.empty() && s.sigma[i] > 0) ? 1.0 / (s.sigma[i] * s.sigma[i]) : 1.0;
    rss += w * r * r;
    for (int a = 0; a < np; ++a)
      for (int b = 0; b < np; ++b) jtj[3 * a + b] += w * jac[a] * jac[b];
  }
  std::vector<double> jm(static_cast<size_t>(np * np)), cov;
  for (int a = 0; a < np; ++a)
    for (int b = 0; b < np; ++b) jm[static_cast<size_t>(a * np + b)] = jtj[3 * a + b];
  double lam_err = 0.0;
  if (invert_small(jm, cov, np)) {
    const double dof = std::max<double>(1.0, static_cast<double>(n) - np);
    const double scale = s.sigma.empty() ? rss / dof : 1.0;
    const int li = model == ExpModel::decay ? 1 : 2;
    lam_err = std::sqrt(std::max(0.0, cov[static_cast<size_t>(li * np + li)] * scale));
  }

  out.ok = true;
  out.iterations = iter;
  out.residual_norm = std::sqrt(rss);
  if (model == ExpModel::decay) {
    out.amplitude = p[0];
    out.rate = {p[1], lam_err};
  } else {
    out.offset = p[0];
    out.amplitude = p[1];
    out.rate = {p[2], lam_err};
  }
  return out;
}

std::pair<Series, Series> zq_dq_refine(const Series& c_plus, const Series& c_minus) {
  if (c_plus.size() != c_minus.size())
    throw std::invalid_argument("zq_dq_refine: series lengths differ");
  for (size_t i = 0; i < c_plus.size(); ++i)
    if (c_plus.t[i] != c_minus.t[i])
      throw std::invalid_argument("zq_dq_refine: time grids differ");
  Series half_diff, half_sum;
  half_diff.t = half_sum.t = c_plus.t;
  half_diff.y.resize(c_plus.size());
  half_sum.y.resize(c_plus.size());
  for (size_t i = 0; i < c_plus.size(); ++i) {
    half_diff.y[i] = 0.5 * (c_plus.y[i] - c_minus.y[i]);
    half_sum.y[i] = 0.5 * (c_plus.y[i] + c_minus.y[i]);
  }
  if (!c_plus.sigma.empty() && !c_minus.sigma.empty()) {
    half_diff.sigma.resize(c_plus.size());
    half_sum.sigma.resize(c_plus.size());
    for (size_t i = 0; i < c_plus.size(); ++i) {
      const double s = 0.5 * std::hypot(c_plus.sigma[i], c_minus.sigma[i]);
      half_diff.sigma[i] = half_sum.sigma[i] = s;
    }
  }
  return {half_diff, half_sum};
}

Series series_from_record(const ExperimentRecord& rec) {
  Series s;
  s.t = rec.times;
  s.y = rec.derived;
  return s;
}

namespace {

const ExperimentRecord* find_record(const std::vector<ExperimentRecord>& recs,
                                    const std::string& name) {
  for (const auto& r : recs)
    if (r.name == name) return &r;
  return nullptr;
}

// Two-pass initial fit: coarse window from the guess rate, then shrink to
// 0.2 / (fitted rate).
InitialRate two_pass_initial(const Series& s, double frac, double rate_guess,
                             SlopeFlavor flavor) {
  InitialRate first = parabolic_initial_fit(s, 0.0, frac / rate_guess, flavor);
  double rate1 = rate_guess;
  if (first.ok && std::abs(first.rate.value) > 1e-12) rate1 = std::abs(first.rate.value);
  InitialRate second = parabolic_initial_fit(s, 0.0, frac / rate1, flavor);
  return second.ok ? second : first;
}

Series deviation_from_equilibrium(const Series& s) {
  Series d = s;
  for (auto& y : d.y) y -= 1.0;  // normalized symmetric channels equilibrate at 1
  return d;
}

}  // namespace

RateSet extract_rate_set(const std::vector<ExperimentRecord>& records,
                         const ExtractionOptions& opt) {
  RateSet rs;
  const double frac = opt.window_fraction;

  auto from_initial = [](const InitialRate& r) {
    return RateMeas{r.rate.value, r.stat_err, r.sys_err};
  };

  // mu_n and delta_n from the inversion-recovery records.
  for (int spin : {1, 2}) {
    const auto* rec = find_record(records, "ir_spin" + std::to_string(spin));
    RateMeas* mu = spin == 1 ? &rs.mu1 : &rs.mu2;
    RateMeas* delta = spin == 1 ? &rs.delta1 : &rs.delta2;
    if (!rec) {
      rs.gaps.push_back("ir_spin" + std::to_string(spin));
      continue;
    }
    const Series dev = deviation_from_equilibrium(series_from_record(*rec));
    const InitialRate r = two_pass_initial(dev, frac, opt.rate_guess, SlopeFlavor::normalized_abs);
    if (r.ok) *mu = from_initial(r);

    // Antisymmetric channel of the same record: d<2S1zS2z>/dt(0) = 2 delta_n eps_n.
    Series anti;
    anti.t = rec->times;
    for (const auto& rd : rec->readings) anti.y.push_back(rd.anti);
    const double mu_scale = r.ok ? std::abs(r.rate.value) : opt.rate_guess;
    const InitialRate d = parabolic_initial_fit(anti, 0.0, frac / mu_scale, SlopeFlavor::raw_slope);
    if (d.ok) {
      const double eps_n = spin == 1 ? opt.eps1 : opt.eps2;
      delta->value = d.rate.value / (2.0 * eps_n);
      delta->stat_err = d.stat_err / (2.0 * std::abs(eps_n));
      delta->sys_err = d.sys_err / (2.0 * std::abs(eps_n));
    }
  }

  // NOE: normalized observed-spin slope, scaled by the polarization ratio.
  struct NoeSpec {
    const char* name;
    int inverted;
    RateMeas* out;
  };
  const NoeSpec noes[2] = {{"noe_1to2", 1, &rs.sigma12_1}, {"noe_2to1", 2, &rs.sigma12_2}};
  for (const auto& spec : noes) {
    const auto* rec = find_record(records, spec.name);
    if (!rec) {
      rs.gaps.push_back(spec.name);
      continue;
    }
    const Series s = series_from_record(*rec);
    double mu_scale = std::max(rs.mu1.value, rs.mu2.value);
    if (mu_scale <= 0.0) mu_scale = opt.rate_guess;
    const InitialRate r = parabolic_initial_fit(s, 0.0, frac / mu_scale, SlopeFlavor::raw_slope);
    if (r.ok) {
      const double eps_obs = spec.inverted == 1 ? opt.eps2 : opt.eps1;
      const double eps_inv = spec.inverted == 1 ? opt.eps1 : opt.eps2;
      const double scale = std::abs(eps_obs / (2.0 * eps_inv));
      spec.out->value = r.rate.value * eps_obs / (2.0 * eps_inv);
      spec.out->stat_err = r.stat_err * scale;
      spec.out->sys_err = r.sys_err * scale;
    }
  }
  if (rs.sigma12_1.value != 0.0 || rs.sigma12_2.value != 0.0) {
    rs.sigma12.value = 0.5 * (rs.sigma12_1.value + rs.sigma12_2.value);
    rs.sigma12.stat_err = 0.5 * std::hypot(rs.sigma12_1.stat_err, rs.sigma12_2.stat_err);
    // The dominant quoted error is the spread between the two directions.
    const double spread = 0.5 * std::abs(rs.sigma12_1.value - rs.sigma12_2.value);
    rs.sigma12.sys_err =
        std::max(spread, 0.5 * std::hypot(rs.sigma12_1.sys_err, rs.sigma12_2.sys_err));
  }

  // Bell zz channels: normalized signed initial rates.
  auto bell_zz = [&](const char* name, RateMeas* out) {
    const auto* rec = find_record(records, name);
    if (!rec) {
      rs.gaps.push_back(name);
      return;
    }
    const Series s = series_from_record(*rec);
    const InitialRate r = two_pass_initial(s, frac, opt.rate_guess, SlopeFlavor::normalized_signed);
    if (r.ok) *out = from_initial(r);
  };
  bell_zz("bell_zz_S0", &rs.mu_zq);
  bell_zz("bell_zz_psi_plus", &rs.mu_dq);
  if (rs.mu_zq.value != 0.0 || rs.mu_dq.value != 0.0) {
    rs.mu12.value = 0.5 * (rs.mu_zq.value + rs.mu_dq.value);
    rs.mu12.stat_err = 0.5 * std::hypot(rs.mu_zq.stat_err, rs.mu_dq.stat_err);
    rs.mu12.sys_err = 0.5 * std::hypot(rs.mu_zq.sys_err, rs.mu_dq.sys_err);
  }

  // Off-diagonal monoexponentials from the drift-cancelling half differences.
  auto bell_lambda = [&](const char* plus_name, const char* minus_name, RateMeas* out) {
    const auto* cp = find_record(records, plus_name);
    const auto* cm = find_record(records, minus_name);
    if (!cp || !cm) {
      rs.gaps.push_back(std::string(plus_name) + "/" + minus_name);
      return;
    }
    const auto [half_diff, half_sum] = zq_dq_refine(series_from_record(*cp), series_from_record(*cm));
    const MonoexpFit f = monoexp_fit(half_diff, ExpModel::decay);
    if (f.ok) *out = RateMeas{f.rate.value, f.rate.err, 0.0};
  };
  bell_lambda("bell_xx_T0z", "bell_xx_S0", &rs.lambda_zq);
  bell_lambda("bell_xx_psi_plus", "bell_xx_psi_minus", &rs.lambda_dq);

  return rs;
}

std::string series_to_csv(const Series& s) {
  std::string out = "t_seconds,value,sigma\n";
  char buf[96];
  for (size_t i = 0; i < s.size(); ++i) {
    const double sg = s.sigma.empty() ? 0.0 : s.sigma[i];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", s.t[i], s.y[i], sg);
    out += buf;
  }
  return out;
}

Series series_from_csv(const std::string& text) {
  Series s;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("t_seconds", 0) == 0) continue;
    std::istringstream ls(line);
    std::string cell;
    double vals[3] = {0, 0, 0};
    int k = 0;
    while (std::getline(ls, cell, ',') && k < 3) vals[k++] = std::stod(cell);
    if (k < 2) throw std::invalid_argument("series CSV: need at least t,value columns");
    s.t.push_back(vals[0]);
    s.y.push_back(vals[1]);
    s.sigma.push_back(vals[2]);
  }
  const bool all_zero = std::all_of(s.sigma.begin(), s.sigma.end(), [](double x) { return x == 0.0; });
  if (all_zero) s.sigma.clear();
  return s;
}

}  // namespace spinpair
