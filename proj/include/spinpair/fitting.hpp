#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spinpair/redfield.hpp"
#include "spinpair/sequences.hpp"

namespace spinpair {

struct Series {
  std::vector<double> t;
  std::vector<double> y;
  std::vector<double> sigma;  // optional; empty = unweighted

  size_t size() const { return t.size(); }
};

struct PolyFit {
  bool ok = false;
  std::string error;
  std::vector<double> coeff;            // a, b, c, (d)
  std::vector<double> coeff_err;        // sqrt of covariance diagonal
  double residual_norm = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
  size_t points = 0;
};

/// Least-squares a + b t + c t^2 over points inside [window_lo, window_hi];
/// needs at least 4 points. degree 3 adds the cubic term used for the
/// systematic-error estimate.
PolyFit poly_fit(const Series& s, double window_lo, double window_hi, int degree = 2);

struct InitialRate {
  bool ok = false;
  std::string error;
  Measured rate;           // |b/a| or signed b (see flavor)
  double sys_err = 0.0;    // |slope(parabolic) - slope(cubic)|
  double stat_err = 0.0;
  double a = 0.0, b = 0.0;
  double window_hi = 0.0;
};

enum class SlopeFlavor {
  normalized_abs,   // |b/a|
  normalized_signed,  // -b/a (signed decay rate of the monitored amplitude)
  raw_slope           // b itself
};

/// Parabolic initial fit with the cubic-difference systematic error. The
/// reported uncertainty is the quadrature sum of the statistical and
/// systematic parts.
InitialRate parabolic_initial_fit(const Series& s, double window_lo, double window_hi,
                                  SlopeFlavor flavor = SlopeFlavor::normalized_abs);

struct MonoexpFit {
  bool ok = false;
  std::string error;
  Measured rate;       // lambda
  double amplitude = 0.0;
  double offset = 0.0;  // y_inf for the recovery model
  double residual_norm = 0.0;
  int iterations = 0;
};

enum class ExpModel {
  decay,     // y = A exp(-lambda t)
  recovery,  // y = y_inf (1 - A exp(-lambda t))
};

/// Gauss-Newton with Levenberg damping, analytic Jacobians, at most 200
/// iterations, convergence at relative step < 1e-10.
MonoexpFit monoexp_fit(const Series& s, ExpModel model = ExpModel::decay);

/// ((C+ - C-)/2, (C+ + C-)/2). The half difference feeds the exponential
/// fit; the half sum exposes any common drift.
std::pair<Series, Series> zq_dq_refine(const Series& c_plus, const Series& c_minus);

/// Rate with separate statistical and systematic (parabolic-vs-cubic)
/// uncertainty components.
struct RateMeas {
  double value = 0.0;
  double stat_err = 0.0;
  double sys_err = 0.0;
  double err() const { return std::sqrt(stat_err * stat_err + sys_err * sys_err); }
};

struct RateSet {
  RateMeas mu1, mu2;
  RateMeas sigma12_1, sigma12_2, sigma12;
  RateMeas delta1, delta2;
  RateMeas mu_zq, mu_dq, mu12;
  RateMeas lambda_zq, lambda_dq;
  std::vector<std::string> gaps;  // experiments that were missing
  bool complete() const { return gaps.empty(); }
};

struct ExtractionOptions {
  // First-pass initial-fit window is 0.2/rate_guess, then the window shrinks
  // to 0.2/rate_estimate for the final pass.
  double window_fraction = 0.2;
  double rate_guess = 1.0;  // 1/s, coarse scale for the first pass
  double eps1 = 0.0, eps2 = 0.0;
};

/// Row-by-row extraction from the battery produced by run_table_battery.
RateSet extract_rate_set(const std::vector<ExperimentRecord>& records,
                         const ExtractionOptions& opt);

Series series_from_record(const ExperimentRecord& rec);

/// CSV with header "t_seconds,value,sigma".
std::string series_to_csv(const Series& s);
Series series_from_csv(const std::string& text);

}  // namespace spinpair
