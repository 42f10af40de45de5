#include "spinpair/redfield.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spinpair/rng.hpp"

namespace spinpair {

void MicroParams::validate() const {
  if (k < 0.0 || tau_c < 0.0) throw std::invalid_argument("micro: k and tau_c must be >= 0");
  if (a1perp2 < 0 || a2perp2 < 0 || a1z2 < 0 || a2z2 < 0)
    throw std::invalid_argument("micro: second moments must be >= 0");
  if (std::abs(a1z2z) > std::sqrt(a1z2 * a2z2) * (1.0 + 1e-12))
    throw std::invalid_argument("micro: |<a1z a2z>| violates Cauchy-Schwarz");
  const auto f = dipolar_second_moments(k);
  const double b1 = 2.0 * std::sqrt(f[1] * a1perp2);
  const double b2 = 2.0 * std::sqrt(f[1] * a2perp2);
  if (std::abs(xcorr1) > b1 * (1.0 + 1e-12) || std::abs(xcorr2) > b2 * (1.0 + 1e-12))
    throw std::invalid_argument("micro: cross-correlation average violates its bound");
  if (slow_j.aj1z2 < 0 || slow_j.aj2z2 < 0 || slow_j.t1dist < 0)
    throw std::invalid_argument("micro: slow-J parameters must be >= 0");
  if (std::abs(slow_j.aj12) > std::sqrt(slow_j.aj1z2 * slow_j.aj2z2) * (1.0 + 1e-12))
    throw std::invalid_argument("micro: slow-J cross moment violates Cauchy-Schwarz");
}

std::array<double, 3> dipolar_second_moments(double k) {
  if (k < 0.0) throw std::invalid_argument("dipolar_second_moments: k must be >= 0");
  const double k2 = k * k;
  return {0.8 * k2, 0.3 * k2, 0.3 * k2};
}

DiagonalRates diagonal_rates(const MicroParams& p) {
  p.validate();
  const auto f = dipolar_second_moments(p.k);
  const double f0 = f[0], f1 = f[1], f2 = f[2];
  const SpectralDensity j = p.spectral();
  const double j_diff = j(p.omega1 - p.omega2);
  const double j_sum = j(p.omega1 + p.omega2);
  const double j1 = j(p.omega1);
  const double j2 = j(p.omega2);

  DiagonalRates r;
  r.mu1_d = f0 / 16.0 * j_diff + f1 / 2.0 * j1 + f2 * j_sum;
  r.mu2_d = f0 / 16.0 * j_diff + f1 / 2.0 * j2 + f2 * j_sum;
  r.mu1 = r.mu1_d + 2.0 * p.a1perp2 * j1;
  r.mu2 = r.mu2_d + 2.0 * p.a2perp2 * j2;
  r.sigma12 = -f0 / 16.0 * j_diff + f2 * j_sum;
  r.mu12_d = f1 / 2.0 * (j1 + j2);
  r.mu12 = r.mu12_d + 2.0 * p.a1perp2 * j1 + 2.0 * p.a2perp2 * j2;
  r.delta1 = p.xcorr1 * j1;
  r.delta2 = p.xcorr2 * j2;
  return r;
}

OffDiagonalRates offdiagonal_rates(const MicroParams& p) {
  p.validate();
  const auto f = dipolar_second_moments(p.k);
  const double f0 = f[0], f1 = f[1], f2 = f[2];
  const SpectralDensity j = p.spectral();
  const double j_diff = j(p.omega1 - p.omega2);
  const double j_sum = j(p.omega1 + p.omega2);
  const double j1 = j(p.omega1);
  const double j2 = j(p.omega2);

  OffDiagonalRates r;
  r.zq_d = f0 / 16.0 * j_diff + f1 / 4.0 * (j1 + j2);
  r.dq_d = f1 / 4.0 * (j1 + j2) + f2 * j_sum;
  const double alpha_common = p.a1perp2 * j1 + p.a2perp2 * j2;
  r.zq_alpha = 0.5 * (p.a1z2 + p.a2z2 - 2.0 * p.a1z2z) * j.zero() + alpha_common;
  r.dq_alpha = 0.5 * (p.a1z2 + p.a2z2 + 2.0 * p.a1z2z) * j.zero() + alpha_common;
  // Slow-J tail rates, exponential distant-spin correlation: Jtilde0 = 2 T1dist.
  const double jt0 = 2.0 * p.slow_j.t1dist;
  r.zq_j = 0.5 * (p.slow_j.aj1z2 + p.slow_j.aj2z2 - 2.0 * p.slow_j.aj12) * jt0;
  r.dq_j = 0.5 * (p.slow_j.aj1z2 + p.slow_j.aj2z2 + 2.0 * p.slow_j.aj12) * jt0;
  return r;
}

double anderson_weiss(double t, const std::function<double(double)>& corr) {
  if (t < 0.0) throw std::invalid_argument("anderson_weiss: t must be >= 0");
  if (t == 0.0) return 1.0;
  // Int_0^t (t - u) C(u) du by composite Simpson with doubling until the
  // exponent settles to ~1e-10 absolute.
  auto integrand = [&](double u) { return (t - u) * corr(u); };
  double prev = 0.0;
  for (int n = 64;; n *= 2) {
    const double h = t / n;
    double s = integrand(0.0) + integrand(t);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * integrand(i * h);
    const double val = s * h / 3.0;
    if (n >= 256 && std::abs(val - prev) < 1e-10 * std::max(1.0, std::abs(val))) {
      return std::exp(-val);
    }
    prev = val;
    if (n > (1 << 22)) return std::exp(-val);
  }
}

double anderson_weiss_exponential(double t, double second_moment, double t_corr) {
  if (t < 0.0) throw std::invalid_argument("anderson_weiss: t must be >= 0");
  if (t_corr <= 0.0 || second_moment == 0.0) return 1.0;
  const double x = t / t_corr;
  return std::exp(-second_moment * t_corr * t_corr * (x - 1.0 + std::exp(-x)));
}

namespace {

double quad_sum(std::initializer_list<double> xs) {
  double s = 0.0;
  for (double x : xs) s += x * x;
  return std::sqrt(s);
}

}  // namespace

RatioReport parameter_free_ratios(const DiagonalRates& d, const OffDiagonalRates& o,
                                  double mu_zq, double mu_dq, double eps1, double eps2,
                                  const RateUncertainties& u, uint64_t seed) {
  RatioReport rep;

  if (d.sigma12 != 0.0) {
    const double num = d.mu1 + d.mu2 - d.mu12;
    rep.r1.defined = true;
    rep.r1.r.value = num / d.sigma12;
    rep.r1.r.err = quad_sum({u.mu1 / d.sigma12, u.mu2 / d.sigma12, u.mu12 / d.sigma12,
                             num / (d.sigma12 * d.sigma12) * u.sigma12});
  } else {
    rep.r1.note = "sigma12 = 0: ratio undefined";
  }

  const double denom = d.delta1 * eps1 + d.delta2 * eps2;
  const double eps_sum = eps1 + eps2;
  if (denom != 0.0 && eps_sum != 0.0) {
    rep.r2.defined = true;
    rep.r2.r.value = (mu_zq - mu_dq) * eps_sum / denom;
    // Monte Carlo resampling; the numerator and denominator both involve
    // near-cancelling differences, so linear propagation alone is fragile.
    if (u.mu_zq > 0 || u.mu_dq > 0 || u.delta1 > 0 || u.delta2 > 0) {
      Philox rng(seed, 0x52415432);  // fixed stream tag for R2
      const int n = 10000;
      double mean = 0.0, m2 = 0.0;
      int used = 0;
      for (int i = 0; i < n; ++i) {
        const double zq = mu_zq + u.mu_zq * rng.normal();
        const double dq = mu_dq + u.mu_dq * rng.normal();
        const double d1 = d.delta1 + u.delta1 * rng.normal();
        const double d2 = d.delta2 + u.delta2 * rng.normal();
        const double dd = d1 * eps1 + d2 * eps2;
        if (dd == 0.0) continue;
        const double val = (zq - dq) * eps_sum / dd;
        ++used;
        const double delta = val - mean;
        mean += delta / used;
        m2 += delta * (val - mean);
      }
      rep.r2.r.err = used > 1 ? std::sqrt(m2 / (used - 1)) : 0.0;
    }
  } else {
    rep.r2.note = "delta1*eps1 + delta2*eps2 = 0: ratio undefined";
  }

  if (o.zq_d != 0.0) {
    rep.r3.defined = true;
    rep.r3.r.value = o.dq_d / o.zq_d;
  } else {
    rep.r3.note = "lambda_ZQ^d = 0: ratio undefined";
  }
  return rep;
}

MicroExtraction extract_micro_from_rates(const DiagonalRates& d, double lambda_zq,
                                         double lambda_dq, const RateUncertainties& u,
                                         double omega_max_tau_c) {
  if (d.sigma12 <= 0.0)
    throw std::invalid_argument("extract_micro_from_rates: sigma12 must be > 0");
  MicroExtraction e;
  if (omega_max_tau_c > 0.05)
    e.warnings.push_back("extreme-narrowing extraction applied with Omega_max*tau_c > 0.05");

  e.k2j0 = {4.0 * d.sigma12, 4.0 * u.sigma12};
  e.a1perp_j0 = {0.5 * d.mu1 - d.sigma12, quad_sum({0.5 * u.mu1, u.sigma12})};
  e.a2perp_j0 = {0.5 * d.mu2 - d.sigma12, quad_sum({0.5 * u.mu2, u.sigma12})};
  e.az_sum_j0 = {lambda_dq + lambda_zq - d.mu1 - d.mu2 + 1.4 * d.sigma12,
                 quad_sum({u.lambda_dq, u.lambda_zq, u.mu1, u.mu2, 1.4 * u.sigma12})};
  e.az_cross_j0 = {0.5 * (lambda_dq - lambda_zq - d.sigma12),
                   0.5 * quad_sum({u.lambda_dq, u.lambda_zq, u.sigma12})};
  e.xcorr1_j0 = {d.delta1, u.delta1};
  e.xcorr2_j0 = {d.delta2, u.delta2};

  for (const auto* m : {&e.a1perp_j0, &e.a2perp_j0, &e.az_sum_j0})
    if (m->value < 0.0)
      e.warnings.push_back("extracted second moment is negative: model inconsistency");
  return e;
}

Measured mu12_from_bell_rates(Measured mu_zq, Measured mu_dq) {
  return {0.5 * (mu_zq.value + mu_dq.value), 0.5 * quad_sum({mu_zq.err, mu_dq.err})};
}

std::array<BoundCheck, 2> cross_correlation_bound(const MicroParams& p) {
  const auto f = dipolar_second_moments(p.k);
  std::array<BoundCheck, 2> r;
  r[0].lhs = std::abs(p.xcorr1);
  r[0].rhs = 2.0 * std::sqrt(f[1] * p.a1perp2);
  r[0].pass = r[0].lhs <= r[0].rhs * (1.0 + 1e-12);
  r[1].lhs = std::abs(p.xcorr2);
  r[1].rhs = 2.0 * std::sqrt(f[1] * p.a2perp2);
  r[1].pass = r[1].lhs <= r[1].rhs * (1.0 + 1e-12);
  return r;
}

}  // namespace spinpair
