#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

namespace spinpair {

/// Normalized correlation spectrum, J(w) = Int C(tau) e^{-i w tau} dtau with
/// C(0) = 1. The exponential model gives J(w) = 2 tau_c / (1 + w^2 tau_c^2).
struct SpectralDensity {
  double tau_c = 0.0;

  double operator()(double omega) const {
    const double wt = omega * tau_c;
    return 2.0 * tau_c / (1.0 + wt * wt);
  }
  double zero() const { return 2.0 * tau_c; }
};

/// Second moments of the slowly fluctuating z-fields from weak J-couplings to
/// distant spins, with their own (much longer) correlation time T1dist.
struct SlowJParams {
  double aj1z2 = 0.0;   // <(alpha1z^J)^2>, rad^2/s^2
  double aj2z2 = 0.0;   // <(alpha2z^J)^2>
  double aj12 = 0.0;    // <alpha1z^J alpha2z^J>
  double t1dist = 0.0;  // s
};

/// Microscopic inputs. Local-field second moments are same-time averages in
/// rad^2/s^2; k is the intra-pair dipolar constant gamma1*gamma2*hbar/r^3.
struct MicroParams {
  double k = 0.0;        // rad/s
  double omega1 = 0.0;   // rad/s
  double omega2 = 0.0;   // rad/s
  double omega_j = 0.0;  // rad/s (J coupling as angular frequency)
  double tau_c = 0.0;    // s

  double a1perp2 = 0.0;  // <|alpha_1perp|^2>
  double a2perp2 = 0.0;
  double a1z2 = 0.0;     // <alpha_1z^2>
  double a2z2 = 0.0;
  double a1z2z = 0.0;    // <alpha_1z alpha_2z>
  double xcorr1 = 0.0;   // <F1 alpha_1perp^* + F1^* alpha_1perp>
  double xcorr2 = 0.0;

  SlowJParams slow_j;

  double eps1 = 0.0;  // equilibrium polarizations (dimensionless)
  double eps2 = 0.0;

  SpectralDensity spectral() const { return SpectralDensity{tau_c}; }

  /// Checks positivity and the Cauchy-Schwarz bounds; throws on violation.
  void validate() const;
};

struct Measured {
  double value = 0.0;
  double err = 0.0;
};

struct DiagonalRates {
  double mu1 = 0.0, mu2 = 0.0, mu12 = 0.0;
  double sigma12 = 0.0;
  double delta1 = 0.0, delta2 = 0.0;
  // Mechanism split, kept for the parameter-free ratio on the dipolar parts.
  double mu1_d = 0.0, mu2_d = 0.0, mu12_d = 0.0;
};

struct OffDiagonalRates {
  double zq_d = 0.0, zq_alpha = 0.0, zq_j = 0.0;
  double dq_d = 0.0, dq_alpha = 0.0, dq_j = 0.0;

  // Totals are derived so a hand-built rate set cannot fall out of sync.
  double lambda_zq() const { return zq_d + zq_alpha + zq_j; }
  double lambda_dq() const { return dq_d + dq_alpha + dq_j; }
  double lambda_zq_fast() const { return zq_d + zq_alpha; }
  double lambda_dq_fast() const { return dq_d + dq_alpha; }
};

/// Isotropic second moments of the dipolar coefficients:
/// (<F0^2>, <|F1|^2>, <|F2|^2>) = (4/5, 3/10, 3/10) k^2.
std::array<double, 3> dipolar_second_moments(double k);

DiagonalRates diagonal_rates(const MicroParams& p);
OffDiagonalRates offdiagonal_rates(const MicroParams& p);

/// Anderson-Weiss decay G(t) = exp[-Int_0^t (t-t') C(t') dt'] for an
/// arbitrary correlation function C (C(0) = second moment). Numeric
/// quadrature, absolute tolerance ~1e-10 on the exponent.
double anderson_weiss(double t, const std::function<double(double)>& corr);

/// Closed form for C(t) = s * exp(-t/T):
/// G(t) = exp[-s T^2 (t/T - 1 + e^{-t/T})].
double anderson_weiss_exponential(double t, double second_moment, double t_corr);

struct Ratio {
  Measured r;
  bool defined = false;
  std::string note;
};

struct RatioReport {
  Ratio r1;  // (mu1 + mu2 - mu12) / sigma12, theory 2.8
  Ratio r2;  // (muZQ - muDQ)(eps1+eps2)/(delta1 eps1 + delta2 eps2), theory 8
  Ratio r3;  // lambda_DQ^d / lambda_ZQ^d, theory 9/4
};

struct RateUncertainties {
  double mu1 = 0.0, mu2 = 0.0, mu12 = 0.0, sigma12 = 0.0;
  double delta1 = 0.0, delta2 = 0.0;
  double mu_zq = 0.0, mu_dq = 0.0;
  double lambda_zq = 0.0, lambda_dq = 0.0;
};

/// Parameter-free combinations with first-order error propagation; R2 is
/// additionally resampled (1e4 Monte Carlo draws) because its numerator and
/// denominator both come from near-cancelling differences.
RatioReport parameter_free_ratios(const DiagonalRates& d, const OffDiagonalRates& o,
                                  double mu_zq, double mu_dq, double eps1, double eps2,
                                  const RateUncertainties& u = {}, uint64_t seed = 1);

struct MicroExtraction {
  Measured k2j0;            // k^2 J0 = 4 sigma12
  Measured a1perp_j0;       // <|alpha_1perp|^2> J0 = mu1/2 - sigma12
  Measured a2perp_j0;
  Measured az_sum_j0;       // [<a1z^2>+<a2z^2>] J0
  Measured az_cross_j0;     // <a1z a2z> J0
  Measured xcorr1_j0;       // = delta1
  Measured xcorr2_j0;
  std::vector<std::string> warnings;
};

/// Inverse map from measured rates to microscopic characteristics. Valid in
/// extreme narrowing; emits a warning when Omega_max * tau_c > 0.05 is
/// signalled by the caller, and flags negative extracted second moments.
MicroExtraction extract_micro_from_rates(const DiagonalRates& d, double lambda_zq,
                                         double lambda_dq, const RateUncertainties& u = {},
                                         double omega_max_tau_c = 0.0);

/// mu12 = (muZQ + muDQ)/2.
Measured mu12_from_bell_rates(Measured mu_zq, Measured mu_dq);

struct BoundCheck {
  double lhs = 0.0, rhs = 0.0;
  bool pass = false;
};

/// Eq.-level sanity bound |xcorr_n| <= 2 sqrt(<|F1|^2> <|alpha_nperp|^2>).
std::array<BoundCheck, 2> cross_correlation_bound(const MicroParams& p);

}  // namespace spinpair
