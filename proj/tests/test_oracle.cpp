#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spinpair/oracle.hpp"
#include "spinpair/rng.hpp"

using namespace spinpair;
using namespace spinpair::oracle;

namespace {

// Scaled parameter set: rates ~1e-2 per unit time with tau_c = 1, staying in
// the weak-coupling regime. Ratios mirror the measured system but the
// cross-correlations are boosted so the small rates resolve at desk-scale
// ensembles.
MicroParams mc_params() {
  MicroParams p;
  p.tau_c = 1.0;
  const double j0 = 2.0;
  const double u = 0.02;  // rate unit
  p.k = std::sqrt(0.76 * u / j0);
  p.omega1 = 0.10;  // extreme-narrowing-ish, resolvable oscillations
  p.omega2 = p.omega1 / 3.976;
  p.a1perp2 = 0.06 * u / j0;
  p.a2perp2 = 0.02 * u / j0;
  p.a1z2 = 0.12 * u / j0;
  p.a2z2 = 0.13 * u / j0;
  p.a1z2z = 0.026 * u / j0;
  p.xcorr1 = 0.08 * u / j0;
  p.xcorr2 = -0.06 * u / j0;
  p.eps1 = 1.0;
  p.eps2 = 0.2515;
  return p;
}

}  // namespace

TEST_CASE("rotational trajectory statistics") {
  const double tau_c = 1.0, dt = 0.02;
  const Trajectory tr = rotational_trajectory(1.0, tau_c, dt, 40000.0, 99);

  // cos(theta) is uniform on [-1, 1]: mean 0, variance 1/3.
  double mean = 0, var = 0;
  for (const auto& n : tr.direction) mean += n[2];
  mean /= tr.direction.size();
  for (const auto& n : tr.direction) var += (n[2] - mean) * (n[2] - mean);
  var /= tr.direction.size();
  // Correlated samples: effective N ~ duration / tau_c.
  const double n_eff = 40000.0 / tau_c;
  CHECK(std::abs(mean) < 3.0 / std::sqrt(3.0 * n_eff));
  CHECK(std::abs(var - 1.0 / 3.0) < 4.0 * (1.0 / 3.0) / std::sqrt(n_eff));

  // Second moments of the dipolar coefficients: 0.8, 0.3, 0.3 within 3 sigma.
  double f0 = 0, f1 = 0, f2 = 0;
  for (size_t i = 0; i < tr.f0.size(); ++i) {
    f0 += tr.f0[i] * tr.f0[i];
    f1 += std::norm(tr.f1[i]);
    f2 += std::norm(tr.f2[i]);
  }
  f0 /= tr.f0.size();
  f1 /= tr.f0.size();
  f2 /= tr.f0.size();
  CHECK(std::abs(f0 - 0.8) < 3.0 * 1.0 / std::sqrt(n_eff));
  CHECK(std::abs(f1 - 0.3) < 3.0 * 0.35 / std::sqrt(n_eff));
  CHECK(std::abs(f2 - 0.3) < 3.0 * 0.35 / std::sqrt(n_eff));

  // Fitted correlation time of F0 within 5%: log-linear fit of the
  // autocorrelation over one decade.
  const size_t max_lag = static_cast<size_t>(2.0 * tau_c / dt);
  std::vector<double> ac(max_lag, 0.0);
  const size_t n = tr.f0.size() - max_lag;
  for (size_t lag = 0; lag < max_lag; ++lag) {
    double s = 0;
    for (size_t i = 0; i < n; ++i) s += tr.f0[i] * tr.f0[i + lag];
    ac[lag] = s / n;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (size_t lag = 0; lag < max_lag; ++lag) {
    if (ac[lag] <= 0.1 * ac[0]) break;
    const double x = lag * dt, y = std::log(ac[lag] / ac[0]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += y * x;
    ++m;
  }
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  CHECK(-1.0 / slope == doctest::Approx(tau_c).epsilon(0.05));

  CHECK_THROWS(rotational_trajectory(1.0, 1.0, 0.2, 10.0, 1));
}

TEST_CASE("stochastic relaxation: dipolar extreme narrowing ratio") {
  MicroParams p = mc_params();
  p.a1perp2 = p.a2perp2 = p.a1z2 = p.a2z2 = p.a1z2z = 0.0;
  p.xcorr1 = p.xcorr2 = 0.0;

  McOptions opt;
  opt.duration = 150.0;
  opt.n_samples = 40;
  opt.ensemble = 600;
  opt.seed = 12;
  opt.threads = 4;
  opt.backend = kernels::best_available();
  const SectorSeries s = stochastic_relaxation(p, opt);
  CHECK(s.max_unitarity_drift < 1e-8);
  const McRates r = fit_rates(s);

  const DiagonalRates ana = diagonal_rates(p);
  // mu1/sigma12 -> 2 in extreme narrowing, within the MC statistics.
  CHECK(r.mu1.value / r.sigma12.value == doctest::Approx(2.0).epsilon(0.15));
  CHECK(r.mu1.value == doctest::Approx(ana.mu1).epsilon(0.1));
  CHECK(r.sigma12.value == doctest::Approx(ana.sigma12).epsilon(0.15));
}

TEST_CASE("stochastic relaxation: equal z fields protect the ZQ mode") {
  MicroParams p = mc_params();
  p.k = 0.0;
  p.xcorr1 = p.xcorr2 = 0.0;
  p.a1perp2 = p.a2perp2 = 0.0;
  p.a1z2 = p.a2z2 = p.a1z2z = 0.01;  // alpha_1z == alpha_2z identically

  McOptions opt;
  opt.duration = 120.0;
  opt.n_samples = 30;
  opt.ensemble = 400;
  opt.seed = 5;
  opt.threads = 4;
  opt.backend = kernels::best_available();
  const SectorSeries s = stochastic_relaxation(p, opt);
  // ZQ coherence is untouched (h = a1z - a2z = 0); DQ decays.
  CHECK(s.zq.back() == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(s.dq.back() < 0.2);
}

TEST_CASE("deterministic results independent of thread count") {
  MicroParams p = mc_params();
  McOptions opt;
  opt.duration = 30.0;
  opt.n_samples = 10;
  opt.ensemble = 64;
  opt.seed = 31;
  opt.backend = kernels::Backend::scalar;
  opt.threads = 1;
  const SectorSeries a = stochastic_relaxation(p, opt);
  opt.threads = 4;
  const SectorSeries b = stochastic_relaxation(p, opt);
  for (size_t i = 0; i < a.times.size(); ++i) {
    for (int e = 0; e < 9; ++e)
      CHECK(a.diag[i][static_cast<size_t>(e)] == b.diag[i][static_cast<size_t>(e)]);
    CHECK(a.zq[i] == b.zq[i]);
    CHECK(a.dq[i] == b.dq[i]);
  }
}

TEST_CASE("telegraph oracle matches the closed-form decay") {
  // Weak coupling, several spins: h_rms * T1dist ~ 0.2, so the Gaussian
  // (Anderson-Weiss) form is exact to below the statistical resolution.
  TelegraphParams tp;
  tp.j1k.assign(8, 0.0);
  tp.j2k.assign(8, 0.03);
  tp.t1dist = 3.0;
  const TelegraphResult r = telegraph_relaxation(tp, 80.0, 50, 20000, 17, 4, 64);
  CHECK(r.h2_zq == doctest::Approx(r.h2_dq));  // couplings to spin 2 only
  CHECK(r.h2_dq == doctest::Approx(8.0 * 0.25 * 0.03 * 0.03));

  int outliers = 0;
  for (size_t i = 0; i < r.times.size(); ++i) {
    const double ref = anderson_weiss_exponential(r.times[i], r.h2_dq, tp.t1dist);
    const double band = std::max(3.0 * r.err_dq[i], 1e-12);
    if (std::abs(r.g_dq[i] - ref) > band) ++outliers;
    CHECK(r.g_zq[i] == doctest::Approx(r.g_dq[i]).epsilon(1e-9));  // identical modes
  }
  // 3-sigma bands: expect ~0.3% outliers; allow a few on 51 points.
  CHECK(outliers <= 3);
}

TEST_CASE("telegraph oracle: weak coupling tail rate and delayed onset") {
  TelegraphParams tp;
  tp.j1k = {0.05};
  tp.j2k = {-0.05};
  tp.t1dist = 1.0;
  const double h2 = 0.25 * 0.1 * 0.1;  // (j1 - j2)^2 / 4
  const TelegraphResult r = telegraph_relaxation(tp, 400.0, 80, 20000, 23, 4);
  CHECK(r.h2_zq == doctest::Approx(h2));
  // Tail rate ~ h2 * T1dist (= 0.5 <h^2> * 2 T1dist).
  size_t i1 = 20, i2 = 60;
  const double slope = -(std::log(r.g_zq[i2]) - std::log(r.g_zq[i1])) /
                       (r.times[i2] - r.times[i1]);
  CHECK(slope == doctest::Approx(h2 * tp.t1dist).epsilon(0.05));
  // Early log-slope is below the asymptotic one (delayed onset).
  const double early = -std::log(r.g_zq[1]) / r.times[1];
  CHECK(early < 0.9 * h2 * tp.t1dist);
}

TEST_CASE("operator oracle reproduces every analytic rate") {
  Philox rng(4242);
  for (int trial = 0; trial < 20; ++trial) {
    MicroParams p;
    p.tau_c = 1.0;
    const double amp = 1e-4;  // rates ~1e-8: far below the QOT frequencies
    p.k = amp * (0.5 + rng.uniform());
    p.omega1 = 0.03 + 3.0 * rng.uniform();  // arbitrary Omega * tau_c
    p.omega2 = p.omega1 * (0.15 + 0.5 * rng.uniform());
    p.a1perp2 = amp * amp * rng.uniform();
    p.a2perp2 = amp * amp * rng.uniform();
    p.a1z2 = amp * amp * rng.uniform();
    p.a2z2 = amp * amp * rng.uniform();
    p.a1z2z = 0.5 * std::sqrt(p.a1z2 * p.a2z2) * (2.0 * rng.uniform() - 1.0);
    const double bound1 = 2.0 * std::sqrt(0.3 * p.k * p.k * p.a1perp2);
    const double bound2 = 2.0 * std::sqrt(0.3 * p.k * p.k * p.a2perp2);
    p.xcorr1 = 0.8 * bound1 * (2.0 * rng.uniform() - 1.0);
    p.xcorr2 = 0.8 * bound2 * (2.0 * rng.uniform() - 1.0);
    p.slow_j.aj1z2 = amp * amp * rng.uniform();
    p.slow_j.aj2z2 = amp * amp * rng.uniform();
    p.slow_j.aj12 = 0.5 * std::sqrt(p.slow_j.aj1z2 * p.slow_j.aj2z2);
    p.slow_j.t1dist = 1.0 + 5.0 * rng.uniform();

    const OperatorRates orc = appendix_rates(p);
    const DiagonalRates od = orc.diagonal();
    const DiagonalRates ad = diagonal_rates(p);
    const OffDiagonalRates ao = offdiagonal_rates(p);

    CHECK(od.mu1 == doctest::Approx(ad.mu1).epsilon(1e-10));
    CHECK(od.mu2 == doctest::Approx(ad.mu2).epsilon(1e-10));
    CHECK(od.mu12 == doctest::Approx(ad.mu12).epsilon(1e-10));
    CHECK(od.sigma12 == doctest::Approx(ad.sigma12).epsilon(1e-10));
    CHECK(od.delta1 == doctest::Approx(ad.delta1).epsilon(1e-10));
    CHECK(od.delta2 == doctest::Approx(ad.delta2).epsilon(1e-10));
    CHECK(orc.lambda_zq() == doctest::Approx(ao.lambda_zq()).epsilon(1e-10));
    CHECK(orc.lambda_dq() == doctest::Approx(ao.lambda_dq()).epsilon(1e-10));
    // ZQ and DQ are relaxation eigenmodes: no cross coupling.
    CHECK(std::abs(orc.zq_dq_mixing()) < 1e-10 * std::max(orc.lambda_zq(), 1e-300));
  }
}

TEST_CASE("operator oracle: dipolar line items") {
  MicroParams p;
  p.tau_c = 1.0;
  p.k = 1e-4;
  p.omega1 = 1.0;
  p.omega2 = 0.25;
  const auto f = dipolar_second_moments(p.k);
  const SpectralDensity j{p.tau_c};
  const OperatorRates orc = appendix_rates(p);

  // mu12^d = <|F1|^2>/2 [J(O1) + J(O2)] read from the zz double commutator.
  CHECK(orc.r[op::ZZ][op::ZZ] ==
        doctest::Approx(0.5 * f[1] * (j(p.omega1) + j(p.omega2))).epsilon(1e-12));
  // sigma12 includes the negative J(O1 - O2) flip-flop term.
  const double sigma_expect =
      -f[0] / 16.0 * j(p.omega1 - p.omega2) + f[2] * j(p.omega1 + p.omega2);
  CHECK(orc.r[op::S1Z][op::S2Z] == doctest::Approx(sigma_expect).epsilon(1e-12));
  // ZQ eigenmode coefficient of the flip-flop double commutator:
  // lambda_ZQ^d - <|F1|^2>/4 [J1 + J2] = <F0^2>/16 J(O1 - O2).
  CHECK(orc.lambda_zq() - 0.25 * f[1] * (j(p.omega1) + j(p.omega2)) ==
        doctest::Approx(f[0] / 16.0 * j(p.omega1 - p.omega2)).epsilon(1e-10));
}
