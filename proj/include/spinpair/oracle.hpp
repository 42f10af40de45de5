#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spinpair/kernels.hpp"
#include "spinpair/redfield.hpp"
#include "spinpair/spinops.hpp"

namespace spinpair::oracle {

// ---------------------------------------------------------------------------
// Stochastic trajectories

struct Trajectory {
  double dt = 0.0;
  std::vector<std::array<double, 3>> direction;  // internuclear unit vector
  std::vector<double> f0;                        // k (1 - 3 cos^2 theta)
  std::vector<cplx> f1, f2;
};

/// Isotropic rotational diffusion of the internuclear unit vector; the
/// per-step angular variance is set so the rank-2 correlation time equals
/// tau_c (tau_c = 1/(6 D_rot)). Requires dt <= tau_c / 20.
Trajectory rotational_trajectory(double k, double tau_c, double dt, double duration,
                                 uint64_t seed);

// ---------------------------------------------------------------------------
// Oracle A: ensemble propagation under the fluctuating Hamiltonians

struct McOptions {
  double duration = 0.0;   // s
  int n_samples = 50;      // sampled time points (excluding t = 0)
  int ensemble = 10000;
  uint64_t seed = 1;
  int threads = 1;
  int batches = 16;        // statistical batches; tree-reduced in fixed order
  double dt = 0.0;         // 0 = auto: min(tau_c/50, 0.02/omega_max)
  kernels::Backend backend = kernels::Backend::scalar;
  bool include_omega_j = false;  // the secular J term commutes with every
                                 // monitored observable; off by default
};

/// Ensemble-averaged decay of the monitored sectors, stored as the response
/// to unit initial conditions: diag[t][3*m+l] = <Tr(P_m U P_l U^dag)> over
/// the (S1z, S2z, 2S1zS2z) block, zq/dq likewise for the two coherence
/// eigenmodes. Per-batch copies feed the statistical errors.
struct SectorSeries {
  std::vector<double> times;
  std::vector<std::array<double, 9>> diag;
  std::vector<double> zq, dq;
  std::vector<std::vector<std::array<double, 9>>> diag_batch;
  std::vector<std::vector<double>> zq_batch, dq_batch;
  double max_unitarity_drift = 0.0;
  std::vector<std::string> warnings;
};

SectorSeries stochastic_relaxation(const MicroParams& p, const McOptions& opt);

struct RateEstimate {
  double value = 0.0;
  double stat_err = 0.0;
};

struct McRates {
  RateEstimate mu1, mu2, mu12, sigma12, delta1, delta2;
  RateEstimate lambda_zq, lambda_dq;
};

/// Rate extraction from the ensemble decay: matrix logarithm of the 3x3
/// response inside a window chosen from a first-pass estimate, log-linear
/// fits for the coherence modes; batch spread gives the errors.
McRates fit_rates(const SectorSeries& s);

// ---------------------------------------------------------------------------
// Telegraph-noise oracle for the slow-J mechanism

struct TelegraphParams {
  std::vector<double> j1k;  // couplings of distant spins to spin 1 [rad/s]
  std::vector<double> j2k;  // and to spin 2 (same length)
  double t1dist = 0.0;      // s
};

struct TelegraphResult {
  std::vector<double> times;
  std::vector<double> g_zq, g_dq;          // ensemble-averaged coherence factor
  std::vector<double> err_zq, err_dq;      // batch standard errors
  double h2_zq = 0.0, h2_dq = 0.0;         // <h^2> for the two modes
};

TelegraphResult telegraph_relaxation(const TelegraphParams& p, double duration, int n_times,
                                     int ensemble, uint64_t seed, int threads = 1,
                                     int batches = 16);

// ---------------------------------------------------------------------------
// Oracle B: operator-level reconstruction of the full relaxation matrix

struct OperatorRates {
  // dv_m/dt = -sum_l r[m][l] v_l over the 15-operator basis.
  std::array<std::array<double, 15>, 15> r{};

  DiagonalRates diagonal() const;
  double lambda_zq() const;
  double lambda_dq() const;
  /// Coupling between the ZQ and DQ eigenmodes (should vanish).
  double zq_dq_mixing() const;
};

/// Expands the double commutators of every fluctuating Hamiltonian term
/// numerically, applies the stated ensemble averages, drops quickly
/// oscillating pairs (|w_a + w_b| > qot_factor * |rate|), and integrates the
/// correlation functions into spectral-density factors.
OperatorRates appendix_rates(const MicroParams& p, double qot_factor = 100.0);

}  // namespace spinpair::oracle
