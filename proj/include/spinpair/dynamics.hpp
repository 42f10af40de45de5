#pragma once

#include <optional>

#include "spinpair/redfield.hpp"
#include "spinpair/spinops.hpp"

namespace spinpair {

/// Longitudinal sector state: (<S1z>, <S2z>, <2S1zS2z>).
struct DiagState {
  double s1z = 0.0, s2z = 0.0, zz = 0.0;
};

/// Off-diagonal eigenmode amplitudes:
/// plus = <2S1xS2x + 2S1yS2y> (ZQ), minus = <2S1xS2x - 2S1yS2y> (DQ).
struct OffDiagState {
  double plus = 0.0, minus = 0.0;
};

/// Double-rotating-frame rf Hamiltonian
///   H = -w1 S1x - w2 S2x + wj S1z S2z   (rad/s).
struct RfHamiltonian {
  double omega1 = 0.0, omega2 = 0.0, omega_j = 0.0;
};

Mat4 rf_hamiltonian_matrix(const RfHamiltonian& h);

/// Ideal instantaneous hard pulse: rho -> U rho U^dag, U = exp(-i angle S).
Mat4 apply_pulse(const Mat4& rho, int spin, Axis axis, double angle);

/// Pulse unitary by itself (used by the readout bookkeeping and tomography).
Mat4 pulse_unitary(int spin, Axis axis, double angle);

/// Exact propagation under the rf Hamiltonian for time t.
Mat4 evolve_coherent(const Mat4& rho, const RfHamiltonian& h, double t);

/// Slow-J context for the non-Markovian decay factor multiplying the
/// off-diagonal relaxation; the fast rates act as plain exponentials.
struct AndersonWeissContext {
  double h2_zq = 0.0;  // <(a1z^J - a2z^J)^2>
  double h2_dq = 0.0;  // <(a1z^J + a2z^J)^2>
  double t1dist = 0.0;
};

/// x(t) = x_eq + exp(-G t)(x0 - x_eq), G the symmetric 3x3 rate matrix.
/// Negative eigenvalues (possible for noisy measured rates) propagate as-is;
/// spectrum_flag reports them when a pointer is supplied.
DiagState evolve_diagonal(const DiagState& x0, const DiagonalRates& r, double eps1,
                          double eps2, double t, bool* negative_eigenvalue = nullptr);

/// The ZQ and DQ eigenmodes decay independently; with an Anderson-Weiss
/// context the slow-J part enters through G(t) instead of exp(-lambda_j t).
OffDiagState evolve_offdiagonal(const OffDiagState& x0, const OffDiagonalRates& o, double t,
                                const std::optional<AndersonWeissContext>& aw = std::nullopt);

/// Gradient crusher for a heteronuclear pair: any component that acquires a
/// field-dependent phase is dephased to zero. Both spins see the gradient
/// with their own gyromagnetic ratio, so the z-basis zero-quantum coherences
/// dephase as well; only S1z, S2z and 2S1zS2z survive.
CoherenceVector apply_gradient_crusher(const CoherenceVector& v);

}  // namespace spinpair
