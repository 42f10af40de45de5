#include "spinpair/dynamics.hpp"

#include <cmath>

#include "spinpair/linalg.hpp"

namespace spinpair {

Mat4 rf_hamiltonian_matrix(const RfHamiltonian& h) {
  return -h.omega1 * spin_op(1, Axis::x) - h.omega2 * spin_op(2, Axis::x) +
         h.omega_j * (0.5 * product_basis()[op::ZZ]);  // S1z S2z
}

Mat4 pulse_unitary(int spin, Axis axis, double angle) {
  // exp(-i angle S) = cos(angle/2) I - 2i sin(angle/2) S for spin-1/2 parts.
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  Mat4 u = c * Mat4::identity();
  u += cplx(0.0, -2.0 * s) * spin_op(spin, axis);
  return u;
}

Mat4 apply_pulse(const Mat4& rho, int spin, Axis axis, double angle) {
  if (angle == 0.0) return rho;
  const Mat4 u = pulse_unitary(spin, axis, angle);
  return conjugate(u, rho);
}

Mat4 evolve_coherent(const Mat4& rho, const RfHamiltonian& h, double t) {
  if (t < 0.0) throw std::invalid_argument("evolve_coherent: t must be >= 0");
  if (t == 0.0) return rho;
  const Mat4 u = unitary_exp(rf_hamiltonian_matrix(h), t);
  return conjugate(u, rho);
}

DiagState evolve_diagonal(const DiagState& x0, const DiagonalRates& r, double eps1,
                          double eps2, double t, bool* negative_eigenvalue) {
  if (t < 0.0) throw std::invalid_argument("evolve_diagonal: t must be >= 0");
  Sym3 g;
  g(0, 0) = r.mu1;
  g(1, 1) = r.mu2;
  g(2, 2) = r.mu12;
  g(0, 1) = g(1, 0) = r.sigma12;
  g(0, 2) = g(2, 0) = r.delta1;
  g(1, 2) = g(2, 1) = r.delta2;
  const Eig3 e = jacobi_eig3(g);
  if (negative_eigenvalue) *negative_eigenvalue = e.values[0] < 0.0;

  const double d0[3] = {x0.s1z - eps1, x0.s2z - eps2, x0.zz};
  double y[3] = {0, 0, 0};  // eigenbasis coordinates
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i) y[k] += e.vectors[static_cast<size_t>(3 * i + k)] * d0[i];
  double d[3] = {0, 0, 0};
  for (int k = 0; k < 3; ++k) {
    const double decay = std::exp(-e.values[static_cast<size_t>(k)] * t) * y[k];
    for (int i = 0; i < 3; ++i) d[i] += e.vectors[static_cast<size_t>(3 * i + k)] * decay;
  }
  return {eps1 + d[0], eps2 + d[1], d[2]};
}

OffDiagState evolve_offdiagonal(const OffDiagState& x0, const OffDiagonalRates& o, double t,
                                const std::optional<AndersonWeissContext>& aw) {
  if (t < 0.0) throw std::invalid_argument("evolve_offdiagonal: t must be >= 0");
  double g_zq, g_dq;
  if (aw) {
    g_zq = anderson_weiss_exponential(t, aw->h2_zq, aw->t1dist);
    g_dq = anderson_weiss_exponential(t, aw->h2_dq, aw->t1dist);
  } else {
    g_zq = std::exp(-o.zq_j * t);
    g_dq = std::exp(-o.dq_j * t);
  }
  return {x0.plus * std::exp(-o.lambda_zq_fast() * t) * g_zq,
          x0.minus * std::exp(-o.lambda_dq_fast() * t) * g_dq};
}

CoherenceVector apply_gradient_crusher(const CoherenceVector& v) {
  CoherenceVector out;
  out[op::S1Z] = v[op::S1Z];
  out[op::S2Z] = v[op::S2Z];
  out[op::ZZ] = v[op::ZZ];
  return out;
}

}  // namespace spinpair
