#include "spinpair/spinops.hpp"

#include <cmath>

namespace spinpair {

namespace {

using M2 = std::array<cplx, 4>;  // 2x2, row-major

M2 pauli_half(Axis axis) {
  const cplx i{0.0, 1.0};
  switch (axis) {
    case Axis::x: return {0.0, 0.5, 0.5, 0.0};
    case Axis::y: return {0.0, -0.5 * i, 0.5 * i, 0.0};
    case Axis::z: return {0.5, 0.0, 0.0, -0.5};
  }
  return {};
}

M2 ident2() { return {1.0, 0.0, 0.0, 1.0}; }

Mat4 kron(const M2& a, const M2& b) {
  Mat4 r;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
          r(2 * i + k, 2 * j + l) = a[static_cast<size_t>(2 * i + j)] * b[static_cast<size_t>(2 * k + l)];
  return r;
}

ProductBasis build_basis() {
  ProductBasis p;
  const M2 sx = pauli_half(Axis::x), sy = pauli_half(Axis::y), sz = pauli_half(Axis::z);
  const M2 id = ident2();
  const M2 s1[3] = {sx, sy, sz};
  p[op::S1X] = kron(sx, id);
  p[op::S1Y] = kron(sy, id);
  p[op::S1Z] = kron(sz, id);
  p[op::S2X] = kron(id, sx);
  p[op::S2Y] = kron(id, sy);
  p[op::S2Z] = kron(id, sz);
  const M2 s2[3] = {sx, sy, sz};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) p[static_cast<size_t>(6 + 3 * i + j)] = 2.0 * kron(s1[i], s2[j]);
  return p;
}

}  // namespace

Mat4 spin_op(int spin, Axis axis) {
  if (spin != 1 && spin != 2) throw std::invalid_argument("spin_op: spin must be 1 or 2");
  return spin == 1 ? kron(pauli_half(axis), ident2()) : kron(ident2(), pauli_half(axis));
}

Mat4 spin_ladder(int spin, int sign) {
  const cplx i{0.0, 1.0};
  return spin_op(spin, Axis::x) + (sign >= 0 ? i : -i) * spin_op(spin, Axis::y);
}

const ProductBasis& product_basis() {
  static const ProductBasis basis = build_basis();
  return basis;
}

CoherenceVector to_coherence_vector(const Mat4& rho) {
  if (hermiticity_defect(rho) > 1e-12)
    throw std::invalid_argument("to_coherence_vector: input is not Hermitian (tolerance 1e-12)");
  const ProductBasis& p = product_basis();
  CoherenceVector v;
  for (int l = 0; l < 15; ++l) v[l] = std::real(trace_prod(p[static_cast<size_t>(l)], rho));
  return v;
}

Mat4 from_coherence_vector(const CoherenceVector& v) {
  const ProductBasis& p = product_basis();
  Mat4 rho;
  for (int l = 0; l < 15; ++l) rho += v[l] * p[static_cast<size_t>(l)];
  return rho;
}

std::array<cplx, 4> bell_ket(BellId id) {
  const double r = 1.0 / std::sqrt(2.0);
  switch (id) {
    case BellId::S0: return {0.0, r, -r, 0.0};
    case BellId::T0z: return {0.0, r, r, 0.0};
    case BellId::PsiPlusZ: return {r, 0.0, 0.0, r};
    case BellId::PsiMinusZ: return {r, 0.0, 0.0, -r};
    // x-basis states expressed in the z product basis.
    case BellId::T0x: return {r, 0.0, 0.0, -r};       // == |psi_-,z>
    case BellId::PsiPlusX: return {r, 0.0, 0.0, r};   // == |psi_+,z>
    case BellId::PsiMinusX: return {0.0, r, r, 0.0};  // == |T_0,z>
  }
  return {};
}

Mat4 bell_density(BellId id) {
  const auto k = bell_ket(id);
  Mat4 rho;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) rho(i, j) = k[static_cast<size_t>(i)] * std::conj(k[static_cast<size_t>(j)]);
  for (int i = 0; i < 4; ++i) rho(i, i) -= 0.25;
  return rho;
}

Mat4 equilibrium_density(double eps1, double eps2) {
  return eps1 * spin_op(1, Axis::z) + eps2 * spin_op(2, Axis::z);
}

double expectation(const Mat4& rho, const Mat4& obs) {
  if (hermiticity_defect(obs) > 1e-12)
    throw std::invalid_argument("expectation: observable is not Hermitian");
  const cplx t = trace_prod(obs, rho);
  const double scale = std::max(1.0, std::abs(t));
  if (std::abs(std::imag(t)) > 1e-12 * scale)
    throw std::invalid_argument("expectation: imaginary residue exceeds 1e-12");
  return std::real(t);
}

Mat4 double_commutator(const Mat4& a, const Mat4& h1, const Mat4& h2) {
  return comm(comm(a, h1), h2);
}

}  // namespace spinpair
