#pragma once

#include <array>
#include <stdexcept>

#include "spinpair/mat4.hpp"

namespace spinpair {

enum class Axis { x, y, z };

/// The four Bell states, z-basis labels plus the x-basis variants produced by
/// the detuned Hartmann-Hahn block before the final rotation to the z basis.
enum class BellId { S0, T0z, PsiPlusZ, PsiMinusZ, T0x, PsiPlusX, PsiMinusX };

/// Canonical ordering of the 15 orthonormal product operators. Every rate
/// matrix and coherence vector in the project indexes against this list:
///   S1x S1y S1z S2x S2y S2z
///   2S1xS2x 2S1xS2y 2S1xS2z
///   2S1yS2x 2S1yS2y 2S1yS2z
///   2S1zS2x 2S1zS2y 2S1zS2z
namespace op {
inline constexpr int S1X = 0, S1Y = 1, S1Z = 2;
inline constexpr int S2X = 3, S2Y = 4, S2Z = 5;
inline constexpr int XX = 6, XY = 7, XZ = 8;
inline constexpr int YX = 9, YY = 10, YZ = 11;
inline constexpr int ZX = 12, ZY = 13, ZZ = 14;
}  // namespace op

using ProductBasis = std::array<Mat4, 15>;

/// Single-spin operator embedded in the pair space (spin = 1 or 2).
Mat4 spin_op(int spin, Axis axis);

/// S_{n+} or S_{n-} embedded in the pair space.
Mat4 spin_ladder(int spin, int sign);

/// The 15 basis operators in canonical order; Tr(P_l P_m) = delta_lm.
const ProductBasis& product_basis();

struct CoherenceVector {
  std::array<double, 15> v{};

  double& operator[](int i) { return v[static_cast<size_t>(i)]; }
  const double& operator[](int i) const { return v[static_cast<size_t>(i)]; }
};

/// Expansion v_l = Tr(P_l rho). Rejects input whose Hermiticity defect
/// exceeds 1e-12.
CoherenceVector to_coherence_vector(const Mat4& rho);

Mat4 from_coherence_vector(const CoherenceVector& v);

/// Deviation density matrix of a Bell state: |Psi><Psi| - I/4.
Mat4 bell_density(BellId id);

/// The pure state |Psi| as a 4-vector in the z product basis (up up, up dn,
/// dn up, dn dn).
std::array<cplx, 4> bell_ket(BellId id);

/// eps1*S1z + eps2*S2z  (deviation part of the thermal state).
Mat4 equilibrium_density(double eps1, double eps2);

/// Tr(O rho) for Hermitian O; throws if O is not Hermitian or the imaginary
/// residue exceeds 1e-12 relative to scale.
double expectation(const Mat4& rho, const Mat4& obs);

/// [[A, H1], H2]
Mat4 double_commutator(const Mat4& a, const Mat4& h1, const Mat4& h2);

}  // namespace spinpair
