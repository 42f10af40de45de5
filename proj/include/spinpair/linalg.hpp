#pragma once

#include <array>

#include "spinpair/mat4.hpp"

namespace spinpair {

/// Real symmetric 3x3 matrix (only used for the diagonal relaxation sector).
struct Sym3 {
  // Row-major full storage; construction keeps it symmetric.
  std::array<double, 9> a{};
  double& operator()(int i, int j) { return a[static_cast<size_t>(3 * i + j)]; }
  const double& operator()(int i, int j) const { return a[static_cast<size_t>(3 * i + j)]; }
};

struct Eig3 {
  std::array<double, 3> values{};   // ascending
  std::array<double, 9> vectors{};  // columns are eigenvectors, row-major
};

/// Cyclic Jacobi for a real symmetric 3x3; off-diagonal tolerance 1e-13
/// relative to the matrix scale, so the decomposition is exact for doubles.
Eig3 jacobi_eig3(const Sym3& m);

struct EigH4 {
  std::array<double, 4> values{};  // ascending
  Mat4 vectors{};                  // unitary, columns are eigenvectors
};

/// Cyclic Jacobi with complex rotations for a Hermitian 4x4.
EigH4 jacobi_eigh4(const Mat4& h);

/// exp(-i H t) for Hermitian H via the Jacobi eigendecomposition.
Mat4 unitary_exp(const Mat4& h, double t);

}  // namespace spinpair
