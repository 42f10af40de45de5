#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace spinpair {

using cplx = std::complex<double>;

/// Dense complex 4x4 matrix, row-major. The whole two-spin algebra lives in
/// this type; operations are plain loops so the compiler can inline them.
struct Mat4 {
  std::array<cplx, 16> a{};

  cplx& operator()(int i, int j) { return a[static_cast<size_t>(4 * i + j)]; }
  const cplx& operator()(int i, int j) const { return a[static_cast<size_t>(4 * i + j)]; }

  static Mat4 zero() { return Mat4{}; }
  static Mat4 identity() {
    Mat4 m;
    for (int i = 0; i < 4; ++i) m(i, i) = 1.0;
    return m;
  }

  Mat4& operator+=(const Mat4& o) {
    for (size_t i = 0; i < 16; ++i) a[i] += o.a[i];
    return *this;
  }
  Mat4& operator-=(const Mat4& o) {
    for (size_t i = 0; i < 16; ++i) a[i] -= o.a[i];
    return *this;
  }
  Mat4& operator*=(cplx s) {
    for (auto& x : a) x *= s;
    return *this;
  }
  Mat4& operator*=(double s) {
    for (auto& x : a) x *= s;
    return *this;
  }

  friend Mat4 operator+(Mat4 lhs, const Mat4& rhs) { return lhs += rhs; }
  friend Mat4 operator-(Mat4 lhs, const Mat4& rhs) { return lhs -= rhs; }
  friend Mat4 operator*(Mat4 lhs, cplx s) { return lhs *= s; }
  friend Mat4 operator*(cplx s, Mat4 rhs) { return rhs *= s; }
  friend Mat4 operator*(Mat4 lhs, double s) { return lhs *= s; }
  friend Mat4 operator*(double s, Mat4 rhs) { return rhs *= s; }
  friend Mat4 operator-(const Mat4& m) {
    Mat4 r;
    for (size_t i = 0; i < 16; ++i) r.a[i] = -m.a[i];
    return r;
  }

  friend Mat4 operator*(const Mat4& x, const Mat4& y) {
    Mat4 r;
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k) {
        const cplx xik = x(i, k);
        if (xik == cplx{}) continue;
        for (int j = 0; j < 4; ++j) r(i, j) += xik * y(k, j);
      }
    return r;
  }
};

inline Mat4 dagger(const Mat4& m) {
  Mat4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r(i, j) = std::conj(m(j, i));
  return r;
}

inline cplx trace(const Mat4& m) { return m(0, 0) + m(1, 1) + m(2, 2) + m(3, 3); }

inline cplx trace_prod(const Mat4& x, const Mat4& y) {
  cplx s{};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) s += x(i, k) * y(k, i);
  return s;
}

inline Mat4 comm(const Mat4& x, const Mat4& y) { return x * y - y * x; }

inline double max_abs(const Mat4& m) {
  double v = 0.0;
  for (const auto& x : m.a) v = std::max(v, std::abs(x));
  return v;
}

inline double max_abs_diff(const Mat4& x, const Mat4& y) {
  double v = 0.0;
  for (size_t i = 0; i < 16; ++i) v = std::max(v, std::abs(x.a[i] - y.a[i]));
  return v;
}

inline double frobenius_norm(const Mat4& m) {
  double s = 0.0;
  for (const auto& x : m.a) s += std::norm(x);
  return std::sqrt(s);
}

/// Largest |A - A^dagger| element; zero for exactly Hermitian input.
inline double hermiticity_defect(const Mat4& m) {
  double v = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) v = std::max(v, std::abs(m(i, j) - std::conj(m(j, i))));
  return v;
}

/// U rho U^dagger.
inline Mat4 conjugate(const Mat4& u, const Mat4& rho) { return u * rho * dagger(u); }

}  // namespace spinpair
