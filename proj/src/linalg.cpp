#include "spinpair/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace spinpair {

namespace {

double off_norm3(const Sym3& m) {
  return std::abs(m(0, 1)) + std::abs(m(0, 2)) + std::abs(m(1, 2));
}

}  // namespace

Eig3 jacobi_eig3(const Sym3& m) {
  Sym3 a = m;
  double v[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

  double scale = 0.0;
  for (double x : a.a) scale = std::max(scale, std::abs(x));
  const double tol = 1e-13 * std::max(scale, 1e-300);

  for (int sweep = 0; sweep < 64 && off_norm3(a) > tol; ++sweep) {
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= tol * 1e-3) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- G^T A G with the (p,q) Givens rotation G.
        for (int k = 0; k < 3; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < 3; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
    }
  }

  Eig3 r;
  int order[3] = {0, 1, 2};
  double d[3] = {a(0, 0), a(1, 1), a(2, 2)};
  std::sort(order, order + 3, [&](int i, int j) { return d[i] < d[j]; });
  for (int c = 0; c < 3; ++c) {
    r.values[static_cast<size_t>(c)] = d[order[c]];
    for (int k = 0; k < 3; ++k)
      r.vectors[static_cast<size_t>(3 * k + c)] = v[k][order[c]];
  }
  return r;
}

namespace {

double off_norm4(const Mat4& m) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) s += std::abs(m(i, j));
  return s;
}

}  // namespace

EigH4 jacobi_eigh4(const Mat4& h) {
  Mat4 a = h;
  Mat4 v = Mat4::identity();

  double scale = 0.0;
  for (const auto& x : a.a) scale = std::max(scale, std::abs(x));
  const double tol = 1e-14 * std::max(scale, 1e-300);

  for (int sweep = 0; sweep < 64 && off_norm4(a) > tol; ++sweep) {
    for (int p = 0; p < 3; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        const cplx apq = a(p, q);
        const double mag = std::abs(apq);
        if (mag <= tol * 1e-3) continue;
        // Unitary 2x2 rotation eliminating the (p,q) element of a Hermitian
        // matrix: diagonalize [[app, apq],[conj(apq), aqq]].
        const double app = std::real(a(p, p));
        const double aqq = std::real(a(q, q));
        const cplx phase = apq / mag;
        const double theta = (aqq - app) / (2.0 * mag);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const cplx s = t * c * phase;  // |s| = t*c
        // Columns: [x_p, x_q] <- [c*x_p - conj(s)*x_q, s*x_p + c*x_q]
        for (int k = 0; k < 4; ++k) {
          const cplx akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - std::conj(s) * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < 4; ++k) {
          const cplx apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = std::conj(s) * apk + c * aqk;
        }
        for (int k = 0; k < 4; ++k) {
          const cplx vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - std::conj(s) * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  EigH4 r;
  int order[4] = {0, 1, 2, 3};
  double d[4] = {std::real(a(0, 0)), std::real(a(1, 1)), std::real(a(2, 2)),
                 std::real(a(3, 3))};
  std::sort(order, order + 4, [&](int i, int j) { return d[i] < d[j]; });
  for (int c = 0; c < 4; ++c) {
    r.values[static_cast<size_t>(c)] = d[order[c]];
    for (int k = 0; k < 4; ++k) r.vectors(k, c) = v(k, order[c]);
  }
  return r;
}

Mat4 unitary_exp(const Mat4& h, double t) {
  const EigH4 e = jacobi_eigh4(h);
  Mat4 u;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      cplx s{};
      for (int k = 0; k < 4; ++k) {
        const double lam = e.values[static_cast<size_t>(k)];
        const cplx ph = std::polar(1.0, -lam * t);
        s += e.vectors(i, k) * ph * std::conj(e.vectors(j, k));
      }
      u(i, j) = s;
    }
  return u;
}

}  // namespace spinpair
