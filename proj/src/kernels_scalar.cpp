#include "spinpair/kernels.hpp"

namespace spinpair::kernels::detail {

namespace {

// y = -i * H * x, all 4x4 row-major.
inline void minus_i_h_mul(const cplx* h, const cplx* x, cplx* y) {
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      cplx s{};
      for (int k = 0; k < 4; ++k) s += h[4 * i + k] * x[4 * k + j];
      y[4 * i + j] = cplx(s.imag(), -s.real());  // multiply by -i
    }
  }
}

}  // namespace

void rk4_step_scalar(const cplx* h0, const cplx* hh, const cplx* h1, cplx* u, double dt) {
  cplx k1[16], k2[16], k3[16], k4[16], tmp[16];

  minus_i_h_mul(h0, u, k1);
  for (int i = 0; i < 16; ++i) tmp[i] = u[i] + (0.5 * dt) * k1[i];
  minus_i_h_mul(hh, tmp, k2);
  for (int i = 0; i < 16; ++i) tmp[i] = u[i] + (0.5 * dt) * k2[i];
  minus_i_h_mul(hh, tmp, k3);
  for (int i = 0; i < 16; ++i) tmp[i] = u[i] + dt * k3[i];
  minus_i_h_mul(h1, tmp, k4);
  const double w = dt / 6.0;
  for (int i = 0; i < 16; ++i) u[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace spinpair::kernels::detail
