#include "spinpair/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spinpair/dynamics.hpp"
#include "spinpair/linalg.hpp"

namespace spinpair {

FidReading read_fid(const Mat4& rho, int read_spin, double gain) {
  const ProductBasis& p = product_basis();
  const int n = read_spin;
  const int sym_idx = n == 1 ? op::S1X : op::S2X;
  const int anti_idx = n == 1 ? op::XZ : op::ZX;  // 2 S_nx S_mz
  FidReading r;
  r.sym = gain * std::real(trace_prod(p[static_cast<size_t>(sym_idx)], rho));
  r.anti = gain * std::real(trace_prod(p[static_cast<size_t>(anti_idx)], rho));
  return r;
}

PeakPair peak_intensities(const Mat4& rho_pre_readout, int read_spin, double gain) {
  // Ideal (pi/2)_{ny} readout pulse, then digitize the FID.
  const Mat4 pulsed = apply_pulse(rho_pre_readout, read_spin, Axis::y, M_PI / 2.0);
  return read_fid(pulsed, read_spin, gain).peaks();
}

namespace {

struct TomoStep {
  int index;  // component measured
  // Up to two pre-rotation pulses (spin, axis, angle); angle 0 = unused.
  struct P {
    int spin;
    Axis axis;
    double angle;
  };
  P p1, p2;
  int read_spin;   // whose FID
  bool antisym;    // read antisymmetric instead of symmetric component
};

// Fixed observable map: the rotation R sends P_l onto the readable operator,
// i.e. R P_l R^dag is S_{nz} (sym) or 2S1zS2z (antisym), all with sign +1.
// Verified by the unit tests against direct expectation values.
const TomoStep kSteps[15] = {
    {op::S1X, {1, Axis::y, -M_PI / 2}, {0, Axis::x, 0}, 1, false},
    {op::S1Y, {1, Axis::x, M_PI / 2}, {0, Axis::x, 0}, 1, false},
    {op::S1Z, {0, Axis::x, 0}, {0, Axis::x, 0}, 1, false},
    {op::S2X, {2, Axis::y, -M_PI / 2}, {0, Axis::x, 0}, 2, false},
    {op::S2Y, {2, Axis::x, M_PI / 2}, {0, Axis::x, 0}, 2, false},
    {op::S2Z, {0, Axis::x, 0}, {0, Axis::x, 0}, 2, false},
    {op::XX, {1, Axis::y, -M_PI / 2}, {2, Axis::y, -M_PI / 2}, 1, true},
    {op::XY, {1, Axis::y, -M_PI / 2}, {2, Axis::x, M_PI / 2}, 1, true},
    {op::XZ, {1, Axis::y, -M_PI / 2}, {0, Axis::x, 0}, 1, true},
    {op::YX, {1, Axis::x, M_PI / 2}, {2, Axis::y, -M_PI / 2}, 1, true},
    {op::YY, {1, Axis::x, M_PI / 2}, {2, Axis::x, M_PI / 2}, 1, true},
    {op::YZ, {1, Axis::x, M_PI / 2}, {0, Axis::x, 0}, 1, true},
    {op::ZX, {2, Axis::y, -M_PI / 2}, {0, Axis::x, 0}, 1, true},
    {op::ZY, {2, Axis::x, M_PI / 2}, {0, Axis::x, 0}, 1, true},
    {op::ZZ, {0, Axis::x, 0}, {0, Axis::x, 0}, 1, true},
};

}  // namespace

Tomogram tomography(const std::function<Mat4()>& source,
                    const std::function<double(double)>& noise) {
  Tomogram t;
  auto measure_component = [&](const TomoStep& s) {
    Mat4 rho = source();
    if (s.p1.angle != 0.0) rho = apply_pulse(rho, s.p1.spin, s.p1.axis, s.p1.angle);
    if (s.p2.angle != 0.0) rho = apply_pulse(rho, s.p2.spin, s.p2.axis, s.p2.angle);
    const PeakPair pk = peak_intensities(rho, s.read_spin);
    double val = s.antisym ? antisymmetric_component(pk) : symmetric_component(pk);
    if (noise) val = noise(val);
    return val;
  };

  for (const auto& s : kSteps) t.v[s.index] = measure_component(s);

  // Repeated-preparation probe: remeasure the first component and flag drift
  // beyond numerical noise (or the injected noise scale).
  const double again = measure_component(kSteps[0]);
  const double scale = std::max(1e-12, std::abs(t.v[kSteps[0].index]));
  if (!noise && std::abs(again - t.v[kSteps[0].index]) > 1e-9 * scale)
    t.consistent_source = false;

  t.rho = from_coherence_vector(t.v);
  for (int i = 0; i < 4; ++i) t.rho(i, i) += 0.25;
  return t;
}

namespace {

double pps_amplitude(const Mat4& rho_dev) {
  // For rho = kappa (|Psi><Psi| - I/4), Tr rho^2 = 3 kappa^2 / 4.
  const double tr2 = std::real(trace_prod(rho_dev, rho_dev));
  return std::sqrt(std::max(0.0, 4.0 * tr2 / 3.0));
}

}  // namespace

double state_fidelity(const Mat4& rho_deviation, BellId target) {
  const double kappa = pps_amplitude(rho_deviation);
  if (kappa < 1e-300) throw std::invalid_argument("state_fidelity: zero-norm pure part");
  const auto ket = bell_ket(target);
  cplx amp{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      amp += std::conj(ket[static_cast<size_t>(i)]) * rho_deviation(i, j) * ket[static_cast<size_t>(j)];
  const double f = 0.25 + std::real(amp) / kappa;
  return std::clamp(f, 0.0, 1.0);
}

double bell_trace_distance(const Mat4& rho_deviation, BellId target) {
  const double kappa = pps_amplitude(rho_deviation);
  if (kappa < 1e-300) throw std::invalid_argument("bell_trace_distance: zero-norm pure part");
  // (I/4 + rho/kappa) - |Psi><Psi| = rho/kappa - bell_density.
  const Mat4 diff = rho_deviation * (1.0 / kappa) - bell_density(target);
  const EigH4 e = jacobi_eigh4(diff);
  double s = 0.0;
  for (double lam : e.values) s += std::abs(lam);
  return 0.5 * s;
}

}  // namespace spinpair
