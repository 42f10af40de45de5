#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "spinpair/linalg.hpp"
#include "spinpair/oracle.hpp"
#include "spinpair/rng.hpp"

namespace spinpair::oracle {

namespace {

struct Direction {
  double x = 0.0, y = 0.0, z = 1.0;
};

// Exact small rotation of a unit vector by the rotation vector w.
void rotate(Direction& n, double wx, double wy, double wz) {
  const double a = std::sqrt(wx * wx + wy * wy + wz * wz);
  if (a < 1e-300) return;
  const double c = std::cos(a), s = std::sin(a);
  const double ux = wx / a, uy = wy / a, uz = wz / a;
  const double dot = ux * n.x + uy * n.y + uz * n.z;
  const double cx = uy * n.z - uz * n.y;
  const double cy = uz * n.x - ux * n.z;
  const double cz = ux * n.y - uy * n.x;
  Direction r;
  r.x = n.x * c + cx * s + ux * dot * (1 - c);
  r.y = n.y * c + cy * s + uy * dot * (1 - c);
  r.z = n.z * c + cz * s + uz * dot * (1 - c);
  // Renormalize against drift.
  const double norm = std::sqrt(r.x * r.x + r.y * r.y + r.z * r.z);
  n.x = r.x / norm;
  n.y = r.y / norm;
  n.z = r.z / norm;
}

void random_unit(Philox& rng, Direction& n) {
  // Marsaglia: uniform on the sphere.
  for (;;) {
    const double u = 2.0 * rng.uniform() - 1.0;
    const double v = 2.0 * rng.uniform() - 1.0;
    const double s = u * u + v * v;
    if (s >= 1.0 || s == 0.0) continue;
    const double f = 2.0 * std::sqrt(1.0 - s);
    n.x = u * f;
    n.y = v * f;
    n.z = 1.0 - 2.0 * s;
    return;
  }
}

struct DipolarFields {
  double f0;
  cplx f1, f2;
};

DipolarFields dipolar_fields(double k, const Direction& n) {
  // F0 = k (1 - 3 nz^2), F1 = -(3/2) k nz (nx + i ny), F2 = -(3/4) k (nx + i ny)^2.
  DipolarFields f;
  const cplx e(n.x, n.y);
  f.f0 = k * (1.0 - 3.0 * n.z * n.z);
  f.f1 = -1.5 * k * n.z * e;
  f.f2 = -0.75 * k * e * e;
  return f;
}

}  // namespace

Trajectory rotational_trajectory(double k, double tau_c, double dt, double duration,
                                 uint64_t seed) {
  if (dt > tau_c / 20.0)
    throw std::invalid_argument("rotational_trajectory: need dt <= tau_c / 20");
  const double d_rot = 1.0 / (6.0 * tau_c);
  const double sigma = std::sqrt(2.0 * d_rot * dt);
  Trajectory tr;
  tr.dt = dt;
  const size_t n = static_cast<size_t>(duration / dt) + 1;
  tr.direction.reserve(n);
  tr.f0.reserve(n);
  tr.f1.reserve(n);
  tr.f2.reserve(n);
  Philox rng(seed);
  Direction dir;
  random_unit(rng, dir);
  for (size_t i = 0; i < n; ++i) {
    tr.direction.push_back({dir.x, dir.y, dir.z});
    const DipolarFields f = dipolar_fields(k, dir);
    tr.f0.push_back(f.f0);
    tr.f1.push_back(f.f1);
    tr.f2.push_back(f.f2);
    rotate(dir, sigma * rng.normal(), sigma * rng.normal(), sigma * rng.normal());
  }
  return tr;
}

namespace {

// Stochastic state advanced on the half-step grid.
struct NoiseState {
  Direction dir;
  cplx g1{}, g2{};        // unit complex OU processes
  double x1 = 0, x2 = 0;  // unit real OU processes
  cplx ph1{1.0, 0.0}, ph2{1.0, 0.0};  // exp(i Omega_n t)
};

struct ModelConstants {
  double k = 0;
  double p1 = 0, q1 = 0, p2 = 0, q2 = 0;  // alpha_perp = p*F1 + q*G
  double c11 = 0, c21 = 0, c22 = 0;       // Cholesky of the z-field covariance
  double ou_decay = 0, ou_noise = 0;      // per half-step
  cplx rot1{}, rot2{};                    // exp(i Omega_n h)
  double sigma_rot = 0;                   // per half-step angular std dev
  double omega_j = 0;
};

ModelConstants make_constants(const MicroParams& p, double half_step) {
  ModelConstants c;
  c.k = p.k;
  const double f1sq = dipolar_second_moments(p.k)[1];
  c.p1 = f1sq > 0 ? p.xcorr1 / (2.0 * f1sq) : 0.0;
  c.p2 = f1sq > 0 ? p.xcorr2 / (2.0 * f1sq) : 0.0;
  c.q1 = std::sqrt(std::max(0.0, p.a1perp2 - c.p1 * c.p1 * f1sq));
  c.q2 = std::sqrt(std::max(0.0, p.a2perp2 - c.p2 * c.p2 * f1sq));
  c.c11 = std::sqrt(p.a1z2);
  c.c21 = c.c11 > 0 ? p.a1z2z / c.c11 : 0.0;
  c.c22 = std::sqrt(std::max(0.0, p.a2z2 - c.c21 * c.c21));
  c.ou_decay = std::exp(-half_step / p.tau_c);
  c.ou_noise = std::sqrt(1.0 - c.ou_decay * c.ou_decay);
  c.rot1 = std::polar(1.0, p.omega1 * half_step);
  c.rot2 = std::polar(1.0, p.omega2 * half_step);
  c.sigma_rot = std::sqrt(2.0 * (1.0 / (6.0 * p.tau_c)) * half_step);
  c.omega_j = p.omega_j;
  return c;
}

void init_state(NoiseState& st, Philox& rng) {
  random_unit(rng, st.dir);
  const double r = std::sqrt(0.5);
  st.g1 = cplx(r * rng.normal(), r * rng.normal());
  st.g2 = cplx(r * rng.normal(), r * rng.normal());
  st.x1 = rng.normal();
  st.x2 = rng.normal();
  st.ph1 = cplx(1.0, 0.0);
  st.ph2 = cplx(1.0, 0.0);
}

void advance_half(NoiseState& st, const ModelConstants& c, Philox& rng) {
  rotate(st.dir, c.sigma_rot * rng.normal(), c.sigma_rot * rng.normal(),
         c.sigma_rot * rng.normal());
  const double a = c.ou_decay, s = c.ou_noise;
  const double r = std::sqrt(0.5);
  st.g1 = a * st.g1 + cplx(s * r * rng.normal(), s * r * rng.normal());
  st.g2 = a * st.g2 + cplx(s * r * rng.normal(), s * r * rng.normal());
  st.x1 = a * st.x1 + s * rng.normal();
  st.x2 = a * st.x2 + s * rng.normal();
  st.ph1 *= c.rot1;
  st.ph2 *= c.rot2;
}

void renorm_phases(NoiseState& st) {
  st.ph1 /= std::abs(st.ph1);
  st.ph2 /= std::abs(st.ph2);
}

// Double-rotating-frame fluctuating Hamiltonian for the current noise state.
void build_h(const NoiseState& st, const ModelConstants& c, cplx* h) {
  const DipolarFields f = dipolar_fields(c.k, st.dir);
  const cplx a1p = c.p1 * f.f1 + c.q1 * st.g1;
  const cplx a2p = c.p2 * f.f1 + c.q2 * st.g2;
  const double a1z = c.c11 * st.x1;
  const double a2z = c.c21 * st.x1 + c.c22 * st.x2;

  const cplx e01 = (0.5 * f.f1 + a2p) * st.ph2;          // S1z S2+ and S2+ terms
  const cplx e23 = (-0.5 * f.f1 + a2p) * st.ph2;
  const cplx e02 = (0.5 * f.f1 + a1p) * st.ph1;          // S1+ S2z and S1+ terms
  const cplx e13 = (-0.5 * f.f1 + a1p) * st.ph1;
  const cplx e12 = -0.25 * f.f0 * st.ph1 * std::conj(st.ph2);  // flip-flop
  const cplx e03 = f.f2 * st.ph1 * st.ph2;                     // double quantum

  const double dzz = 0.25 * (f.f0 + c.omega_j);
  const double d1 = 0.5 * a1z, d2 = 0.5 * a2z;

  h[0] = cplx(dzz + d1 + d2, 0.0);
  h[5] = cplx(-dzz + d1 - d2, 0.0);
  h[10] = cplx(-dzz - d1 + d2, 0.0);
  h[15] = cplx(dzz - d1 - d2, 0.0);
  h[1] = e01;
  h[4] = std::conj(e01);
  h[11] = e23;
  h[14] = std::conj(e23);
  h[2] = e02;
  h[8] = std::conj(e02);
  h[7] = e13;
  h[13] = std::conj(e13);
  h[6] = e12;
  h[9] = std::conj(e12);
  h[3] = e03;
  h[12] = std::conj(e03);
}

// Sparse sector observables: Tr(P_m U P_l U^dag) over the diagonal block and
// the two coherence eigenmodes.
struct SectorSample {
  std::array<double, 9> diag;
  double zq, dq;
};

SectorSample sample_sectors(const Mat4& u) {
  static const std::array<const Mat4*, 3> diag_ops = [] {
    const ProductBasis& p = product_basis();
    return std::array<const Mat4*, 3>{&p[op::S1Z], &p[op::S2Z], &p[op::ZZ]};
  }();
  static const Mat4 zq_op = [] {
    const ProductBasis& p = product_basis();
    return (p[op::XX] + p[op::YY]) * (1.0 / std::sqrt(2.0));
  }();
  static const Mat4 dq_op = [] {
    const ProductBasis& p = product_basis();
    return (p[op::XX] - p[op::YY]) * (1.0 / std::sqrt(2.0));
  }();

  SectorSample s;
  const Mat4 ud = dagger(u);
  for (int l = 0; l < 3; ++l) {
    const Mat4 evolved = u * (*diag_ops[static_cast<size_t>(l)]) * ud;
    for (int m = 0; m < 3; ++m)
      s.diag[static_cast<size_t>(3 * m + l)] =
          std::real(trace_prod(*diag_ops[static_cast<size_t>(m)], evolved));
  }
  s.zq = std::real(trace_prod(zq_op, u * zq_op * ud));
  s.dq = std::real(trace_prod(dq_op, u * dq_op * ud));
  return s;
}

}  // namespace

SectorSeries stochastic_relaxation(const MicroParams& p, const McOptions& opt) {
  p.validate();
  if (opt.duration <= 0 || opt.ensemble < 1 || opt.n_samples < 2)
    throw std::invalid_argument("stochastic_relaxation: bad options");

  SectorSeries out;
  const double alpha_total = p.a1perp2 + p.a2perp2 + p.a1z2 + p.a2z2;
  const double coupling = (p.k * p.k + alpha_total) * p.tau_c * p.tau_c;
  if (coupling > 0.05)
    out.warnings.push_back("weak-coupling parameter (k^2 + sum<alpha^2>) tau_c^2 = " +
                           std::to_string(coupling) + " is not small; Redfield comparison degraded");

  const double omega_scale =
      std::max({std::abs(p.omega1), std::abs(p.omega2), std::abs(p.omega1 + p.omega2),
                std::abs(p.omega1 - p.omega2), 1e-300});
  // tau_c/100 keeps the worst-case per-step unitarity defect below 1e-8
  // even on the tail noise kicks (tau_c/50 leaves ~1e-8-scale defects).
  double dt = opt.dt > 0 ? opt.dt : std::min(p.tau_c / 100.0, 0.02 / omega_scale);
  const double sample_dt = opt.duration / opt.n_samples;
  const int steps_per_sample = std::max(1, static_cast<int>(std::ceil(sample_dt / dt)));
  dt = sample_dt / steps_per_sample;

  out.times.resize(static_cast<size_t>(opt.n_samples) + 1);
  for (int i = 0; i <= opt.n_samples; ++i) out.times[static_cast<size_t>(i)] = sample_dt * i;

  const int batches = std::min(opt.batches, opt.ensemble);
  const size_t nt = out.times.size();
  out.diag_batch.assign(static_cast<size_t>(batches),
                        std::vector<std::array<double, 9>>(nt, {0, 0, 0, 0, 0, 0, 0, 0, 0}));
  out.zq_batch.assign(static_cast<size_t>(batches), std::vector<double>(nt, 0.0));
  out.dq_batch.assign(static_cast<size_t>(batches), std::vector<double>(nt, 0.0));
  std::vector<int> batch_count(static_cast<size_t>(batches), 0);
  std::vector<double> batch_drift(static_cast<size_t>(batches), 0.0);

  const ModelConstants consts = make_constants(p, 0.5 * dt);
  const kernels::Rk4StepFn step = kernels::get(opt.backend);

  // Each batch is owned by exactly one worker and filled in trajectory-index
  // order, so the reduction is bitwise independent of the thread count.
  auto run_batch = [&](int batch) {
    auto& diag_acc = out.diag_batch[static_cast<size_t>(batch)];
    auto& zq_acc = out.zq_batch[static_cast<size_t>(batch)];
    auto& dq_acc = out.dq_batch[static_cast<size_t>(batch)];
    double drift = 0.0;
    int count = 0;
    for (int traj = batch; traj < opt.ensemble; traj += batches) {
      Philox rng(opt.seed, static_cast<uint64_t>(traj));
      NoiseState st;
      init_state(st, rng);
      Mat4 u = Mat4::identity();
      cplx h0[16], hh[16], h1[16];
      build_h(st, consts, h0);

      {
        const SectorSample s0 = sample_sectors(u);
        for (int e = 0; e < 9; ++e) diag_acc[0][static_cast<size_t>(e)] += s0.diag[static_cast<size_t>(e)];
        zq_acc[0] += s0.zq;
        dq_acc[0] += s0.dq;
      }

      long step_count = 0;
      for (int sample = 1; sample <= opt.n_samples; ++sample) {
        for (int k = 0; k < steps_per_sample; ++k) {
          advance_half(st, consts, rng);
          build_h(st, consts, hh);
          advance_half(st, consts, rng);
          build_h(st, consts, h1);
          step(h0, hh, h1, u.a.data(), dt);
          for (int e = 0; e < 16; ++e) h0[e] = h1[e];
          if (++step_count % 4 == 0) {
            // The integrator wanders off the unitary manifold at O(dt^2) per
            // step for rough noise paths; project back with one Newton polar
            // step, U <- U (3I - U^dag U)/2, and reject unstable integration.
            const Mat4 g = dagger(u) * u;
            const double defect = max_abs_diff(g, Mat4::identity());
            if (defect > 4.0 * 1e-6)
              throw std::runtime_error("stochastic_relaxation: unstable step (norm drift > 1e-6/step)");
            drift = std::max(drift, defect);
            Mat4 corr = g * (-0.5);
            for (int d = 0; d < 4; ++d) corr(d, d) += 1.5;
            u = u * corr;
          }
          if (step_count % 1024 == 0) renorm_phases(st);
        }
        const SectorSample s = sample_sectors(u);
        auto& d = diag_acc[static_cast<size_t>(sample)];
        for (int e = 0; e < 9; ++e) d[static_cast<size_t>(e)] += s.diag[static_cast<size_t>(e)];
        zq_acc[static_cast<size_t>(sample)] += s.zq;
        dq_acc[static_cast<size_t>(sample)] += s.dq;
        // Unitarity defect of the state actually sampled.
        drift = std::max(drift, max_abs_diff(dagger(u) * u, Mat4::identity()));
      }
      ++count;
    }
    batch_drift[static_cast<size_t>(batch)] = drift;
    batch_count[static_cast<size_t>(batch)] = count;
  };

  const int threads = std::max(1, opt.threads);
  if (threads == 1) {
    for (int b = 0; b < batches; ++b) run_batch(b);
  } else {
    std::vector<std::thread> pool;
    std::vector<int> next(static_cast<size_t>(threads));
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (int b = t; b < batches; b += threads) run_batch(b);
      });
    for (auto& th : pool) th.join();
  }

  // Normalize batches to means; global mean is the batch-count-weighted sum
  // reduced in fixed batch order.
  out.diag.assign(nt, {0, 0, 0, 0, 0, 0, 0, 0, 0});
  out.zq.assign(nt, 0.0);
  out.dq.assign(nt, 0.0);
  for (int b = 0; b < batches; ++b) {
    const double nb = batch_count[static_cast<size_t>(b)];
    for (size_t i = 0; i < nt; ++i) {
      for (int e = 0; e < 9; ++e) {
        out.diag_batch[static_cast<size_t>(b)][i][static_cast<size_t>(e)] /= nb;
        out.diag[i][static_cast<size_t>(e)] +=
            out.diag_batch[static_cast<size_t>(b)][i][static_cast<size_t>(e)] * nb;
      }
      out.zq_batch[static_cast<size_t>(b)][i] /= nb;
      out.dq_batch[static_cast<size_t>(b)][i] /= nb;
      out.zq[i] += out.zq_batch[static_cast<size_t>(b)][i] * nb;
      out.dq[i] += out.dq_batch[static_cast<size_t>(b)][i] * nb;
    }
    out.max_unitarity_drift = std::max(out.max_unitarity_drift, batch_drift[static_cast<size_t>(b)]);
  }
  for (size_t i = 0; i < nt; ++i) {
    for (int e = 0; e < 9; ++e) out.diag[i][static_cast<size_t>(e)] /= opt.ensemble;
    out.zq[i] /= opt.ensemble;
    out.dq[i] /= opt.ensemble;
  }
  return out;
}

namespace {

// -log(M)/t for a symmetric positive 3x3 block; returns false when any
// eigenvalue is at or below the floor.
bool gamma_from_block(const std::array<double, 9>& block, double t, double floor,
                      std::array<double, 9>& gamma) {
  Sym3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      m(i, j) = 0.5 * (block[static_cast<size_t>(3 * i + j)] + block[static_cast<size_t>(3 * j + i)]);
  const Eig3 e = jacobi_eig3(m);
  if (e.values[0] <= floor) return false;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0;
      for (int k = 0; k < 3; ++k)
        s += e.vectors[static_cast<size_t>(3 * i + k)] *
             (-std::log(e.values[static_cast<size_t>(k)]) / t) *
             e.vectors[static_cast<size_t>(3 * j + k)];
      gamma[static_cast<size_t>(3 * i + j)] = s;
    }
  return true;
}

std::array<double, 9> fit_gamma(const std::vector<double>& times,
                                const std::vector<std::array<double, 9>>& diag) {
  // First pass: average log-derived rates over every usable time, then keep
  // the window around 1/(mean rate) where the estimator noise is smallest.
  std::array<double, 9> acc{};
  int n = 0;
  for (size_t i = 1; i < times.size(); ++i) {
    std::array<double, 9> g;
    if (gamma_from_block(diag[i], times[i], 0.05, g)) {
      for (int e = 0; e < 9; ++e) acc[static_cast<size_t>(e)] += g[static_cast<size_t>(e)];
      ++n;
    }
  }
  if (n == 0) return acc;
  for (auto& x : acc) x /= n;
  const double scale = (acc[0] + acc[4] + acc[8]) / 3.0;
  if (scale <= 0) return acc;

  std::array<double, 9> win{};
  int m = 0;
  for (size_t i = 1; i < times.size(); ++i) {
    // Stay well above the eigenvalue floor: conditioning on noisy
    // eigenvalues near the cutoff would bias the small entries.
    if (times[i] < 0.3 / scale || times[i] > 1.2 / scale) continue;
    std::array<double, 9> g;
    if (gamma_from_block(diag[i], times[i], 0.1, g)) {
      for (int e = 0; e < 9; ++e) win[static_cast<size_t>(e)] += g[static_cast<size_t>(e)];
      ++m;
    }
  }
  if (m == 0) return acc;
  for (auto& x : win) x /= m;
  return win;
}

double fit_lambda(const std::vector<double>& times, const std::vector<double>& mode) {
  // Log-linear fit through the origin region while the signal is clean.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < times.size(); ++i) {
    if (mode[i] <= 0.05) break;
    const double ly = std::log(mode[i]);
    sx += times[i];
    sy += ly;
    sxx += times[i] * times[i];
    sxy += times[i] * ly;
    ++n;
  }
  if (n < 2) return 0.0;
  const double denom = n * sxx - sx * sx;
  return denom != 0 ? -(n * sxy - sx * sy) / denom : 0.0;
}

}  // namespace

McRates fit_rates(const SectorSeries& s) {
  McRates out;
  const std::array<double, 9> g = fit_gamma(s.times, s.diag);
  const int nb = static_cast<int>(s.diag_batch.size());
  std::vector<std::array<double, 9>> gb(static_cast<size_t>(nb));
  for (int b = 0; b < nb; ++b) gb[static_cast<size_t>(b)] = fit_gamma(s.times, s.diag_batch[static_cast<size_t>(b)]);

  auto entry = [&](int m, int l, RateEstimate& r) {
    const int idx = 3 * m + l;
    const int sym = 3 * l + m;
    r.value = 0.5 * (g[static_cast<size_t>(idx)] + g[static_cast<size_t>(sym)]);
    double mean = 0, var = 0;
    for (int b = 0; b < nb; ++b) {
      const double v = 0.5 * (gb[static_cast<size_t>(b)][static_cast<size_t>(idx)] +
                              gb[static_cast<size_t>(b)][static_cast<size_t>(sym)]);
      mean += v;
    }
    mean /= nb;
    for (int b = 0; b < nb; ++b) {
      const double v = 0.5 * (gb[static_cast<size_t>(b)][static_cast<size_t>(idx)] +
                              gb[static_cast<size_t>(b)][static_cast<size_t>(sym)]);
      var += (v - mean) * (v - mean);
    }
    r.stat_err = nb > 1 ? std::sqrt(var / (nb - 1) / nb) : 0.0;
  };
  entry(0, 0, out.mu1);
  entry(1, 1, out.mu2);
  entry(2, 2, out.mu12);
  entry(0, 1, out.sigma12);
  entry(0, 2, out.delta1);
  entry(1, 2, out.delta2);

  auto mode_rate = [&](const std::vector<double>& mean_mode,
                       const std::vector<std::vector<double>>& batch_mode, RateEstimate& r) {
    r.value = fit_lambda(s.times, mean_mode);
    double mean = 0, var = 0;
    for (int b = 0; b < nb; ++b) mean += fit_lambda(s.times, batch_mode[static_cast<size_t>(b)]);
    mean /= nb;
    for (int b = 0; b < nb; ++b) {
      const double v = fit_lambda(s.times, batch_mode[static_cast<size_t>(b)]);
      var += (v - mean) * (v - mean);
    }
    r.stat_err = nb > 1 ? std::sqrt(var / (nb - 1) / nb) : 0.0;
  };
  mode_rate(s.zq, s.zq_batch, out.lambda_zq);
  mode_rate(s.dq, s.dq_batch, out.lambda_dq);
  return out;
}

TelegraphResult telegraph_relaxation(const TelegraphParams& p, double duration, int n_times,
                                     int ensemble, uint64_t seed, int threads, int batches) {
  if (p.j1k.size() != p.j2k.size())
    throw std::invalid_argument("telegraph_relaxation: coupling lists differ in length");
  if (p.t1dist <= 0) throw std::invalid_argument("telegraph_relaxation: t1dist must be > 0");
  const size_t nk = p.j1k.size();

  TelegraphResult out;
  out.times.resize(static_cast<size_t>(n_times) + 1);
  for (int i = 0; i <= n_times; ++i)
    out.times[static_cast<size_t>(i)] = duration * i / n_times;
  for (size_t k = 0; k < nk; ++k) {
    out.h2_zq += 0.25 * (p.j1k[k] - p.j2k[k]) * (p.j1k[k] - p.j2k[k]);
    out.h2_dq += 0.25 * (p.j1k[k] + p.j2k[k]) * (p.j1k[k] + p.j2k[k]);
  }

  batches = std::min(batches, ensemble);
  const size_t nt = out.times.size();
  std::vector<std::vector<double>> zq_b(static_cast<size_t>(batches), std::vector<double>(nt, 0.0));
  std::vector<std::vector<double>> dq_b = zq_b;
  std::vector<int> count(static_cast<size_t>(batches), 0);

  const double flip_rate = 1.0 / (2.0 * p.t1dist);

  auto run_batch = [&](int batch) {
    std::vector<double> s(nk), next_flip(nk);
    for (int traj = batch; traj < ensemble; traj += batches) {
      Philox rng(seed, (0x7e1eULL << 32) ^ static_cast<uint64_t>(traj));
      for (size_t k = 0; k < nk; ++k) {
        s[k] = rng.uniform() < 0.5 ? 0.5 : -0.5;
        next_flip[k] = -std::log(1.0 - rng.uniform()) / flip_rate;
      }
      double phase_zq = 0.0, phase_dq = 0.0, tc = 0.0;
      for (size_t i = 0; i < nt; ++i) {
        const double target = out.times[i];
        for (;;) {
          // Earliest pending flip.
          size_t kmin = 0;
          double tmin = next_flip[0];
          for (size_t k = 1; k < nk; ++k)
            if (next_flip[k] < tmin) {
              tmin = next_flip[k];
              kmin = k;
            }
          const double t_stop = std::min(tmin, target);
          double h_zq = 0.0, h_dq = 0.0;
          for (size_t k = 0; k < nk; ++k) {
            h_zq += (p.j1k[k] - p.j2k[k]) * s[k];
            h_dq += (p.j1k[k] + p.j2k[k]) * s[k];
          }
          phase_zq += h_zq * (t_stop - tc);
          phase_dq += h_dq * (t_stop - tc);
          tc = t_stop;
          if (tmin >= target) break;
          s[kmin] = -s[kmin];
          next_flip[kmin] = tmin - std::log(1.0 - rng.uniform()) / flip_rate;
        }
        zq_b[static_cast<size_t>(batch)][i] += std::cos(phase_zq);
        dq_b[static_cast<size_t>(batch)][i] += std::cos(phase_dq);
      }
      ++count[static_cast<size_t>(batch)];
    }
  };

  if (threads <= 1) {
    for (int b = 0; b < batches; ++b) run_batch(b);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (int b = t; b < batches; b += threads) run_batch(b);
      });
    for (auto& th : pool) th.join();
  }

  out.g_zq.assign(nt, 0.0);
  out.g_dq.assign(nt, 0.0);
  out.err_zq.assign(nt, 0.0);
  out.err_dq.assign(nt, 0.0);
  for (int b = 0; b < batches; ++b)
    for (size_t i = 0; i < nt; ++i) {
      zq_b[static_cast<size_t>(b)][i] /= count[static_cast<size_t>(b)];
      dq_b[static_cast<size_t>(b)][i] /= count[static_cast<size_t>(b)];
      out.g_zq[i] += zq_b[static_cast<size_t>(b)][i] * count[static_cast<size_t>(b)];
      out.g_dq[i] += dq_b[static_cast<size_t>(b)][i] * count[static_cast<size_t>(b)];
    }
  for (size_t i = 0; i < nt; ++i) {
    out.g_zq[i] /= ensemble;
    out.g_dq[i] /= ensemble;
    double vz = 0, vd = 0;
    for (int b = 0; b < batches; ++b) {
      vz += (zq_b[static_cast<size_t>(b)][i] - out.g_zq[i]) * (zq_b[static_cast<size_t>(b)][i] - out.g_zq[i]);
      vd += (dq_b[static_cast<size_t>(b)][i] - out.g_dq[i]) * (dq_b[static_cast<size_t>(b)][i] - out.g_dq[i]);
    }
    if (batches > 1) {
      out.err_zq[i] = std::sqrt(vz / (batches - 1) / batches);
      out.err_dq[i] = std::sqrt(vd / (batches - 1) / batches);
    }
  }
  return out;
}

}  // namespace spinpair::oracle
