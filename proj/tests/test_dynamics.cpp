#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spinpair/dynamics.hpp"
#include "spinpair/measure.hpp"
#include "spinpair/linalg.hpp"
#include "spinpair/rng.hpp"
#include "spinpair/units.hpp"

using namespace spinpair;

namespace {

DiagonalRates table_rates() {
  DiagonalRates r;
  r.mu1 = 0.50;
  r.mu2 = 0.41;
  r.mu12 = 0.335;
  r.sigma12 = 0.19;
  r.delta1 = 0.0159;
  r.delta2 = -0.026;
  return r;
}

Mat4 random_hermitian_traceless(Philox& rng) {
  CoherenceVector v;
  for (int l = 0; l < 15; ++l) v[l] = rng.normal();
  return from_coherence_vector(v);
}

double purity(const Mat4& rho) { return std::real(trace_prod(rho, rho)); }

}  // namespace

TEST_CASE("pulses act as expected on the product operators") {
  const double eps1 = 1.0, eps2 = 0.25;
  const Mat4 eq = equilibrium_density(eps1, eps2);

  // (pi)_1y inverts only spin 1.
  const Mat4 inv = apply_pulse(eq, 1, Axis::y, M_PI);
  const CoherenceVector v = to_coherence_vector(inv);
  CHECK(v[op::S1Z] == doctest::Approx(-eps1));
  CHECK(v[op::S2Z] == doctest::Approx(eps2));

  // Zero angle is the identity.
  CHECK(max_abs_diff(apply_pulse(eq, 1, Axis::y, 0.0), eq) == 0.0);

  // (pi/2)_2y maps 2S1xS2x -> -2S1xS2z.
  const ProductBasis& p = product_basis();
  const Mat4 out = apply_pulse(p[op::XX], 2, Axis::y, M_PI / 2);
  CHECK(max_abs_diff(out, -1.0 * p[op::XZ]) < 1e-14);

  // Unitarity: trace and purity preserved on random states.
  Philox rng(5);
  for (int i = 0; i < 50; ++i) {
    const Mat4 rho = random_hermitian_traceless(rng);
    const Mat4 rot = apply_pulse(rho, 1 + (i % 2), i % 3 == 0 ? Axis::x : Axis::y,
                                 rng.uniform() * 6.0);
    CHECK(std::abs(trace(rot)) < 1e-12);
    CHECK(purity(rot) == doctest::Approx(purity(rho)).epsilon(1e-12));
  }
}

TEST_CASE("coherent evolution under the J coupling alone") {
  const double wj = hz_to_rad(138.0);
  const RfHamiltonian h{0.0, 0.0, wj};
  Philox rng(17);
  const Mat4 rho = random_hermitian_traceless(rng);
  const Mat4 out = evolve_coherent(rho, h, kTwoPi / wj);
  // ZZ commutes with itself: <2S1zS2z> unchanged; also purity preserved.
  CHECK(to_coherence_vector(out)[op::ZZ] ==
        doctest::Approx(to_coherence_vector(rho)[op::ZZ]).epsilon(1e-12));
  CHECK(purity(out) == doctest::Approx(purity(rho)).epsilon(1e-12));
}

TEST_CASE("DHH blocks rotate the x-basis product states onto Bell states") {
  // Independent oracle: 2x2 dynamics in the x-basis ZQ/DQ blocks. With the
  // block Hamiltonian [[-q/2, wj/4], [wj/4, q/2]] (q = Delta or Sigma), a
  // pi rotation about the (wj/4, 0, -q/2) axis at |q| = wj/2 maps the poles
  // onto the +-x Bloch states, i.e. product states onto Bell states. The
  // 4x4 propagation must reproduce that.
  const double wj = hz_to_rad(138.0);
  const double t = M_PI * std::sqrt(2.0) / wj;

  // Spin-1 down-x, spin-2 up-x as a pure-state density matrix.
  auto xproduct = [&](int s1, int s2) {
    Mat4 rho;
    const cplx amp[2][2] = {{0.5, 0.5}, {0.5, -0.5}};
    cplx ket[4];
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        ket[2 * a + b] = 2.0 * amp[s1][a] * amp[s2][b];  // tensor of (1,±1)/sqrt2
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) rho(i, j) = ket[i] * std::conj(ket[j]);
    for (int i = 0; i < 4; ++i) rho(i, i) -= 0.25;
    return rho;
  };

  // Delta = w1 - w2 = -wj/2 sends |dn_x up_x> to |S0>.
  const RfHamiltonian zq{0.75 * wj, 1.25 * wj, wj};
  const Mat4 s0 = evolve_coherent(xproduct(1, 0), zq, t);
  CHECK(state_fidelity(s0, BellId::S0) > 0.9999);

  // and |up_x dn_x> to |T0,x>.
  const Mat4 t0x = evolve_coherent(xproduct(0, 1), zq, t);
  CHECK(state_fidelity(t0x, BellId::T0x) > 0.9999);

  // Sigma = w1 + w2 = -wj/2 sends |up_x up_x> to |psi_+,x>.
  const RfHamiltonian dq{-0.25 * wj, -0.25 * wj, wj};
  const Mat4 pp = evolve_coherent(xproduct(0, 0), dq, t);
  CHECK(state_fidelity(pp, BellId::PsiPlusX) > 0.9999);
  const Mat4 pm = evolve_coherent(xproduct(1, 1), dq, t);
  CHECK(state_fidelity(pm, BellId::PsiMinusX) > 0.9999);
}

TEST_CASE("diagonal propagation: fixed point, semigroup, derivative") {
  const DiagonalRates r = table_rates();
  const double eps1 = 1.0, eps2 = 0.2515;

  const DiagState x0{-eps1, eps2, 0.0};
  // t=0 identity.
  const DiagState same = evolve_diagonal(x0, r, eps1, eps2, 0.0);
  CHECK(same.s1z == doctest::Approx(x0.s1z));
  CHECK(same.zz == doctest::Approx(0.0));

  // Equilibrium is a fixed point.
  const DiagState eq{eps1, eps2, 0.0};
  const DiagState still = evolve_diagonal(eq, r, eps1, eps2, 5.0);
  CHECK(still.s1z == doctest::Approx(eps1).epsilon(1e-14));
  CHECK(still.s2z == doctest::Approx(eps2).epsilon(1e-14));
  CHECK(std::abs(still.zz) < 1e-14);

  // Semigroup property.
  const DiagState a = evolve_diagonal(x0, r, eps1, eps2, 0.7);
  const DiagState b = evolve_diagonal(a, r, eps1, eps2, 1.1);
  const DiagState c = evolve_diagonal(x0, r, eps1, eps2, 1.8);
  CHECK(b.s1z == doctest::Approx(c.s1z).epsilon(1e-12));
  CHECK(b.s2z == doctest::Approx(c.s2z).epsilon(1e-12));
  CHECK(b.zz == doctest::Approx(c.zz).epsilon(1e-12));

  // d/dt at 0 equals -Gamma (x0 - x_eq), finite differences.
  const double h = 1e-6;
  const DiagState xh = evolve_diagonal(x0, r, eps1, eps2, h);
  const double ds1 = (xh.s1z - x0.s1z) / h;
  const double ds2 = (xh.s2z - x0.s2z) / h;
  const double dzz = (xh.zz - x0.zz) / h;
  const double d1 = x0.s1z - eps1, d2 = x0.s2z - eps2, d3 = x0.zz;
  CHECK(ds1 == doctest::Approx(-(r.mu1 * d1 + r.sigma12 * d2 + r.delta1 * d3)).epsilon(1e-5));
  CHECK(ds2 == doctest::Approx(-(r.sigma12 * d1 + r.mu2 * d2 + r.delta2 * d3)).epsilon(1e-5));
  CHECK(dzz == doctest::Approx(-(r.delta1 * d1 + r.delta2 * d2 + r.mu12 * d3)).epsilon(1e-5));

  // Negative eigenvalues are flagged but propagate.
  DiagonalRates bad = r;
  bad.mu12 = -0.5;
  bool neg = false;
  (void)evolve_diagonal(x0, bad, eps1, eps2, 0.1, &neg);
  CHECK(neg);
}

TEST_CASE("Bell-start initial zz slope matches mu_ZQ from the rate relation") {
  const DiagonalRates r = table_rates();
  const double eps1 = 1.0, eps2 = 1.0 / 3.9760;
  const double zz0 = -0.25 * (eps1 + eps2);
  const DiagState x0{0.0, 0.0, zz0};
  const double h = 1e-7;
  const DiagState xh = evolve_diagonal(x0, r, eps1, eps2, h);
  const double rate = -(xh.zz - x0.zz) / (h * zz0);
  const double mu_zq = r.mu12 + 4.0 * (r.delta1 * eps1 + r.delta2 * eps2) / (eps1 + eps2);
  CHECK(rate == doctest::Approx(mu_zq).epsilon(1e-5));
  // And mu_ZQ - mu_DQ = 8 (d1 e1 + d2 e2)/(e1+e2).
  const DiagState y0{0.0, 0.0, -zz0};
  const DiagState yh = evolve_diagonal(y0, r, eps1, eps2, h);
  const double rate_dq = -(yh.zz - y0.zz) / (h * (-zz0));
  CHECK(rate - rate_dq ==
        doctest::Approx(8.0 * (r.delta1 * eps1 + r.delta2 * eps2) / (eps1 + eps2)).epsilon(1e-4));
}

TEST_CASE("off-diagonal sectors never mix and decay at the stated rates") {
  OffDiagonalRates o;
  o.zq_d = 0.2;
  o.zq_alpha = 0.126;
  o.dq_d = 0.45;
  o.dq_alpha = 0.118;
  const OffDiagState x0{-1.0, 0.0};  // pure ZQ start
  for (double t : {0.1, 0.5, 2.0}) {
    const OffDiagState x = evolve_offdiagonal(x0, o, t);
    CHECK(x.minus == 0.0);
    CHECK(x.plus == doctest::Approx(-std::exp(-o.lambda_zq_fast() * t)).epsilon(1e-12));
  }
  // 1/e point at the table value.
  OffDiagonalRates table;
  table.zq_d = 0.326;  // put the full rate in one slot
  const OffDiagState e = evolve_offdiagonal({1.0, 0.0}, table, 1.0 / 0.326);
  CHECK(e.plus == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("off-diagonal decay with the Anderson-Weiss context") {
  OffDiagonalRates o;
  o.zq_d = 0.2;
  o.dq_d = 0.45;
  AndersonWeissContext aw;
  aw.h2_zq = 0.05;
  aw.h2_dq = 0.05;
  aw.t1dist = 3.0;
  const double lam_tilde = 0.5 * aw.h2_zq * 2.0 * aw.t1dist;
  // Long-time log slope approaches lambda_fast + lambda_tilde.
  const double t1 = 60.0, t2 = 61.0;
  const auto a = evolve_offdiagonal({1.0, 0.0}, o, t1, aw);
  const auto b = evolve_offdiagonal({1.0, 0.0}, o, t2, aw);
  const double slope = -(std::log(b.plus) - std::log(a.plus)) / (t2 - t1);
  CHECK(slope == doctest::Approx(o.zq_d + lam_tilde).epsilon(1e-6));
  // Short-time slope is smaller (delayed onset).
  const auto c = evolve_offdiagonal({1.0, 0.0}, o, 0.01, aw);
  const double early = -std::log(c.plus) / 0.01;
  CHECK(early < o.zq_d + 0.2 * lam_tilde);
}

TEST_CASE("gradient crusher keeps only the longitudinal sector") {
  CoherenceVector v;
  v[op::S1Z] = 0.3;
  v[op::S2Z] = -0.1;
  v[op::ZZ] = 0.2;
  const CoherenceVector kept = apply_gradient_crusher(v);
  for (int l = 0; l < 15; ++l) CHECK(kept[l] == v[l]);

  // A (pi/2)-pulsed equilibrium (pure S1x) is wiped out.
  const Mat4 pulsed = apply_pulse(equilibrium_density(1.0, 0.0), 1, Axis::y, M_PI / 2);
  const CoherenceVector crushed = apply_gradient_crusher(to_coherence_vector(pulsed));
  for (int l = 0; l < 15; ++l) CHECK(std::abs(crushed[l]) < 1e-15);

  // For this heteronuclear pair the z-basis zero-quantum coherences dephase
  // under a gradient too (their precession scales with gamma1 - gamma2), so
  // a crushed singlet keeps only its zz part.
  const CoherenceVector s0 = apply_gradient_crusher(to_coherence_vector(bell_density(BellId::S0)));
  CHECK(s0[op::ZZ] == doctest::Approx(-0.5));
  CHECK(s0[op::XX] == 0.0);
  CHECK(s0[op::YY] == 0.0);
}
