// Operator-level reconstruction of the relaxation matrix: every fluctuating
// Hamiltonian term is carried as (operator, phase frequency, field label);
// double commutators are expanded numerically with the spin algebra, the
// stated second moments supply the ensemble averages, and the half-range
// correlation integrals become spectral-density factors. No closed-form rate
// expression is reused, so this is an independent check of all of them.
#include <cmath>
#include <vector>

#include "spinpair/oracle.hpp"

namespace spinpair::oracle {

namespace {

enum Field {
  kF0,
  kF1,
  kF1c,
  kF2,
  kF2c,
  kA1P,
  kA1Pc,
  kA2P,
  kA2Pc,
  kA1Z,
  kA2Z,
  kJ1Z,
  kJ2Z,
};

bool is_slow(Field f) { return f == kJ1Z || f == kJ2Z; }

struct Term {
  Mat4 op;
  double freq;
  Field field;
};

std::vector<Term> build_terms(const MicroParams& p) {
  const Mat4 s1p = spin_ladder(1, +1), s1m = spin_ladder(1, -1);
  const Mat4 s2p = spin_ladder(2, +1), s2m = spin_ladder(2, -1);
  const Mat4 s1z = spin_op(1, Axis::z), s2z = spin_op(2, Axis::z);
  const Mat4 zz = s1z * s2z;
  const double d = p.omega1 - p.omega2;
  const double s = p.omega1 + p.omega2;

  std::vector<Term> t;
  t.push_back({zz, 0.0, kF0});
  t.push_back({-0.25 * (s1p * s2m), d, kF0});
  t.push_back({-0.25 * (s1m * s2p), -d, kF0});
  t.push_back({s1p * s2z, p.omega1, kF1});
  t.push_back({s1z * s2p, p.omega2, kF1});
  t.push_back({s1m * s2z, -p.omega1, kF1c});
  t.push_back({s1z * s2m, -p.omega2, kF1c});
  t.push_back({s1p * s2p, s, kF2});
  t.push_back({s1m * s2m, -s, kF2c});
  t.push_back({s1p, p.omega1, kA1P});
  t.push_back({s1m, -p.omega1, kA1Pc});
  t.push_back({s2p, p.omega2, kA2P});
  t.push_back({s2m, -p.omega2, kA2Pc});
  t.push_back({s1z, 0.0, kA1Z});
  t.push_back({s2z, 0.0, kA2Z});
  if (p.slow_j.aj1z2 > 0 || p.slow_j.aj2z2 > 0) {
    t.push_back({s1z, 0.0, kJ1Z});
    t.push_back({s2z, 0.0, kJ2Z});
  }
  return t;
}

// Same-time covariance <xi_a xi_b>; zero for independent or non-conjugate
// pairings. Symmetric in its arguments.
double covariance(const MicroParams& p, Field a, Field b) {
  const auto f = dipolar_second_moments(p.k);
  auto pair = [&](Field x, Field y) { return (a == x && b == y) || (a == y && b == x); };
  if (a == kF0 && b == kF0) return f[0];
  if (pair(kF1, kF1c)) return f[1];
  if (pair(kF2, kF2c)) return f[2];
  if (pair(kF1, kA1Pc) || pair(kF1c, kA1P)) return 0.5 * p.xcorr1;
  if (pair(kF1, kA2Pc) || pair(kF1c, kA2P)) return 0.5 * p.xcorr2;
  if (pair(kA1P, kA1Pc)) return p.a1perp2;
  if (pair(kA2P, kA2Pc)) return p.a2perp2;
  if (a == kA1Z && b == kA1Z) return p.a1z2;
  if (a == kA2Z && b == kA2Z) return p.a2z2;
  if (pair(kA1Z, kA2Z)) return p.a1z2z;
  if (a == kJ1Z && b == kJ1Z) return p.slow_j.aj1z2;
  if (a == kJ2Z && b == kJ2Z) return p.slow_j.aj2z2;
  if (pair(kJ1Z, kJ2Z)) return p.slow_j.aj12;
  return 0.0;
}

}  // namespace

OperatorRates appendix_rates(const MicroParams& p, double qot_factor) {
  p.validate();
  const std::vector<Term> terms = build_terms(p);
  const ProductBasis& basis = product_basis();
  const SpectralDensity j{p.tau_c};
  const double jt = p.slow_j.t1dist;

  // Re of the half-range correlation integral: J(w)/2 for the fast bath,
  // 2*T1dist-based Lorentzian for the slow one. The imaginary part is the
  // dynamic frequency shift, which the rate equations discard.
  auto half_j = [&](Field f, double w) {
    if (is_slow(f)) return jt / (1.0 + w * w * jt * jt);
    return 0.5 * j(w);
  };

  // Precompute the inner commutators [P_l, O_a].
  std::vector<std::array<Mat4, 15>> inner(terms.size());
  for (size_t a = 0; a < terms.size(); ++a)
    for (int l = 0; l < 15; ++l)
      inner[a][static_cast<size_t>(l)] = comm(basis[static_cast<size_t>(l)], terms[a].op);

  OperatorRates out;
  for (size_t a = 0; a < terms.size(); ++a) {
    for (size_t b = 0; b < terms.size(); ++b) {
      double cov = covariance(p, terms[a].field, terms[b].field);
      if (is_slow(terms[a].field) != is_slow(terms[b].field)) cov = 0.0;
      if (cov == 0.0) continue;
      const double w_sum = terms[a].freq + terms[b].freq;
      const double weight = cov * half_j(terms[a].field, terms[a].freq);
      if (w_sum != 0.0 && std::abs(w_sum) > qot_factor * std::abs(weight)) continue;
      for (int l = 0; l < 15; ++l) {
        const Mat4 dc = comm(inner[a][static_cast<size_t>(l)], terms[b].op);
        for (int m = 0; m < 15; ++m) {
          const double tr = std::real(trace_prod(basis[static_cast<size_t>(m)], dc));
          if (tr != 0.0) out.r[static_cast<size_t>(m)][static_cast<size_t>(l)] += weight * tr;
        }
      }
    }
  }
  return out;
}

DiagonalRates OperatorRates::diagonal() const {
  DiagonalRates d;
  d.mu1 = r[op::S1Z][op::S1Z];
  d.mu2 = r[op::S2Z][op::S2Z];
  d.mu12 = r[op::ZZ][op::ZZ];
  d.sigma12 = 0.5 * (r[op::S1Z][op::S2Z] + r[op::S2Z][op::S1Z]);
  d.delta1 = 0.5 * (r[op::S1Z][op::ZZ] + r[op::ZZ][op::S1Z]);
  d.delta2 = 0.5 * (r[op::S2Z][op::ZZ] + r[op::ZZ][op::S2Z]);
  return d;
}

namespace {

double mode_rate(const std::array<std::array<double, 15>, 15>& r, int i, int j, double si,
                 double sj) {
  // Rate of the normalized mode (e_i + s e_j)/sqrt(2) with s = sj/si signs.
  double v = 0.0;
  v += si * si * r[static_cast<size_t>(i)][static_cast<size_t>(i)];
  v += sj * sj * r[static_cast<size_t>(j)][static_cast<size_t>(j)];
  v += si * sj * (r[static_cast<size_t>(i)][static_cast<size_t>(j)] + r[static_cast<size_t>(j)][static_cast<size_t>(i)]);
  return 0.5 * v;
}

}  // namespace

double OperatorRates::lambda_zq() const { return mode_rate(r, op::XX, op::YY, 1.0, 1.0); }

double OperatorRates::lambda_dq() const { return mode_rate(r, op::XX, op::YY, 1.0, -1.0); }

double OperatorRates::zq_dq_mixing() const {
  // <u| R |w> with u = (XX + YY)/sqrt(2), w = (XX - YY)/sqrt(2).
  const double v = r[op::XX][op::XX] - r[op::XX][op::YY] + r[op::YY][op::XX] -
                   r[op::YY][op::YY];
  return 0.5 * v;
}

}  // namespace spinpair::oracle
