#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "spinpair/fitting.hpp"
#include "spinpair/rng.hpp"
#include "spinpair/units.hpp"

using namespace spinpair;

namespace {

Series sampled(double t0, double t1, int n, const std::function<double(double)>& f) {
  Series s;
  for (int i = 0; i < n; ++i) {
    const double t = t0 + (t1 - t0) * i / (n - 1);
    s.t.push_back(t);
    s.y.push_back(f(t));
  }
  return s;
}

SequenceContext table_ctx() {
  SequenceContext ctx;
  ctx.diag.mu1 = 0.50;
  ctx.diag.mu2 = 0.41;
  ctx.diag.mu12 = 0.335;
  ctx.diag.sigma12 = 0.19;
  ctx.diag.delta1 = 0.0159;
  ctx.diag.delta2 = -0.026;
  ctx.offdiag.zq_d = 0.326;
  ctx.offdiag.dq_d = 0.568;
  ctx.eps1 = 1.0;
  ctx.eps2 = kGamma13C / kGamma1H;
  ctx.omega_j = hz_to_rad(138.0);
  return ctx;
}

ExperimentGrids default_grids() {
  ExperimentGrids g;
  for (int i = 0; i <= 30; ++i) g.ir_times.push_back(i * 0.02);
  for (double t = 0.7; t <= 8.0; t += 0.4) g.ir_times.push_back(t);
  for (int i = 0; i <= 30; ++i) g.bell_zz_times.push_back(i * 0.025);
  for (double t = 0.85; t <= 8.0; t += 0.4) g.bell_zz_times.push_back(t);
  for (int i = 0; i <= 30; ++i) g.bell_xx_times.push_back(i * 0.25);
  return g;
}

}  // namespace

TEST_CASE("polynomial fit recovers exact polynomial data") {
  const Series s = sampled(0.0, 1.0, 12, [](double t) { return 0.3 - 1.2 * t + 0.45 * t * t; });
  const PolyFit f = poly_fit(s, 0.0, 1.0, 2);
  REQUIRE(f.ok);
  CHECK(f.coeff[0] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(f.coeff[1] == doctest::Approx(-1.2).epsilon(1e-12));
  CHECK(f.coeff[2] == doctest::Approx(0.45).epsilon(1e-12));
  CHECK(f.residual_norm < 1e-12);

  const PolyFit few = poly_fit(s, 0.0, 0.05, 2);
  CHECK_FALSE(few.ok);
}

TEST_CASE("parabolic initial fit on a synthetic exponential") {
  // y = exp(-0.5 t) on [0, 0.2/0.5]: window bias below 1%.
  const Series s = sampled(0.0, 0.4, 21, [](double t) { return std::exp(-0.5 * t); });
  const InitialRate r = parabolic_initial_fit(s, 0.0, 0.4, SlopeFlavor::normalized_abs);
  REQUIRE(r.ok);
  CHECK(r.rate.value == doctest::Approx(0.5).epsilon(0.01));
  CHECK(r.sys_err < 0.01);

  // Constant series: zero rate.
  const Series c = sampled(0.0, 1.0, 8, [](double) { return 2.0; });
  const InitialRate rc = parabolic_initial_fit(c, 0.0, 1.0, SlopeFlavor::normalized_abs);
  REQUIRE(rc.ok);
  CHECK(std::abs(rc.rate.value) < 1e-12);
}

TEST_CASE("rates are invariant under uniform y rescaling") {
  const Series s = sampled(0.0, 0.4, 21, [](double t) { return std::exp(-0.7 * t); });
  Series scaled = s;
  for (auto& y : scaled.y) y *= 13.7;
  const InitialRate a = parabolic_initial_fit(s, 0.0, 0.4, SlopeFlavor::normalized_abs);
  const InitialRate b = parabolic_initial_fit(scaled, 0.0, 0.4, SlopeFlavor::normalized_abs);
  CHECK(a.rate.value == doctest::Approx(b.rate.value).epsilon(1e-12));
  const MonoexpFit ma = monoexp_fit(s);
  const MonoexpFit mb = monoexp_fit(scaled);
  CHECK(ma.rate.value == doctest::Approx(mb.rate.value).epsilon(1e-10));
}

TEST_CASE("monoexponential fit") {
  // Noiseless decay recovered to high precision.
  const Series s = sampled(0.0, 8.0, 40, [](double t) { return 0.31 * std::exp(-0.326 * t); });
  const MonoexpFit f = monoexp_fit(s);
  REQUIRE(f.ok);
  CHECK(f.rate.value == doctest::Approx(0.326).epsilon(1e-8));
  CHECK(f.amplitude == doctest::Approx(0.31).epsilon(1e-8));

  // Negative-amplitude decay.
  const Series neg = sampled(0.0, 8.0, 40, [](double t) { return -0.31 * std::exp(-0.326 * t); });
  const MonoexpFit fn = monoexp_fit(neg);
  REQUIRE(fn.ok);
  CHECK(fn.rate.value == doctest::Approx(0.326).epsilon(1e-8));
  CHECK(fn.amplitude == doctest::Approx(-0.31).epsilon(1e-8));

  // Recovery model with the control-experiment parameters.
  const Series rec = sampled(0.0, 40.0, 50, [](double t) {
    return 1.0 * (1.0 - 1.887 * std::exp(-0.122 * t));
  });
  const MonoexpFit fr = monoexp_fit(rec, ExpModel::recovery);
  REQUIRE(fr.ok);
  CHECK(fr.offset == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(fr.amplitude == doctest::Approx(1.887).epsilon(1e-8));
  CHECK(fr.rate.value == doctest::Approx(0.122).epsilon(1e-8));
}

TEST_CASE("monoexp fit with seeded noise stays within 3 sigma") {
  Philox rng(2718);
  int cover = 0;
  const int runs = 100;
  for (int run = 0; run < runs; ++run) {
    Series s = sampled(0.0, 5.0, 30, [](double t) { return std::exp(-0.568 * t); });
    for (auto& y : s.y) y += 0.01 * rng.normal();
    const MonoexpFit f = monoexp_fit(s);
    REQUIRE(f.ok);
    if (std::abs(f.rate.value - 0.568) <= 3.0 * f.rate.err) ++cover;
  }
  CHECK(cover >= 90);  // ~99.7% nominal; 90/100 is a loose floor
}

TEST_CASE("zq_dq_refine separates decay from drift") {
  const auto drift = [](double t) { return 0.01 * t; };
  const Series cp = sampled(0.0, 6.0, 25, [&](double t) { return std::exp(-0.4 * t) + drift(t); });
  const Series cm = sampled(0.0, 6.0, 25, [&](double t) { return -std::exp(-0.4 * t) + drift(t); });
  const auto [half_diff, half_sum] = zq_dq_refine(cp, cm);
  for (size_t i = 0; i < cp.size(); ++i) {
    CHECK(half_diff.y[i] == doctest::Approx(std::exp(-0.4 * cp.t[i])).epsilon(1e-14));
    CHECK(half_sum.y[i] == doctest::Approx(drift(cp.t[i])).epsilon(1e-14));
  }
  Series wrong = cm;
  wrong.t[3] += 1e-6;
  CHECK_THROWS_AS(zq_dq_refine(cp, wrong), std::invalid_argument);
}

TEST_CASE("series CSV round trip") {
  Series s;
  s.t = {0.0, 0.125, 0.25};
  s.y = {1.0, -0.5, 0.25};
  s.sigma = {0.01, 0.01, 0.02};
  const Series back = series_from_csv(series_to_csv(s));
  REQUIRE(back.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(back.t[i] == s.t[i]);
    CHECK(back.y[i] == s.y[i]);
    CHECK(back.sigma[i] == s.sigma[i]);
  }
}

TEST_CASE("closed loop: battery generated from the published rates is recovered") {
  const SequenceContext ctx = table_ctx();
  const auto recs = run_table_battery(ctx, default_grids());
  ExtractionOptions opt;
  opt.eps1 = ctx.eps1;
  opt.eps2 = ctx.eps2;
  const RateSet rs = extract_rate_set(recs, opt);
  CHECK(rs.complete());
  CHECK(rs.mu1.value == doctest::Approx(0.50).epsilon(0.01));
  CHECK(rs.mu2.value == doctest::Approx(0.41).epsilon(0.01));
  CHECK(rs.sigma12.value == doctest::Approx(0.19).epsilon(0.01));
  CHECK(rs.sigma12_1.value == doctest::Approx(rs.sigma12_2.value).epsilon(1e-6));
  CHECK(rs.delta1.value == doctest::Approx(0.0159).epsilon(0.01));
  CHECK(rs.delta2.value == doctest::Approx(-0.026).epsilon(0.01));
  CHECK(rs.lambda_zq.value == doctest::Approx(0.326).epsilon(0.0001));
  CHECK(rs.lambda_dq.value == doctest::Approx(0.568).epsilon(0.0001));
  // mu_ZQ/mu_DQ recover the slopes implied by the generator matrix.
  const double bias = 4.0 * (ctx.diag.delta1 * ctx.eps1 + ctx.diag.delta2 * ctx.eps2) /
                      (ctx.eps1 + ctx.eps2);
  CHECK(rs.mu_zq.value == doctest::Approx(ctx.diag.mu12 + bias).epsilon(0.01));
  CHECK(rs.mu_dq.value == doctest::Approx(ctx.diag.mu12 - bias).epsilon(0.01));
  CHECK(rs.mu12.value == doctest::Approx(ctx.diag.mu12).epsilon(0.01));

  // Flipping delta1 in the generator flips the antisymmetric asymmetry.
  SequenceContext flipped = ctx;
  flipped.diag.delta1 = -ctx.diag.delta1;
  const auto recs2 = run_table_battery(flipped, default_grids());
  const RateSet rs2 = extract_rate_set(recs2, opt);
  CHECK(rs2.delta1.value == doctest::Approx(-rs.delta1.value).epsilon(0.01));

  // Missing experiments leave explicit gaps.
  std::vector<ExperimentRecord> partial(recs.begin(), recs.begin() + 2);
  const RateSet sparse = extract_rate_set(partial, opt);
  CHECK_FALSE(sparse.complete());
}
