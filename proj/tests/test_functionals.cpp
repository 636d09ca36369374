#include "doctest.h"

#include <random>

#include "mmpde/functionals.hpp"
#include "support.hpp"

using namespace mmpde;

TEST_CASE("Winslow derivative bundle at J=I, M=I, d=2") {
  const GDerivatives gd = eval_g(FunctionalSpec::winslow(), Mat::identity(2), 1.0, Mat::identity(2), Vec(2));
  CHECK(gd.g == doctest::Approx(2.0));
  CHECK(gd.dg_ddet == 0.0);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      CHECK(gd.dg_dj(i, j) == doctest::Approx(i == j ? 2.0 : 0.0));
      CHECK(gd.dg_dm(i, j) == doctest::Approx(i == j ? -1.0 : 0.0));
    }
  CHECK(gd.dg_dx.inf_norm() == 0.0);
}

TEST_CASE("Huang value at J=I, M=I, d=2, p=3/2, theta=1/3") {
  const FunctionalSpec spec = FunctionalSpec::huang(1.5, 1.0 / 3.0);
  const GDerivatives gd = eval_g(spec, Mat::identity(2), 1.0, Mat::identity(2), Vec(2));
  CHECK(gd.g == doctest::Approx(4.0 * std::sqrt(2.0) / 3.0).epsilon(1e-14));
  CHECK(gd.dg_dx.inf_norm() == 0.0);
  CHECK(eval_g_value(spec, Mat::identity(2), 1.0, Mat::identity(2)) == doctest::Approx(gd.g).epsilon(1e-15));
}

TEST_CASE("balance function") {
  CHECK(balance_p(FunctionalSpec::winslow(), 4.0 * Mat::identity(2)) == doctest::Approx(4.0));
  CHECK(balance_p(FunctionalSpec::huang(1.5, 1.0 / 3.0), 4.0 * Mat::identity(2)) == doctest::Approx(2.0));
  CHECK(balance_p(FunctionalSpec::huang(1.0, 0.25), 7.0 * Mat::identity(3)) == doctest::Approx(1.0));
}

TEST_CASE("coercivity flags and constants") {
  for (int d : {2, 3}) {
    CHECK(!coercivity_constants(FunctionalSpec::winslow(), d, 1.0, 1.0).has_value());
    CHECK(!coercivity_constants(FunctionalSpec::huang(1.0, 1.0 / 3.0), d, 1.0, 1.0).has_value());
    const auto c = coercivity_constants(FunctionalSpec::huang(1.5, 1.0 / 3.0), d, 0.5, 2.0);
    REQUIRE(c.has_value());
    CHECK(c->q == doctest::Approx(1.5 * d / 2.0));
    CHECK(c->q > d / 2.0);
    CHECK(c->alpha == doctest::Approx((1.0 / 3.0) * std::pow(0.5, d / 2.0)));
    CHECK(c->beta == 0.0);
  }
  // theta above 1/2 needs the estimated sup term
  const auto c = coercivity_constants(FunctionalSpec::huang(2.0, 0.75), 2, 1.0, 1.0, 3.0);
  REQUIRE(c.has_value());
  CHECK(c->beta == doctest::Approx(0.5 * std::pow(2.0, 2.0) * std::pow(3.0, 2.0)));
}

TEST_CASE("Huang construction guards") {
  CHECK_THROWS_AS(FunctionalSpec::huang(0.5, 0.25), std::invalid_argument);
  CHECK_THROWS_AS(FunctionalSpec::huang(1.5, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(FunctionalSpec::huang(-1.0, 0.5), std::invalid_argument);
  CHECK_NOTHROW(FunctionalSpec::huang(2.0 / 3.0, 0.5));  // det term vanishes at theta = 1/2
}

// The central oracle: every returned derivative is checked against central
// differences in a random direction, pinning down the scalar-by-matrix
// layout convention at the same time.
TEST_CASE("derivative bundle matches finite differences") {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::vector<FunctionalSpec> specs = {FunctionalSpec::winslow(), FunctionalSpec::huang(1.5, 1.0 / 3.0),
                                             FunctionalSpec::huang(2.0, 0.2), FunctionalSpec::huang(1.0, 0.5)};
  for (int d : {2, 3}) {
    for (const FunctionalSpec& spec : specs) {
      double worst = 0.0;
      for (int trial = 0; trial < 60; ++trial) {
        // moderate scales keep G at O(10) so the 1e-6-step differences stay
        // clear of cancellation noise
        Mat jac = (1.0 / std::sqrt(d)) * testsup::random_nonsingular(rng, d, 0.3);
        if (spec.kind == FunctionalKind::Huang && jac.det() < 0.0) {
          // flip a row to keep det(J) positive where the Huang det term needs it
          for (int j = 0; j < d; ++j) jac(0, j) = -jac(0, j);
        }
        const double det_jac = jac.det();
        const Mat metric = testsup::random_spd(rng, d, 1.0);
        const Vec x(d);
        const GDerivatives gd = eval_g(spec, jac, det_jac, metric, x);

        auto value = [&](const Mat& j, double r, const Mat& m) { return eval_g_value(spec, j, r, m); };

        // dG/dJ against a random direction
        Mat dir(d);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) dir(i, j) = normal(rng);
        const double hj = 1e-6 * jac.max_abs() / std::max(dir.max_abs(), 1e-12);
        const double fd_j = (value(jac + hj * dir, det_jac, metric) - value(jac - hj * dir, det_jac, metric)) /
                            (2.0 * hj);
        const double an_j = (gd.dg_dj * dir).trace();
        worst = std::max(worst, std::fabs(fd_j - an_j) / std::max(1.0, std::fabs(an_j)));

        // dG/d det(J), holding J fixed
        const double hr = 1e-6 * std::max(std::fabs(det_jac), 1.0);
        if (spec.kind != FunctionalKind::Huang || det_jac - hr > 0.0) {
          const double fd_r = (value(jac, det_jac + hr, metric) - value(jac, det_jac - hr, metric)) / (2.0 * hr);
          worst = std::max(worst, std::fabs(fd_r - gd.dg_ddet) / std::max(1.0, std::fabs(gd.dg_ddet)));
        }

        // dG/dM against a random symmetric direction
        Mat sym = testsup::random_symmetric(rng, d);
        const double hm = 1e-7 * metric.max_abs() / std::max(sym.max_abs(), 1e-12);
        const double fd_m = (value(jac, det_jac, metric + hm * sym) - value(jac, det_jac, metric - hm * sym)) /
                            (2.0 * hm);
        const double an_m = (gd.dg_dm * sym).trace();
        worst = std::max(worst, std::fabs(fd_m - an_m) / std::max(1.0, std::fabs(an_m)));
      }
      CHECK(worst <= 1e-7);
    }
  }
}

TEST_CASE("Huang with theta=1/2, dp/2=1, M=I is half of Winslow") {
  std::mt19937_64 rng(5);
  for (int d : {2, 3}) {
    const FunctionalSpec huang = FunctionalSpec::huang(2.0 / d, 0.5);
    for (int trial = 0; trial < 25; ++trial) {
      const Mat jac = testsup::random_nonsingular(rng, d, 0.2);
      const double g_h = eval_g_value(huang, jac, jac.det(), Mat::identity(d));
      const double g_w = eval_g_value(FunctionalSpec::winslow(), jac, jac.det(), Mat::identity(d));
      CHECK(g_h == doctest::Approx(0.5 * g_w).epsilon(1e-14));
    }
  }
}

TEST_CASE("G scaling law under M -> c M") {
  std::mt19937_64 rng(6);
  for (int d : {2, 3}) {
    for (double c : {0.1, 7.0}) {
      for (int trial = 0; trial < 10; ++trial) {
        Mat jac = testsup::random_nonsingular(rng, d, 0.2);
        if (jac.det() < 0.0)
          for (int j = 0; j < d; ++j) jac(0, j) = -jac(0, j);
        const Mat metric = testsup::random_spd(rng, d, 0.2);

        const double w0 = eval_g_value(FunctionalSpec::winslow(), jac, jac.det(), metric);
        const double w1 = eval_g_value(FunctionalSpec::winslow(), jac, jac.det(), c * metric);
        CHECK(w1 == doctest::Approx(w0 / c).epsilon(1e-12));

        const double p = 1.5;
        const FunctionalSpec spec = FunctionalSpec::huang(p, 1.0 / 3.0);
        const double h0 = eval_g_value(spec, jac, jac.det(), metric);
        const double h1 = eval_g_value(spec, jac, jac.det(), c * metric);
        CHECK(h1 == doctest::Approx(std::pow(c, d * (1.0 - p) / 2.0) * h0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("non-SPD metric is rejected") {
  CHECK_THROWS_AS(eval_g(FunctionalSpec::winslow(), Mat::identity(2), 1.0, Mat::diag(1.0, -2.0), Vec(2)),
                  NonSPDMetric);
}
