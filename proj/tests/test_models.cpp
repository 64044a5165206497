#include <cmath>

#include "doctest.h"
#include "pflab/grid.hpp"
#include "pflab/models.hpp"
#include "support.hpp"

using namespace pflab;

namespace {

Mat ma1_c() {
  Mat c(2, 2);
  c << cd(0.5, 0.0), cd(0.2, 0.0), cd(0.0, 0.0), cd(0.3, 0.0);
  return c;
}

std::vector<DensityModel> shipped_models() {
  return {
      DensityModel::white_noise(2),
      DensityModel::ma_factor({Mat::Identity(2, 2), ma1_c()}),
      DensityModel::scalar_weight(Mat::Identity(2, 2)),
      DensityModel::stacked_shift(DensityModel::white_noise(1)),
  };
}

}  // namespace

TEST_CASE("construction rejects ill-posed parameters") {
  CHECK_THROWS_AS(DensityModel::white_noise(0), std::invalid_argument);
  Mat singular = Mat::Zero(2, 2);
  CHECK_THROWS_AS(DensityModel::ma_factor({singular}), std::invalid_argument);
  CHECK_THROWS_AS(DensityModel::scalar_weight(singular), std::invalid_argument);
  CHECK_THROWS_AS(DensityModel::stacked_shift(DensityModel::white_noise(2)),
                  std::invalid_argument);
}

TEST_CASE("evaluate: white noise is the identity") {
  const auto m = DensityModel::white_noise(3);
  CHECK((m.evaluate(0.7) - Mat::Identity(3, 3)).norm() == 0.0);
}

TEST_CASE("evaluate: moving-average density at theta = 0 is (I+C)(I+C)*") {
  const Mat c = ma1_c();
  const auto m = DensityModel::ma_factor({Mat::Identity(2, 2), c});
  const Mat expected = (Mat::Identity(2, 2) + c) * (Mat::Identity(2, 2) + c).adjoint();
  CHECK((m.evaluate(0.0) - expected).norm() <= 1e-14);
}

TEST_CASE("evaluate: half-power weight at theta = 0 is 2 B B*") {
  const auto m = DensityModel::scalar_weight(Mat::Identity(2, 2));
  CHECK((m.evaluate(0.0) - 2.0 * Mat::Identity(2, 2)).norm() <= 1e-14);
}

TEST_CASE("evaluate: stacked shift density and its pointwise singularity") {
  const auto m = DensityModel::stacked_shift(DensityModel::white_noise(1));
  Mat expected(2, 2);
  expected << cd(1, 0), cd(0, 1), cd(0, -1), cd(1, 0);
  CHECK((m.evaluate(kPi / 2.0) - expected).norm() <= 1e-14);
  for (double th : testsupport::random_angles(1024, 11))
    CHECK(std::abs(m.evaluate(th).determinant()) <= 1e-12);
}

TEST_CASE("every variant evaluates to a Hermitian PSD matrix") {
  for (const auto& m : shipped_models()) {
    for (double th : testsupport::random_angles(1024, 23)) {
      const Mat w = m.evaluate(th);
      CHECK(hermitian_defect(w) <= 1e-12 * std::max(1.0, w.norm()));
      CHECK(min_eig_hermitian(w) >= -1e-10);
    }
  }
}

TEST_CASE("autocovariance: moving average closed form") {
  const Mat c = ma1_c();
  const auto m = DensityModel::ma_factor({Mat::Identity(2, 2), c});
  Mat g0(2, 2);
  g0 << cd(1.29, 0), cd(0.06, 0), cd(0.06, 0), cd(1.09, 0);
  CHECK((m.autocovariance(0) - g0).norm() <= 1e-14);
  CHECK((m.autocovariance(1) - c).norm() <= 1e-14);
  CHECK(m.autocovariance(2).norm() == 0.0);
  CHECK((m.autocovariance(-1) - c.adjoint()).norm() == 0.0);
}

TEST_CASE("autocovariance: half-power weight closed form") {
  const auto m = DensityModel::scalar_weight(Mat::Identity(1, 1));
  CHECK(m.autocovariance(0)(0, 0).real() == doctest::Approx(4.0 / kPi).epsilon(1e-15));
  CHECK(m.autocovariance(1)(0, 0).real() ==
        doctest::Approx(4.0 / (3.0 * kPi)).epsilon(1e-15));
  for (long k = 0; k <= 8; ++k) {
    const double expected =
        4.0 / kPi * ((k % 2 == 0) ? -1.0 : 1.0) / (4.0 * k * k - 1.0);
    CHECK(m.autocovariance(k)(0, 0).real() == doctest::Approx(expected).epsilon(1e-15));
    CHECK(m.autocovariance(k)(0, 0).imag() == 0.0);
  }
}

TEST_CASE("autocovariance: stacked shift over unit white noise") {
  const auto m = DensityModel::stacked_shift(DensityModel::white_noise(1));
  CHECK((m.autocovariance(0) - Mat::Identity(2, 2)).norm() == 0.0);
  // Gamma(1) = E[X(n+1) X(n)*]: the only unit entry couples X_1(n+1) = Y(n)
  // with X_2(n) = Y(n).
  Mat g1 = Mat::Zero(2, 2);
  g1(0, 1) = 1.0;
  CHECK((m.autocovariance(1) - g1).norm() == 0.0);
  CHECK((m.autocovariance(-1) - g1.adjoint()).norm() == 0.0);
  CHECK(m.autocovariance(2).norm() == 0.0);
  // shared-variable coupling: E[X_2(-1) conj X_1(0)] = Gamma(-1)(1,0) = 1
  CHECK(m.autocovariance(-1)(1, 0) == cd(1.0, 0.0));
}

TEST_CASE("autocovariance: stacked shift over a scalar moving average") {
  const auto base = DensityModel::ma_factor({Mat::Identity(1, 1),
                                             0.5 * Mat::Identity(1, 1)});
  const auto m = DensityModel::stacked_shift(base);
  const auto gy = [&](long k) { return base.autocovariance(k)(0, 0); };
  for (long k = -3; k <= 3; ++k) {
    Mat expected(2, 2);
    expected << gy(k), gy(k - 1), gy(k + 1), gy(k);
    CHECK((m.autocovariance(k) - expected).norm() == 0.0);
  }
}

TEST_CASE("closed-form autocovariances agree with grid quadrature") {
  for (const auto& m : shipped_models()) {
    const auto seq = fourier_coeffs(make_grid(m, 14), 8);
    for (long k = -8; k <= 8; ++k)
      CHECK((seq.gamma(k) - m.autocovariance(k)).norm() <= 1e-6);
  }
}

TEST_CASE("autocov_seq mirrors negative lags exactly") {
  const auto m = DensityModel::ma_factor({Mat::Identity(2, 2), ma1_c()});
  const auto seq = m.autocov_seq(4);
  CHECK(seq.max_lag() == 4);
  for (long k = 1; k <= 4; ++k)
    CHECK((seq.gamma(-k) - seq.gamma(k).adjoint()).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(seq.gamma(5), std::invalid_argument);
}

TEST_CASE("transposed models evaluate to the pointwise transpose") {
  for (const auto& m : shipped_models()) {
    const auto t = m.transposed();
    for (double th : testsupport::random_angles(16, 37))
      CHECK((t.evaluate(th) - m.evaluate(th).transpose()).norm() <= 1e-14);
    for (long k = -4; k <= 4; ++k)
      CHECK((t.autocovariance(k) - m.autocovariance(k).transpose()).norm() == 0.0);
    const auto tt = t.transposed();
    for (double th : testsupport::random_angles(8, 41))
      CHECK((tt.evaluate(th) - m.evaluate(th)).norm() == 0.0);
  }
  CHECK(DensityModel::white_noise(2).transposed().kind() == ModelKind::WhiteNoise);
  // the stacked-shift transpose swaps the off-diagonal phases
  const auto s = DensityModel::stacked_shift(DensityModel::white_noise(1));
  const Mat w = s.transposed().evaluate(0.3);
  CHECK(w(0, 1) == std::conj(s.evaluate(0.3)(0, 1)));
}

TEST_CASE("analytic half-power factor") {
  const Mat b2 = Mat::Identity(2, 2);
  SUBCASE("value at the origin is B") {
    Mat b(2, 2);
    b << cd(1, 0), cd(1, 0), cd(0, 0), cd(1, 0);
    CHECK((scalar_weight_factor(b, cd(0, 0)) - b).norm() == 0.0);
  }
  SUBCASE("value at z = 1") {
    CHECK((scalar_weight_factor(b2, cd(1, 0)) - std::sqrt(2.0) * b2).norm() <= 1e-15);
  }
  SUBCASE("branch point is rejected") {
    CHECK_THROWS_AS(scalar_weight_factor(b2, cd(-1, 0)), std::domain_error);
  }
  SUBCASE("factor reproduces the density on the circle") {
    Mat b(2, 2);
    b << cd(1, 0), cd(1, 0), cd(0, 0), cd(1, 0);
    const auto m = DensityModel::scalar_weight(b);
    for (double th : testsupport::random_angles(1024, 53)) {
      const Mat h = scalar_weight_factor(b, std::polar(1.0, th));
      CHECK((h * h.adjoint() - m.evaluate(th)).norm() <= 1e-10);
    }
  }
  SUBCASE("companion factor closes the two-sided product") {
    Mat b(2, 2);
    b << cd(1, 0), cd(1, 0), cd(0, 0), cd(1, 0);
    const auto m = DensityModel::scalar_weight(b);
    for (double th : testsupport::random_angles(64, 59)) {
      const Mat hs = scalar_weight_factor(b, std::polar(1.0, th), FactorSide::Companion);
      CHECK((hs.adjoint() * hs - m.evaluate(th)).norm() <= 1e-10);
    }
  }
  SUBCASE("phase quotient is e^{i theta/2} I") {
    Mat b(2, 2);
    b << cd(2, 0), cd(0.5, 0.5), cd(0, 0), cd(1, 0);
    for (double th : {kPi / 2.0, -1.1, 0.4}) {
      const cd z = std::polar(1.0, th);
      const Mat h = scalar_weight_factor(b, z);
      const Mat hs = scalar_weight_factor(b, z, FactorSide::Companion);
      const Mat phi = hs.adjoint().inverse() * h;
      const Mat expected = std::polar(1.0, th / 2.0) * Mat::Identity(2, 2);
      CHECK((phi - expected).norm() <= 1e-12);
    }
  }
}
