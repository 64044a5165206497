#pragma once

// Independent oracles shared by the test suite. Everything here is written
// against the definitions directly (long-double quadrature, explicit
// convolutions, explicit white-noise coordinates) so that library results are
// checked by a second route, not by themselves.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <utility>
#include <vector>

#include "pflab/linalg.hpp"
#include "pflab/models.hpp"

namespace testsupport {

using pflab::cd;
using pflab::Mat;

// Midpoint mean over [-pi, pi) with n cells (n deliberately not a power of
// two) accumulated in long double: the reference value for grid integrals.
inline double reference_mean(const std::function<double(double)>& f, long n) {
  const long double pi = 3.141592653589793238462643383279502884L;
  const long double step = 2.0L * pi / static_cast<long double>(n);
  long double sum = 0.0L;
  for (long j = 0; j < n; ++j) {
    const long double th = -pi + (static_cast<long double>(j) + 0.5L) * step;
    sum += static_cast<long double>(f(static_cast<double>(th)));
  }
  return static_cast<double>(sum / static_cast<long double>(n));
}

// Autocovariance of a moving-average filter by direct convolution:
// Gamma(k) = sum_j t_{j+k} t_j^* for k >= 0, adjoint mirror below.
inline Mat conv_autocov(const std::vector<Mat>& t, long k) {
  const auto q = t[0].rows();
  if (k < 0) return conv_autocov(t, -k).adjoint().eval();
  Mat g = Mat::Zero(q, q);
  for (size_t j = 0; j + static_cast<size_t>(k) < t.size(); ++j)
    g += t[j + static_cast<size_t>(k)] * t[j].adjoint();
  return g;
}

// Taylor coefficients of (1+z)^{1/2}: 1, 1/2, -1/8, 1/16, -5/128, ...
inline std::vector<double> sqrt1p_series(int n) {
  std::vector<double> c(static_cast<size_t>(n) + 1);
  c[0] = 1.0;
  for (int j = 1; j <= n; ++j)
    c[static_cast<size_t>(j)] =
        c[static_cast<size_t>(j - 1)] * (0.5 - (j - 1)) / j;
  return c;
}

inline std::vector<double> random_angles(int count, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-pflab::kPi, pflab::kPi);
  std::vector<double> out(static_cast<size_t>(count));
  for (auto& a : out) a = dist(rng);
  return out;
}

inline Mat random_complex_matrix(int rows, int cols, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = cd(dist(rng), dist(rng));
  return m;
}

// Explicit white-noise coordinates of the generators of a moving-average
// process X(k) = sum_m theta[m] xi(k-m): one column per generator, lag-major
// with components inside, over the xi slots [t_lo, t_hi]. Two embeddings are
// comparable only when built over the same slot range; Euclidean geometry on
// these columns then reproduces the weighted geometry exactly.
inline Mat ma_embedding(const std::vector<Mat>& theta,
                        const std::vector<long>& lags, long t_lo, long t_hi) {
  const long deg = static_cast<long>(theta.size()) - 1;
  const auto q = theta[0].rows();
  const auto qx = theta[0].cols();
  const long slots = t_hi - t_lo + 1;
  Mat e = Mat::Zero(slots * qx, static_cast<long>(lags.size()) * q);
  for (size_t a = 0; a < lags.size(); ++a)
    for (long i = 0; i < q; ++i)
      for (long m = 0; m <= deg; ++m) {
        const long t = lags[a] - m;
        e.block((t - t_lo) * qx, static_cast<long>(a) * q + i, qx, 1) =
            theta[static_cast<size_t>(m)].row(i).transpose();
      }
  return e;
}

// Coordinates for the stacked pair X(k) = (Y(k-1), Y(k)) over a unit scalar
// white noise Y, on the shared slot range [t_lo, t_hi].
inline Mat stacked_embedding(const std::vector<long>& lags, long t_lo,
                             long t_hi) {
  Mat e = Mat::Zero(t_hi - t_lo + 1, static_cast<long>(lags.size()) * 2);
  for (size_t a = 0; a < lags.size(); ++a) {
    e(lags[a] - 1 - t_lo, static_cast<long>(a) * 2) = 1.0;
    e(lags[a] - t_lo, static_cast<long>(a) * 2 + 1) = 1.0;
  }
  return e;
}

// Principal-angle cosines between the column spans of two coordinate
// matrices, by orthonormalizing each side and taking singular values.
inline std::vector<double> euclid_cosines(const Mat& ea, const Mat& eb) {
  const auto basis = [](const Mat& m) {
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    long rank = 0;
    while (rank < s.size() && s(rank) > 1e-12 * s(0)) ++rank;
    return Mat(svd.matrixU().leftCols(rank));
  };
  const Mat qa = basis(ea);
  const Mat qb = basis(eb);
  Eigen::JacobiSVD<Mat> svd(qa.adjoint() * qb);
  std::vector<double> out(static_cast<size_t>(svd.singularValues().size()));
  for (size_t t = 0; t < out.size(); ++t)
    out[t] = std::min(svd.singularValues()(static_cast<long>(t)), 1.0);
  return out;
}

// One-step predictor coefficients and error covariance by a direct dense
// solve of the block normal equations sum_k A_k Gamma(l-k) = Gamma(l).
inline std::pair<std::vector<Mat>, Mat> dense_predictor(
    const std::function<Mat(long)>& gamma, long q, int order) {
  Mat m(order * q, order * q);
  Mat rhs(q, order * q);
  for (long k = 1; k <= order; ++k) {
    rhs.middleCols((k - 1) * q, q) = gamma(k);
    for (long l = 1; l <= order; ++l)
      m.block((k - 1) * q, (l - 1) * q, q, q) = gamma(l - k);
  }
  const Mat a = m.transpose()
                    .partialPivLu()
                    .solve(rhs.transpose())
                    .transpose();
  Mat v = gamma(0);
  std::vector<Mat> coeffs(static_cast<size_t>(order));
  for (long k = 1; k <= order; ++k) {
    coeffs[static_cast<size_t>(k - 1)] = a.middleCols((k - 1) * q, q);
    v -= coeffs[static_cast<size_t>(k - 1)] * gamma(-k);
  }
  return {coeffs, v};
}

}  // namespace testsupport
