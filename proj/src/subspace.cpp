#include "pflab/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pflab {
namespace {

// Matrix of the coefficient-side quadratic form: with block (r, c) =
// conj(Gamma(rows[r] - cols[c])), a vector u over the col basis and v over
// the row basis satisfy (u, v)_w = v^H Q u. For equal index sets this is the
// entrywise conjugate of the documented Gram arrangement; both are Hermitian
// PSD, but only this one sandwiches plain coefficient vectors.
Mat quad_gram(const AutocovSeq& seq, const std::vector<long>& rows,
              const std::vector<long>& cols) {
  const long q = seq.dim();
  const long lo = std::min(rows.front(), cols.front());
  const long hi = std::max(rows.back(), cols.back());
  if (hi - lo > seq.max_lag())
    throw std::invalid_argument(
        "subspace: stored autocovariance lags do not cover the window");
  Mat m(q * static_cast<long>(rows.size()), q * static_cast<long>(cols.size()));
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < cols.size(); ++c)
      m.block(static_cast<long>(r) * q, static_cast<long>(c) * q, q, q) =
          seq.gamma(rows[r] - cols[c]).conjugate();
  return m;
}

struct Whitening {
  Mat e;          // columns: coordinates of an orthonormal basis of the span
  int rank = 0;
  bool unstable = false;
  double lambda_max = 0.0;
};

// Rank-truncated inverse square root of a Hermitian PSD form. The cutoff is
// relative to the top eigenvalue; anything within a factor 10 of it marks
// the rank decision as unstable.
Whitening whiten(const Mat& g, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(g);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("subspace: eigendecomposition failed");
  Whitening out;
  out.lambda_max = std::max(0.0, eig.eigenvalues().maxCoeff());
  if (out.lambda_max == 0.0) {
    out.e = Mat(g.rows(), 0);
    return out;
  }
  const double thr = tol * out.lambda_max;
  std::vector<long> keep;
  for (long t = 0; t < eig.eigenvalues().size(); ++t) {
    const double lam = eig.eigenvalues()(t);
    if (lam > thr) keep.push_back(t);
    if (lam >= thr / 10.0 && lam <= thr * 10.0) out.unstable = true;
  }
  out.rank = static_cast<int>(keep.size());
  out.e = Mat(g.rows(), out.rank);
  for (size_t t = 0; t < keep.size(); ++t)
    out.e.col(static_cast<long>(t)) =
        eig.eigenvectors().col(keep[t]) /
        std::sqrt(eig.eigenvalues()(keep[t]));
  return out;
}

std::vector<long> merge_lags(const std::vector<long>& a,
                             const std::vector<long>& b) {
  std::vector<long> u;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(u));
  return u;
}

// Positions of each lag of `sub` inside the sorted union lag list.
std::vector<long> positions(const std::vector<long>& sub,
                            const std::vector<long>& all) {
  std::vector<long> pos(sub.size());
  for (size_t t = 0; t < sub.size(); ++t)
    pos[t] = std::lower_bound(all.begin(), all.end(), sub[t]) - all.begin();
  return pos;
}

Vec scatter(const Vec& coeffs, const std::vector<long>& pos, long q,
            long union_size) {
  Vec out = Vec::Zero(q * union_size);
  for (size_t t = 0; t < pos.size(); ++t)
    out.segment(pos[t] * q, q) = coeffs.segment(static_cast<long>(t) * q, q);
  return out;
}

void require_nonempty(const IndexSet& a, const IndexSet& b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("subspace: index sets must be nonempty");
}

double quad_norm(const Mat& g, const Vec& x) {
  return std::sqrt(std::max(0.0, (x.adjoint() * g * x)(0, 0).real()));
}

}  // namespace

IndexSet::IndexSet(std::vector<long> lags) : lags_(std::move(lags)) {
  std::sort(lags_.begin(), lags_.end());
  lags_.erase(std::unique(lags_.begin(), lags_.end()), lags_.end());
}

IndexSet IndexSet::range(long lo, long hi) {
  if (lo > hi) throw std::invalid_argument("IndexSet::range: lo > hi");
  std::vector<long> lags(static_cast<size_t>(hi - lo + 1));
  for (size_t t = 0; t < lags.size(); ++t) lags[t] = lo + static_cast<long>(t);
  return IndexSet(std::move(lags));
}

GramBlockToeplitz gram(const AutocovSeq& autocov, long lag_lo, long lag_hi) {
  if (lag_lo > lag_hi)
    throw std::invalid_argument("gram: empty lag window");
  if (lag_hi - lag_lo > autocov.max_lag())
    throw std::invalid_argument(
        "gram: stored autocovariance lags do not cover the window");
  const long q = autocov.dim();
  const long w = lag_hi - lag_lo + 1;
  GramBlockToeplitz out;
  out.q = static_cast<int>(q);
  out.lag_lo = lag_lo;
  out.lag_hi = lag_hi;
  out.matrix = Mat(q * w, q * w);
  for (long r = 0; r < w; ++r)
    for (long c = 0; c < w; ++c)
      out.matrix.block(r * q, c * q, q, q) = autocov.gamma(r - c);
  return out;
}

PrincipalAngleReport principal_angles(const IndexSet& a, const IndexSet& b,
                                      const AutocovSeq& autocov, double tol) {
  require_nonempty(a, b);
  const auto wa = whiten(quad_gram(autocov, a.lags(), a.lags()), tol);
  const auto wb = whiten(quad_gram(autocov, b.lags(), b.lags()), tol);
  const Mat cross =
      wb.e.adjoint() * quad_gram(autocov, b.lags(), a.lags()) * wa.e;
  Eigen::JacobiSVD<Mat> svd(cross);
  PrincipalAngleReport rep;
  rep.rank_a = wa.rank;
  rep.rank_b = wb.rank;
  rep.tol = tol;
  rep.rank_unstable = wa.unstable || wb.unstable;
  rep.cosines.resize(static_cast<size_t>(svd.singularValues().size()));
  for (size_t t = 0; t < rep.cosines.size(); ++t)
    rep.cosines[t] = svd.singularValues()(static_cast<long>(t));
  return rep;
}

IntersectionCertificate intersection(const IndexSet& a, const IndexSet& b,
                                     const AutocovSeq& autocov, double tol) {
  require_nonempty(a, b);
  const long q = autocov.dim();
  IntersectionCertificate cert;
  cert.union_lags = merge_lags(a.lags(), b.lags());
  const Mat gu = quad_gram(autocov, cert.union_lags, cert.union_lags);
  const auto wa = whiten(quad_gram(autocov, a.lags(), a.lags()), tol);
  const auto wb = whiten(quad_gram(autocov, b.lags(), b.lags()), tol);
  const auto wu = whiten(gu, tol);
  cert.rank_a = wa.rank;
  cert.rank_b = wb.rank;
  cert.rank_union = wu.rank;
  cert.dim = std::max(0, wa.rank + wb.rank - wu.rank);
  cert.unstable = wa.unstable || wb.unstable || wu.unstable;

  const Mat cross =
      wb.e.adjoint() * quad_gram(autocov, b.lags(), a.lags()) * wa.e;
  Eigen::JacobiSVD<Mat> svd(cross, Eigen::ComputeThinU | Eigen::ComputeThinV);
  std::vector<long> pairs;
  for (long t = 0; t < svd.singularValues().size(); ++t)
    if (svd.singularValues()(t) >= 1.0 - kCosineOne) pairs.push_back(t);
  if (static_cast<int>(pairs.size()) != cert.dim) cert.unstable = true;

  const long usize = static_cast<long>(cert.union_lags.size());
  const auto pos_a = positions(a.lags(), cert.union_lags);
  const auto pos_b = positions(b.lags(), cert.union_lags);
  cert.basis = Mat(q * usize, static_cast<long>(pairs.size()));
  cert.residual = 0.0;
  for (size_t t = 0; t < pairs.size(); ++t) {
    const Vec xa =
        scatter(wa.e * svd.matrixV().col(pairs[t]), pos_a, q, usize);
    const Vec xb =
        scatter(wb.e * svd.matrixU().col(pairs[t]), pos_b, q, usize);
    cert.basis.col(static_cast<long>(t)) = xa;
    cert.residual = std::max(cert.residual, quad_norm(gu, xa - xb));
  }
  return cert;
}

std::vector<CndRow> cnd_profile(const DensityModel& model,
                                const std::vector<int>& horizons,
                                double tol) {
  if (horizons.empty())
    throw std::invalid_argument("cnd_profile: no horizons requested");
  const int max_n = *std::max_element(horizons.begin(), horizons.end());
  if (*std::min_element(horizons.begin(), horizons.end()) < 1)
    throw std::invalid_argument("cnd_profile: horizons must be positive");
  const auto seq = model.autocov_seq(2 * max_n);
  std::vector<CndRow> rows;
  rows.reserve(horizons.size());
  for (int n : horizons) {
    const auto past = IndexSet::range(-n, -1);
    const auto future = IndexSet::range(0, n);
    const auto rep = principal_angles(past, future, seq, tol);
    const auto cert = intersection(past, future, seq, tol);
    CndRow row;
    row.horizon = n;
    row.cos1 = rep.cosines.empty() ? 0.0 : rep.cosines[0];
    row.cos2 = rep.cosines.size() > 1 ? rep.cosines[1] : 0.0;
    row.dim = cert.dim;
    row.residual = cert.residual;
    rows.push_back(row);
  }
  return rows;
}

IpfCheckResult ipf_finite_check(const DensityModel& model, int n, int horizon,
                                double tol) {
  if (n < 1 || horizon <= n)
    throw std::invalid_argument(
        "ipf_finite_check: need 1 <= n < horizon");
  const long q = model.dim();
  const auto seq = model.autocov_seq(2 * horizon);
  const auto past = IndexSet::range(-horizon, -1);
  const auto window = IndexSet::range(-n, horizon);

  IpfCheckResult res;
  res.certificate = intersection(past, window, seq, tol);
  res.dim = res.certificate.dim;
  res.expected_dim = static_cast<int>(q) * n;
  res.rank_union = res.certificate.rank_union;
  res.expected_rank = static_cast<int>(q) * (2 * horizon + 1);

  if (res.certificate.unstable) {
    res.reason = "UNSTABLE";
    return res;
  }
  if (res.rank_union < res.expected_rank) {
    res.reason = "RANK_DEFICIENT";
    return res;
  }
  if (res.dim != res.expected_dim) {
    res.reason = "DIMENSION_MISMATCH";
    return res;
  }

  // Sines between each certified vector and the middle block [-n..-1]: the
  // residual of the projection is formed as an explicit coordinate vector,
  // so its Gram norm is quadratically small instead of flooring at the
  // square root of machine precision like a norm-identity difference would.
  const auto& ulags = res.certificate.union_lags;
  const Mat gu = quad_gram(seq, ulags, ulags);
  const auto middle = IndexSet::range(-n, -1);
  const Mat gw = quad_gram(seq, middle.lags(), middle.lags());
  const Mat cwu = quad_gram(seq, middle.lags(), ulags);
  const auto pos_w = positions(middle.lags(), ulags);
  const auto solver = gw.ldlt();
  for (long t = 0; t < res.certificate.basis.cols(); ++t) {
    const Vec v = res.certificate.basis.col(t);
    const double vnorm2 = (v.adjoint() * gu * v)(0, 0).real();
    const Vec c = solver.solve(cwu * v);
    Vec d = v;
    for (size_t s = 0; s < pos_w.size(); ++s)
      d.segment(pos_w[s] * q, q) -= c.segment(static_cast<long>(s) * q, q);
    const double res2 = (d.adjoint() * gu * d)(0, 0).real();
    res.max_sine =
        std::max(res.max_sine, std::sqrt(std::max(0.0, res2) / vnorm2));
  }
  if (res.max_sine >= kCoincidenceTol) {
    res.reason = "MISALIGNED";
    return res;
  }
  res.pass = true;
  return res;
}

AlternatingTrace alternating_projections(const IndexSet& a, const IndexSet& b,
                                         const AutocovSeq& autocov,
                                         const Vec& start, int iters,
                                         double tol) {
  require_nonempty(a, b);
  if (iters < 0)
    throw std::invalid_argument("alternating_projections: negative iters");
  const long q = autocov.dim();
  AlternatingTrace trace;
  trace.union_lags = merge_lags(a.lags(), b.lags());
  const long usize = static_cast<long>(trace.union_lags.size());
  if (start.size() != q * usize)
    throw std::invalid_argument(
        "alternating_projections: start must have q * |union| coordinates");
  const Mat gu = quad_gram(autocov, trace.union_lags, trace.union_lags);
  const auto wa = whiten(quad_gram(autocov, a.lags(), a.lags()), tol);
  const auto wb = whiten(quad_gram(autocov, b.lags(), b.lags()), tol);
  const Mat ca = quad_gram(autocov, a.lags(), trace.union_lags);
  const Mat cb = quad_gram(autocov, b.lags(), trace.union_lags);
  const auto pos_a = positions(a.lags(), trace.union_lags);
  const auto pos_b = positions(b.lags(), trace.union_lags);

  Vec x = start;
  trace.norms.push_back(quad_norm(gu, x));
  for (int m = 0; m < iters; ++m) {
    x = scatter(wb.e * (wb.e.adjoint() * (cb * x)), pos_b, q, usize);
    x = scatter(wa.e * (wa.e.adjoint() * (ca * x)), pos_a, q, usize);
    trace.norms.push_back(quad_norm(gu, x));
  }
  trace.final_coords = x;
  return trace;
}

FinitePredictor finite_predictor(const AutocovSeq& autocov, int order) {
  if (order < 1)
    throw std::invalid_argument("finite_predictor: order must be positive");
  const auto gamma = [&autocov](long k) -> Mat {
    if (std::labs(k) > autocov.max_lag()) return Mat::Zero(autocov.dim(),
                                                           autocov.dim());
    return autocov.gamma(k);
  };
  const double scale = autocov.gamma(0).norm();
  const auto check_invertible = [&](const Mat& v, int at) {
    Eigen::SelfAdjointEigenSolver<Mat> eig(v);
    if (eig.eigenvalues().minCoeff() <= 1e-12 * scale)
      throw std::runtime_error(
          "finite_predictor: prediction error covariance is singular at "
          "order " +
          std::to_string(at));
  };

  FinitePredictor out;
  std::vector<Mat> fwd;   // forward coefficients A_1..A_m
  std::vector<Mat> bwd;   // backward coefficients B_1..B_m
  Mat v = autocov.gamma(0);
  Mat w = v;
  for (int m = 0; m < order; ++m) {
    Mat delta = gamma(m + 1);
    for (int k = 1; k <= m; ++k)
      delta -= fwd[static_cast<size_t>(k - 1)] * gamma(m + 1 - k);
    check_invertible(w, m);
    check_invertible(v, m);
    const Mat af = w.ldlt().solve(delta.adjoint()).adjoint();
    const Mat bb = v.ldlt().solve(delta).adjoint();
    std::vector<Mat> nfwd(static_cast<size_t>(m) + 1);
    std::vector<Mat> nbwd(static_cast<size_t>(m) + 1);
    for (int k = 1; k <= m; ++k) {
      nfwd[static_cast<size_t>(k - 1)] =
          fwd[static_cast<size_t>(k - 1)] -
          af * bwd[static_cast<size_t>(m - k)];
      nbwd[static_cast<size_t>(k - 1)] =
          bwd[static_cast<size_t>(k - 1)] -
          bb * fwd[static_cast<size_t>(m - k)];
    }
    nfwd[static_cast<size_t>(m)] = af;
    nbwd[static_cast<size_t>(m)] = bb;
    fwd = std::move(nfwd);
    bwd = std::move(nbwd);
    v -= af * delta.adjoint();
    w -= bb * delta;
    v = ((v + v.adjoint()) / 2.0).eval();
    w = ((w + w.adjoint()) / 2.0).eval();
    out.error_trace.push_back(v);
  }
  out.coeffs = std::move(fwd);
  out.error_cov = v;
  return out;
}

}  // namespace pflab
