#include "pflab/factorization.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "pflab/grid.hpp"

namespace pflab {

namespace {

Mat gamma_or_zero(const AutocovSeq& seq, long k) {
  if (std::abs(k) > seq.max_lag()) return Mat::Zero(seq.dim(), seq.dim());
  return seq.gamma(k);
}

// Inverse Hermitian square root of I - K K* (resp. I - K* K). These stay
// positive definite exactly as long as the Toeplitz matrix does, so a
// non-positive eigenvalue is the degeneracy signal of the recursion.
Mat inv_sqrt_contraction(const Mat& m, int step) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()));
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 1e-13)
    throw NotFactorizableError(
        "factorization step " + std::to_string(step) +
        " lost positivity: the density does not have maximal rank");
  return es.eigenvectors() *
         es.eigenvalues().cwiseSqrt().cwiseInverse().cast<cd>().asDiagonal() *
         es.eigenvectors().adjoint();
}

void precheck_positive(const AutocovSeq& seq, int order, double tol) {
  const int q = seq.dim();
  const int w = std::min(16, order);
  Mat t = Mat::Zero((w + 1) * q, (w + 1) * q);
  for (int i = 0; i <= w; ++i)
    for (int j = 0; j <= w; ++j)
      t.block(i * q, j * q, q, q) = gamma_or_zero(seq, i - j);
  Eigen::SelfAdjointEigenSolver<Mat> es(t);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > tol * hi))
    throw NotFactorizableError(
        "block Toeplitz matrix of the autocovariance is numerically "
        "singular: the density does not have maximal rank");
}

// Last block row of the Cholesky factor of the order-n block Toeplitz matrix,
// reversed into coefficient order: out[d] = L(n, n-d).
//
// Generalized Schur recursion on T - Z T Z* = A A* - B B* with generators
// A_0 = chol(Gamma(0)), A_i = Gamma(i) A_0^{-*}, B_0 = 0, B_i = A_i. Each
// step eliminates the pivot row of B with a J-unitary rotation, records the
// proper generator column as the Cholesky column, and shifts A down one
// block. The shift is implicit: A is stored relative to the pivot, so slot t
// holds logical row j + t at step j and never moves. Only min(band, n) + 1
// slots are ever live, which is what makes banded sequences cheap.
std::vector<Mat> schur_last_row(const AutocovSeq& seq, const int n) {
  const int q = seq.dim();
  const int band = std::min(seq.max_lag(), n);

  Mat r0;
  try {
    r0 = chol_lower(seq.gamma(0));
  } catch (const std::runtime_error&) {
    throw NotFactorizableError(
        "lag-zero covariance is not positive definite: the density does "
        "not have maximal rank");
  }

  Mat ahat = Mat::Zero((band + 1) * q, q);
  Mat bmat = Mat::Zero((n + 1) * q, q);
  ahat.topRows(q) = r0;
  for (int t = 1; t <= band; ++t) {
    // Gamma(t) r0^{-*} via one triangular solve.
    const Mat x = r0.triangularView<Eigen::Lower>()
                      .solve(seq.gamma(t).adjoint())
                      .adjoint();
    ahat.middleRows(t * q, q) = x;
    bmat.middleRows(t * q, q) = x;
  }

  std::vector<Mat> row(static_cast<size_t>(n) + 1, Mat::Zero(q, q));
  const Mat eye = Mat::Identity(q, q);
  for (int j = 0; j <= n; ++j) {
    const int hi = std::min(n, band + j);
    const int wq = (hi - j + 1) * q;

    const Mat alpha = ahat.topRows(q);
    const Mat beta = bmat.middleRows(j * q, q);
    const Mat k = alpha.partialPivLu().solve(beta);
    if (!k.allFinite())
      throw NotFactorizableError(
          "factorization step " + std::to_string(j) +
          " produced a singular pivot: the density does not have maximal "
          "rank");
    const Mat p = inv_sqrt_contraction(eye - k * k.adjoint(), j);
    const Mat qmat = inv_sqrt_contraction(eye - k.adjoint() * k, j);
    const Mat pv =
        p * lower_positive_gauge((alpha - beta * k.adjoint()) * p);

    const Mat a_slab = ahat.topRows(wq);
    const Mat b_slab = bmat.middleRows(j * q, wq);
    ahat.topRows(wq) = (a_slab - b_slab * k.adjoint()) * pv;
    bmat.middleRows(j * q, wq) = (b_slab - a_slab * k) * qmat;

    if (hi == n) row[static_cast<size_t>(j)] = ahat.middleRows(wq - q, q);
  }

  std::vector<Mat> coeffs(static_cast<size_t>(n) + 1);
  for (int d = 0; d <= n; ++d)
    coeffs[static_cast<size_t>(d)] = row[static_cast<size_t>(n - d)];
  return coeffs;
}

double sup_block_change(const std::vector<Mat>& prev,
                        const std::vector<Mat>& cur) {
  double dev = 0.0;
  const size_t shared = std::min(prev.size(), cur.size());
  for (size_t d = 0; d < shared; ++d)
    dev = std::max(dev, (prev[d] - cur[d]).norm());
  return dev;
}

Mat eval_series(const std::vector<Mat>& coeffs, double theta) {
  const cd z = std::polar(1.0, theta);
  Mat acc = coeffs.back();
  for (size_t d = coeffs.size() - 1; d-- > 0;) acc = (acc * z + coeffs[d]).eval();
  return acc;
}

Mat eval_autocov_series(const AutocovSeq& seq, double theta) {
  const cd z = std::polar(1.0, theta);
  Mat w = seq.gamma(0);
  cd zk = 1.0;
  for (int k = 1; k <= seq.max_lag(); ++k) {
    zk *= z;
    const Mat term = seq.gamma(k) * zk;
    w += term + term.adjoint();
  }
  return w;
}

}  // namespace

Mat OuterFactor::at(double theta) const { return eval_series(coeffs, theta); }

BauerResult bauer_factorize(const AutocovSeq& autocov,
                            const BauerOptions& opt) {
  if (opt.order < 4 || !is_power_of_two(opt.order))
    throw std::invalid_argument("bauer_factorize: order must be a power of two >= 4");
  if (opt.order_cap < opt.order)
    throw std::invalid_argument("bauer_factorize: order cap below the starting order");
  if (!(opt.tol > 0.0))
    throw std::invalid_argument("bauer_factorize: tolerance must be positive");

  precheck_positive(autocov, opt.order, opt.tol);

  int n = opt.order;
  std::vector<Mat> prev = schur_last_row(autocov, n / 2);
  std::vector<Mat> cur = schur_last_row(autocov, n);
  double change = sup_block_change(prev, cur);
  while (change >= opt.tol && 2 * n <= opt.order_cap) {
    n *= 2;
    prev = std::move(cur);
    cur = schur_last_row(autocov, n);
    change = sup_block_change(prev, cur);
  }

  BauerResult result;
  result.order_used = n;
  result.last_change = change;
  result.slow_convergence = change >= opt.tol;

  // Trailing blocks below roundoff relative to c(0) carry no information.
  const double floor = kFactorTailTruncation * cur[0].norm();
  size_t keep = cur.size();
  while (keep > 1 && cur[keep - 1].norm() <= floor) --keep;
  double tail_sq = 0.0;
  for (size_t d = keep; d < cur.size(); ++d) tail_sq += cur[d].squaredNorm();

  OuterFactor& factor = result.factor;
  factor.q = autocov.dim();
  factor.gauge = FactorGauge::LowerTriangularPositiveDiag;
  factor.coeffs.assign(cur.begin(), cur.begin() + static_cast<long>(keep));
  factor.tail_energy = std::sqrt(tail_sq);

  double residual = 0.0;
  for (double theta : grid_nodes(opt.residual_grid_m)) {
    const Mat h = factor.at(theta);
    residual = std::max(
        residual, (h * h.adjoint() - eval_autocov_series(autocov, theta)).norm());
  }
  factor.residual = residual;
  return result;
}

BauerResult factorize_sharp(const DensityModel& model,
                            const BauerOptions& opt) {
  BauerResult r = bauer_factorize(
      factorization_autocov(model.transposed(), opt.order_cap), opt);
  // w = (g g*)^T pointwise, so h# = g^T satisfies w = h#* h#; transposition
  // leaves every Frobenius-norm diagnostic unchanged.
  for (Mat& c : r.factor.coeffs) c.transposeInPlace();
  r.factor.gauge = FactorGauge::TransposedLower;
  return r;
}

namespace {

// Exact band of the autocovariance sequence, when there is one.
std::optional<int> autocov_band(const DensityModel& model) {
  switch (model.kind()) {
    case ModelKind::WhiteNoise:
      return 0;
    case ModelKind::MAFactor:
      return static_cast<int>(model.ma_coeffs().size()) - 1;
    case ModelKind::StackedShift: {
      const auto inner = autocov_band(model.base());
      if (inner) return *inner + 1;
      return std::nullopt;
    }
    case ModelKind::Transposed:
      return autocov_band(model.base());
    case ModelKind::ScalarWeight:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

AutocovSeq factorization_autocov(const DensityModel& model, int order_cap) {
  if (order_cap < 1)
    throw std::invalid_argument("factorization_autocov: order cap must be positive");
  const auto band = autocov_band(model);
  return model.autocov_seq(band ? std::min(*band, order_cap) : order_cap);
}

OuternessReport verify_outer(const OuterFactor& factor, int grid_m) {
  OuternessReport rep;
  const double det0 = std::abs(factor.coeffs[0].determinant());
  if (!(det0 > kOuterDetFloor)) {
    rep.value = std::numeric_limits<double>::infinity();
    rep.inconclusive = true;
    return rep;
  }
  const auto nodes = grid_nodes(grid_m);
  long double sum = 0.0L;
  long included = 0;
  for (double theta : nodes) {
    const double d = std::abs(factor.at(theta).determinant());
    if (d > kOuterDetFloor) {
      sum += std::log(static_cast<long double>(d));
      ++included;
    } else {
      ++rep.excluded_nodes;
    }
  }
  rep.inconclusive =
      rep.excluded_nodes > static_cast<int>(nodes.size()) / 100;
  const double mean =
      included > 0 ? static_cast<double>(sum / included)
                   : std::numeric_limits<double>::quiet_NaN();
  rep.value = std::abs(std::log(det0) - mean);
  return rep;
}

InnovationData innovation_coeffs(const OuterFactor& factor) {
  return {factor.coeffs, factor.coeffs[0] * factor.coeffs[0].adjoint()};
}

PhaseReport phase_matrix(const MatFn& h, const MatFn& hsharp, int grid_m) {
  const auto nodes = grid_nodes(grid_m);
  PhaseReport rep;
  const Mat eye = Mat::Identity(h(nodes[0]).rows(), h(nodes[0]).cols());
  for (size_t j = 0; j < nodes.size(); ++j) {
    const double theta = nodes[j];
    Eigen::FullPivLU<Mat> lu(hsharp(theta).adjoint());
    if (!lu.isInvertible())
      throw std::runtime_error("phase_matrix: companion factor singular at node " +
                               std::to_string(j));
    const Mat phi = std::polar(1.0, -theta / 2.0) * lu.solve(h(theta));
    if (j == 0) {
      rep.phase0 = phi;
      rep.unitarity_dev = (phi.adjoint() * phi - eye).norm();
    } else {
      rep.constancy_dev = std::max(rep.constancy_dev, (phi - rep.phase0).norm());
    }
  }
  return rep;
}

PhaseReport phase_matrix(const OuterFactor& h, const OuterFactor& hsharp,
                         int grid_m) {
  return phase_matrix([&](double theta) { return h.at(theta); },
                      [&](double theta) { return hsharp.at(theta); }, grid_m);
}

RowVec TrigPoly::at(double theta) const {
  RowVec acc = RowVec::Zero(q);
  for (size_t t = 0; t < coeffs.size(); ++t)
    acc += coeffs[t] * std::polar(1.0, (k_min + static_cast<int>(t)) * theta);
  return acc;
}

TrigPoly TrigPoly::basis(int q, int component, int k) {
  if (q < 1 || component < 0 || component >= q)
    throw std::invalid_argument("TrigPoly::basis: component out of range");
  TrigPoly f;
  f.q = q;
  f.k_min = k;
  f.coeffs = {RowVec::Unit(q, component)};
  return f;
}

IsometryReport isometry_discrepancy(const DensityModel& model,
                                    const MatFn& hsharp, const TrigPoly& f,
                                    int grid_m) {
  if (f.q != model.dim())
    throw std::invalid_argument("isometry_discrepancy: dimension mismatch");
  const auto grid = make_grid(model, grid_m);
  if (4 * std::max(std::abs(f.k_min), std::abs(f.k_max())) >= grid.size())
    throw std::invalid_argument(
        "isometry_discrepancy: polynomial degree must stay below a quarter "
        "of the grid");
  std::vector<double> weighted(static_cast<size_t>(grid.size()));
  std::vector<double> image(static_cast<size_t>(grid.size()));
  for (int j = 0; j < grid.size(); ++j) {
    const double theta = grid.nodes[static_cast<size_t>(j)];
    const RowVec fv = f.at(theta);
    const Mat quad = fv * grid.values[static_cast<size_t>(j)] * fv.adjoint();
    weighted[static_cast<size_t>(j)] = quad(0, 0).real();
    image[static_cast<size_t>(j)] = (fv * hsharp(theta).adjoint()).squaredNorm();
  }
  IsometryReport rep;
  rep.norm_weighted = integrate(weighted);
  rep.norm_image = integrate(image);
  rep.discrepancy = std::abs(rep.norm_weighted - rep.norm_image);
  return rep;
}

IsometryReport isometry_discrepancy(const DensityModel& model,
                                    const OuterFactor& hsharp,
                                    const TrigPoly& f, int grid_m) {
  return isometry_discrepancy(
      model, [&](double theta) { return hsharp.at(theta); }, f, grid_m);
}

}  // namespace pflab
