#include "pflab/models.hpp"

#include <cmath>

namespace pflab {

namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

bool invertible(const Mat& m) {
  Eigen::FullPivLU<Mat> lu(m);
  return lu.isInvertible();
}

// Fourier coefficients of the scalar weight 2|cos(theta/2)|:
// c_k = (4/pi) (-1)^{k+1} / (4k^2 - 1).
double half_power_coeff(long k) {
  const double kk = static_cast<double>(k);
  const double sign = (k % 2 == 0) ? -1.0 : 1.0;
  return 4.0 / kPi * sign / (4.0 * kk * kk - 1.0);
}

}  // namespace

Mat chol_lower(const Mat& a) {
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("chol_lower: matrix not positive definite");
  return llt.matrixL();
}

Mat lower_positive_gauge(const Mat& m) {
  // LQ through the QR of m*: m = R* Q*, R* lower triangular. A diagonal phase
  // then makes the diagonal real positive; the result stays unitary.
  Eigen::HouseholderQR<Mat> qr(m.adjoint());
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  Mat q = qr.householderQ();
  const int n = static_cast<int>(m.rows());
  Vec phase(n);
  for (int i = 0; i < n; ++i) {
    const cd d = std::conj(r(i, i));  // diagonal of m * q
    const double a = std::abs(d);
    if (a == 0.0)
      throw std::runtime_error("lower_positive_gauge: singular input");
    phase(i) = std::conj(d) / a;
  }
  return q * phase.asDiagonal();
}

AutocovSeq::AutocovSeq(int q, std::vector<Mat> gammas_nonneg)
    : q_(q), gammas_(std::move(gammas_nonneg)) {
  require(q_ >= 1, "AutocovSeq: dimension must be positive");
  require(!gammas_.empty(), "AutocovSeq: need at least Gamma(0)");
  for (const Mat& g : gammas_)
    require(g.rows() == q_ && g.cols() == q_, "AutocovSeq: block size mismatch");
}

Mat AutocovSeq::gamma(long k) const {
  const long a = std::labs(k);
  require(a <= max_lag(), "AutocovSeq::gamma: lag beyond stored range");
  if (k >= 0) return gammas_[static_cast<size_t>(a)];
  return gammas_[static_cast<size_t>(a)].adjoint();
}

DensityModel DensityModel::white_noise(int q) {
  require(q >= 1, "white_noise: dimension must be positive");
  DensityModel m;
  m.kind_ = ModelKind::WhiteNoise;
  m.q_ = q;
  return m;
}

DensityModel DensityModel::ma_factor(std::vector<Mat> coeffs) {
  require(!coeffs.empty(), "ma_factor: need at least t_0");
  const int q = static_cast<int>(coeffs[0].rows());
  require(q >= 1 && coeffs[0].cols() == q, "ma_factor: t_0 must be square");
  for (const Mat& t : coeffs)
    require(t.rows() == q && t.cols() == q, "ma_factor: coefficient size mismatch");
  require(invertible(coeffs[0]), "ma_factor: t_0 must be invertible");
  DensityModel m;
  m.kind_ = ModelKind::MAFactor;
  m.q_ = q;
  m.ma_ = std::move(coeffs);
  return m;
}

DensityModel DensityModel::scalar_weight(Mat b) {
  const int q = static_cast<int>(b.rows());
  require(q >= 1 && b.cols() == q, "scalar_weight: B must be square");
  require(invertible(b), "scalar_weight: B must be invertible");
  DensityModel m;
  m.kind_ = ModelKind::ScalarWeight;
  m.q_ = q;
  m.b_ = std::move(b);
  return m;
}

DensityModel DensityModel::stacked_shift(DensityModel base) {
  require(base.dim() == 1, "stacked_shift: base must be one-dimensional");
  require(base.kind() != ModelKind::StackedShift,
          "stacked_shift: base cannot itself be stacked");
  DensityModel m;
  m.kind_ = ModelKind::StackedShift;
  m.q_ = 2;
  m.inner_ = std::make_shared<DensityModel>(std::move(base));
  return m;
}

Mat DensityModel::evaluate(double theta) const {
  switch (kind_) {
    case ModelKind::WhiteNoise:
      return Mat::Identity(q_, q_);
    case ModelKind::MAFactor: {
      Mat t = Mat::Zero(q_, q_);
      for (size_t k = 0; k < ma_.size(); ++k)
        t += ma_[k] * std::polar(1.0, static_cast<double>(k) * theta);
      return t * t.adjoint();
    }
    case ModelKind::ScalarWeight:
      return 2.0 * std::abs(std::cos(theta / 2.0)) * (b_ * b_.adjoint());
    case ModelKind::StackedShift: {
      const cd wy = inner_->evaluate(theta)(0, 0);
      const cd up = std::polar(1.0, theta) * wy;
      Mat w(2, 2);
      w << wy, up, std::conj(up), wy;
      return w;
    }
    case ModelKind::Transposed:
      return inner_->evaluate(theta).transpose();
  }
  throw std::logic_error("evaluate: unreachable");
}

Mat DensityModel::autocovariance(long k) const {
  switch (kind_) {
    case ModelKind::WhiteNoise:
      return k == 0 ? Mat(Mat::Identity(q_, q_)) : Mat(Mat::Zero(q_, q_));
    case ModelKind::MAFactor: {
      // Gamma(k) = sum_j t_{j+k} t_j*; the adjoint mirror covers k < 0.
      if (k < 0) return autocovariance(-k).adjoint();
      Mat g = Mat::Zero(q_, q_);
      const long p = static_cast<long>(ma_.size()) - 1;
      for (long j = 0; j + k <= p; ++j)
        g += ma_[static_cast<size_t>(j + k)] * ma_[static_cast<size_t>(j)].adjoint();
      return g;
    }
    case ModelKind::ScalarWeight:
      return half_power_coeff(std::labs(k)) * (b_ * b_.adjoint());
    case ModelKind::StackedShift: {
      // Row stacking (Y(k-1), Y(k)) interleaves the base autocovariance with
      // its one-step shifts; valid for every integer k.
      const auto gy = [&](long j) { return inner_->autocovariance(j)(0, 0); };
      Mat g(2, 2);
      g << gy(k), gy(k - 1), gy(k + 1), gy(k);
      return g;
    }
    case ModelKind::Transposed:
      return inner_->autocovariance(k).transpose();
  }
  throw std::logic_error("autocovariance: unreachable");
}

AutocovSeq DensityModel::autocov_seq(int max_lag) const {
  require(max_lag >= 0, "autocov_seq: max_lag must be nonnegative");
  std::vector<Mat> g;
  g.reserve(static_cast<size_t>(max_lag) + 1);
  for (long k = 0; k <= max_lag; ++k) g.push_back(autocovariance(k));
  return AutocovSeq(q_, std::move(g));
}

DensityModel DensityModel::transposed() const {
  switch (kind_) {
    case ModelKind::WhiteNoise:
      return *this;
    case ModelKind::ScalarWeight:
      return scalar_weight(b_.conjugate());
    case ModelKind::Transposed:
      return *inner_;
    default: {
      DensityModel m;
      m.kind_ = ModelKind::Transposed;
      m.q_ = q_;
      m.inner_ = std::make_shared<DensityModel>(*this);
      return m;
    }
  }
}

bool DensityModel::analytically_degenerate() const {
  if (kind_ == ModelKind::StackedShift) return true;
  if (kind_ == ModelKind::Transposed) return inner_->analytically_degenerate();
  return false;
}

std::optional<bool> DensityModel::known_ipf() const {
  switch (kind_) {
    case ModelKind::StackedShift:
      return true;  // past/future intersection equals the finite shared block
    case ModelKind::ScalarWeight:
      return true;  // half-power weight admits matched analytic factors
    case ModelKind::Transposed:
      return inner_->known_ipf();
    default:
      return std::nullopt;
  }
}

std::optional<bool> DensityModel::known_cnd() const {
  switch (kind_) {
    case ModelKind::StackedShift:
      return false;  // past and future share the base variable at lag -1
    case ModelKind::Transposed:
      return inner_->known_cnd();
    default:
      return std::nullopt;
  }
}

const std::vector<Mat>& DensityModel::ma_coeffs() const {
  require(kind_ == ModelKind::MAFactor, "ma_coeffs: wrong variant");
  return ma_;
}

const Mat& DensityModel::weight_matrix() const {
  require(kind_ == ModelKind::ScalarWeight, "weight_matrix: wrong variant");
  return b_;
}

const DensityModel& DensityModel::base() const {
  require(kind_ == ModelKind::StackedShift || kind_ == ModelKind::Transposed,
          "base: wrong variant");
  return *inner_;
}

Mat scalar_weight_factor(const Mat& b, cd z, FactorSide side) {
  if (std::abs(z) > 1.0 + 1e-12)
    throw std::domain_error("scalar_weight_factor: |z| must be <= 1");
  const cd w = 1.0 + z;
  if (w == cd(0.0, 0.0))
    throw std::domain_error("scalar_weight_factor: branch point z = -1");
  const cd root = std::sqrt(w);  // principal branch, Re >= 0
  return side == FactorSide::Plain ? Mat(root * b) : Mat(root * b.adjoint());
}

}  // namespace pflab
