#pragma once

// Spectral density models for q-variate weakly stationary sequences.
//
// Every model describes a q x q matrix weight w(e^{i.theta}) >= 0 on the unit
// circle, normalized against sigma(d.theta) = d.theta / (2 pi). Autocovariances
// follow the convention
//
//     Gamma(k) = \int e^{-ik.theta} w(e^{i.theta}) sigma(d.theta),
//
// so that Gamma(k) = E[X(n+k) X(n)*] and Gamma(-k) = Gamma(k)*.
//
// Shipped model family:
//
//   WhiteNoise(q)        w = I_q
//   MAFactor(t_0..t_p)   w = t(z) t(z)*,  t(z) = sum t_k z^k,  t_0 invertible
//   ScalarWeight(B)      w = |1 + e^{i.theta}| B B*,  B invertible;
//                        the scalar weight vanishes at theta = pi, so w keeps
//                        maximal rank a.e. while 1/w fails to be integrable
//   StackedShift(base)   dimension-2 stack X(k) = (Y(k-1), Y(k)) of a scalar
//                        base sequence Y; its density
//                          [[ w_Y,            e^{ i.theta} w_Y ],
//                           [ e^{-i.theta} w_Y,          w_Y  ]]
//                        is singular at every point (det == 0), the canonical
//                        example separating past/future intersection from
//                        complete nondeterminism
//
// Autocovariances are closed-form for every variant; quadrature never feeds
// them.

#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pflab/linalg.hpp"

namespace pflab {

enum class ModelKind { WhiteNoise, MAFactor, ScalarWeight, StackedShift, Transposed };

class DensityModel;

// Autocovariance blocks Gamma(-K..K), stored for k >= 0 and mirrored exactly
// (Gamma(-k) returns Gamma(k)* entrywise) on access.
class AutocovSeq {
 public:
  AutocovSeq(int q, std::vector<Mat> gammas_nonneg);  // gammas_nonneg[k] = Gamma(k)

  int dim() const { return q_; }
  int max_lag() const { return static_cast<int>(gammas_.size()) - 1; }

  // Gamma(k) for |k| <= max_lag(); negative lags are the exact adjoint mirror.
  Mat gamma(long k) const;

 private:
  int q_;
  std::vector<Mat> gammas_;
};

class DensityModel {
 public:
  static DensityModel white_noise(int q);
  // t_0..t_p, all q x q, t_0 invertible.
  static DensityModel ma_factor(std::vector<Mat> coeffs);
  static DensityModel scalar_weight(Mat b);
  // base must be one-dimensional; the stack has dimension 2.
  static DensityModel stacked_shift(DensityModel base);

  ModelKind kind() const { return kind_; }
  int dim() const { return q_; }

  // w(e^{i.theta}); Hermitian PSD by construction at every angle.
  Mat evaluate(double theta) const;

  // Closed-form Gamma(k); defined for every integer k.
  Mat autocovariance(long k) const;
  AutocovSeq autocov_seq(int max_lag) const;

  // Model with pointwise density w(theta)^T. Closed under the family where
  // possible (WhiteNoise and ScalarWeight map to themselves up to parameter
  // conjugation); otherwise a transparent wrapper.
  DensityModel transposed() const;

  // det w == 0 identically (true for StackedShift); such models fail maximal
  // rank by construction and are rejected by the factorization routines.
  bool analytically_degenerate() const;

  // Analytic certificates carried by specific variants: a model may be known
  // a priori to satisfy (or violate) the past/future intersection property or
  // complete nondeterminism regardless of what the numeric probes resolve.
  std::optional<bool> known_ipf() const;
  std::optional<bool> known_cnd() const;

  // Variant accessors; throw unless the variant matches.
  const std::vector<Mat>& ma_coeffs() const;
  const Mat& weight_matrix() const;  // ScalarWeight B
  const DensityModel& base() const;  // StackedShift base, Transposed inner

 private:
  DensityModel() = default;

  ModelKind kind_ = ModelKind::WhiteNoise;
  int q_ = 1;
  std::vector<Mat> ma_;                     // MAFactor
  Mat b_;                                   // ScalarWeight
  std::shared_ptr<DensityModel> inner_;     // StackedShift base / Transposed
};

enum class FactorSide { Plain, Companion };

// The analytic outer factor of the ScalarWeight model: h(z) = (1+z)^{1/2} B
// (principal branch, h(0) = B), or the companion (1+z)^{1/2} B* whose
// conjugate-transpose-on-the-left product reproduces the same density.
// Defined on |z| <= 1 except the branch point z = -1, which is rejected.
Mat scalar_weight_factor(const Mat& b, cd z, FactorSide side = FactorSide::Plain);

}  // namespace pflab
