#pragma once

// Finite-window geometry of the process subspaces attached to a density:
// Gram matrices over generator windows, principal angles between lag-index
// subspaces, intersection certificates with a Grassmann dimension count,
// alternating projections, and the finite one-step predictor.
//
// Coordinates: a lag set {k_0 < ... < k_{r-1}} carries the q * r generators
// e_j(k) (component j at lag k), ordered lag-major. A coefficient vector x
// over that basis represents sum_{k,j} x_{(k,j)} e_j(k), and all norms and
// angles below are taken in the weighted geometry where
// <e_i(k), e_j(l)> = Gamma(k - l)_{ij}.

#include <string>
#include <vector>

#include "pflab/linalg.hpp"
#include "pflab/models.hpp"

namespace pflab {

// Relative eigenvalue cutoff separating exact rank deficiency from roundoff,
// with a x10 instability band around it.
inline constexpr double kRankTol = 1e-10;
// A principal cosine this close to one certifies a shared direction.
inline constexpr double kCosineOne = 1e-8;
// Bound on the sines between the certified intersection and the middle
// block in the finite intersection-property check.
inline constexpr double kCoincidenceTol = 1e-8;

// Sorted duplicate-free list of integer lags; each lag contributes all q
// generators.
class IndexSet {
 public:
  IndexSet() = default;
  explicit IndexSet(std::vector<long> lags);  // sorts and deduplicates
  static IndexSet range(long lo, long hi);    // inclusive

  const std::vector<long>& lags() const { return lags_; }
  int size() const { return static_cast<int>(lags_.size()); }
  bool empty() const { return lags_.empty(); }
  long min_lag() const { return lags_.front(); }
  long max_lag() const { return lags_.back(); }

 private:
  std::vector<long> lags_;
};

// Gram matrix of the generators over a contiguous lag window [lo, hi]:
// block (k, l) = Gamma(k - l). Hermitian PSD, block Toeplitz by
// stationarity.
struct GramBlockToeplitz {
  int q = 0;
  long lag_lo = 0;
  long lag_hi = 0;
  Mat matrix;
};
GramBlockToeplitz gram(const AutocovSeq& autocov, long lag_lo, long lag_hi);

struct PrincipalAngleReport {
  std::vector<double> cosines;  // descending
  int rank_a = 0;               // whitening rank used on each side
  int rank_b = 0;
  double tol = 0.0;
  bool rank_unstable = false;   // an eigenvalue fell inside the cutoff band
};

// Cosines of the principal angles between span(A) and span(B): the singular
// values of the cross Gram conjugated by rank-truncated inverse square roots
// of the side Grams, so rank-deficient windows are handled by
// pseudo-whitening.
PrincipalAngleReport principal_angles(const IndexSet& a, const IndexSet& b,
                                      const AutocovSeq& autocov,
                                      double tol = kRankTol);

struct IntersectionCertificate {
  int dim = 0;       // rank G_A + rank G_B - rank G_{A union B}
  Mat basis;         // columns: unit intersection vectors in union coords
  std::vector<long> union_lags;
  double residual = 0.0;  // max Gram distance between the A- and B-side
                          // expressions of a certified vector
  bool unstable = false;
  int rank_a = 0;
  int rank_b = 0;
  int rank_union = 0;
};

// Intersection dimension from the Grassmann rank identity plus an explicit
// basis read off the principal-vector pairs with cosine >= 1 - kCosineOne.
IntersectionCertificate intersection(const IndexSet& a, const IndexSet& b,
                                     const AutocovSeq& autocov,
                                     double tol = kRankTol);

struct CndRow {
  int horizon = 0;   // past [-N..-1] against future [0..N]
  double cos1 = 0.0;
  double cos2 = 0.0;
  int dim = 0;
  double residual = 0.0;
};

// Past/future angle and intersection profile over growing horizons; a
// nonzero dim row is a finite-window refutation of trivial past/future
// intersection.
std::vector<CndRow> cnd_profile(const DensityModel& model,
                                const std::vector<int>& horizons,
                                double tol = kRankTol);

struct IpfCheckResult {
  bool pass = false;
  std::string reason;  // RANK_DEFICIENT | DIMENSION_MISMATCH | MISALIGNED |
                       // UNSTABLE; empty on pass
  int dim = 0;
  int expected_dim = 0;
  int rank_union = 0;
  int expected_rank = 0;
  double max_sine = 0.0;  // angles between certificate and middle block
  IntersectionCertificate certificate;
};

// Finite shadow of the intersection property: past [-N..-1] meets the
// window [-n..N] in exactly the middle block [-n..-1]. Requires the union
// Gram to have full rank q(2N+1); a rank defect (shared directions among
// the generators) is reported as RANK_DEFICIENT and is conclusive evidence
// against it, while PASS at one (n, N) is consistency evidence only.
IpfCheckResult ipf_finite_check(const DensityModel& model, int n, int horizon,
                                double tol = kRankTol);

struct AlternatingTrace {
  std::vector<double> norms;  // ||x_0||, ||x_1||, ... in the weighted norm
  Vec final_coords;           // last iterate, union coordinates
  std::vector<long> union_lags;
};

// Iterates x <- P_A P_B x in the weighted geometry, starting from
// coordinates over the union generator set. The norm sequence decays to the
// norm of the component of x_0 in span(A) ∩ span(B); with trivial
// intersection the decay is geometric with ratio cos^2 of the largest
// principal angle.
AlternatingTrace alternating_projections(const IndexSet& a, const IndexSet& b,
                                         const AutocovSeq& autocov,
                                         const Vec& start, int iters,
                                         double tol = kRankTol);

struct FinitePredictor {
  std::vector<Mat> coeffs;       // X(0) ~ sum coeffs[k-1] X(-k), k = 1..N
  Mat error_cov;                 // V_N
  std::vector<Mat> error_trace;  // V_1..V_N, Loewner nonincreasing
};

// One-step predictor from the previous N values via the block
// Levinson-Whittle recursion on the autocovariance; lags beyond the stored
// range are taken as zero. Throws when an intermediate error covariance is
// numerically singular (degenerate density).
FinitePredictor finite_predictor(const AutocovSeq& autocov, int order);

}  // namespace pflab
