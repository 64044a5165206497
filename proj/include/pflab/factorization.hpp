#pragma once

// Outer spectral factorization of q x q densities from their autocovariance
// sequence, plus the verification toolkit built around the factors:
// outerness certificates, innovation data, the half-angle phase quotient of
// the two one-sided factors, and a norm-isometry probe.
//
// The factorization method is Bauer's: Cholesky-factor the (N+1)q block
// Toeplitz matrix T = [Gamma(i-j)] and read the converged last block row as
// the reversed coefficients of h(z) = sum c(n) z^n with w = h h*.  The
// Cholesky factor is computed by a generalized Schur recursion on the
// displacement T - Z T Z* = A A* - B B*, which costs O(N * band) block
// operations instead of O(N^3) and never forms T.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pflab/linalg.hpp"
#include "pflab/models.hpp"

namespace pflab {

// Trailing factor coefficients below this fraction of ||c(0)||_F are dropped
// into tail_energy.
inline constexpr double kFactorTailTruncation = 1e-14;
// |det| at or below this counts a grid node as effectively singular in the
// outerness verification.
inline constexpr double kOuterDetFloor = 1e-150;

// How the constant unitary freedom of the factor has been pinned.
//   LowerTriangularPositiveDiag: c(0) lower triangular, real positive diagonal
//     (native gauge of w = h h*).
//   TransposedLower: c(0) upper triangular, real positive diagonal (native
//     gauge of w = h# * h#, where h# is the transpose of a lower-gauge factor
//     of the transposed density).
enum class FactorGauge { LowerTriangularPositiveDiag, TransposedLower };

struct OuterFactor {
  int q = 0;
  std::vector<Mat> coeffs;  // c(0..M), h(z) = sum c(n) z^n
  FactorGauge gauge = FactorGauge::LowerTriangularPositiveDiag;
  double residual = 0.0;     // sup_theta ||h h* - w||_F on the check grid
  double tail_energy = 0.0;  // Frobenius energy of trailing coefficients
                             // dropped when the stored series was truncated

  // h(e^{i theta}) from the stored series.
  Mat at(double theta) const;
  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

struct BauerOptions {
  int order = 256;          // first Toeplitz order; power of two, >= 4
  double tol = 1e-10;       // stop doubling when the last row moves less
  int order_cap = 4096;     // hard ceiling on the Toeplitz order
  int residual_grid_m = 12; // grid exponent for the residual scan
};

// Factorization requires the block Toeplitz matrices of the autocovariance
// to be uniformly positive definite; densities without maximal rank fail.
class NotFactorizableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BauerResult {
  OuterFactor factor;
  int order_used = 0;
  double last_change = 0.0;     // sup block change of c(n) at the last doubling
  bool slow_convergence = false;  // cap reached with last_change >= tol
};

// Lags beyond autocov.max_lag() are taken as exact zeros, so a banded
// sequence means the banded density it defines.  Throws NotFactorizableError
// when the Toeplitz matrices are not positive definite (rank-deficient
// density) and std::invalid_argument for malformed options.
BauerResult bauer_factorize(const AutocovSeq& autocov,
                            const BauerOptions& opt = {});

// Companion factor h# with w = h#* h#, obtained as the transpose of the
// plain factor of the transposed density; gauge TransposedLower.
BauerResult factorize_sharp(const DensityModel& model,
                            const BauerOptions& opt = {});

// Autocovariance sequence deep enough for factorization up to order_cap:
// exact band for band-limited models, order_cap lags otherwise.
AutocovSeq factorization_autocov(const DensityModel& model, int order_cap);

// Outerness certificate: |log|det c(0)| - mean_theta log|det h(e^{i theta})||.
// Nodes where det h vanishes are excluded and counted; the check is
// inconclusive when more than 1% of nodes drop out.
struct OuternessReport {
  double value = 0.0;
  int excluded_nodes = 0;
  bool inconclusive = false;
};
OuternessReport verify_outer(const OuterFactor& factor, int grid_m = 14);

// The factor coefficients drive the one-sided moving-average representation
// of the process; error_cov = c(0) c(0)* is the one-step prediction error
// covariance.
struct InnovationData {
  std::vector<Mat> coeffs;
  Mat error_cov;
};
InnovationData innovation_coeffs(const OuterFactor& factor);

using MatFn = std::function<Mat(double)>;

// Phi(theta) = e^{-i theta/2} (h#(e^{i theta})*)^{-1} h(e^{i theta}),
// sampled on a grid.  For the half-power weights the two outer factors
// differ by this half-angle phase, so Phi is a constant unitary; the report
// carries how far the samples are from that.
struct PhaseReport {
  Mat phase0;                  // Phi at the first node
  double constancy_dev = 0.0;  // max_j ||Phi(theta_j) - Phi(theta_0)||_F
  double unitarity_dev = 0.0;  // ||Phi(theta_0)* Phi(theta_0) - I||_F
};
PhaseReport phase_matrix(const MatFn& h, const MatFn& hsharp, int grid_m);
PhaseReport phase_matrix(const OuterFactor& h, const OuterFactor& hsharp,
                         int grid_m);

// Row-valued trigonometric polynomial f(theta) = sum_t coeffs[t]
// e^{i (k_min + t) theta}, each coefficient a 1 x q row.
struct TrigPoly {
  int q = 0;
  int k_min = 0;
  std::vector<RowVec> coeffs;

  RowVec at(double theta) const;
  int k_max() const { return k_min + static_cast<int>(coeffs.size()) - 1; }
  // Unit row in `component` (0-based) carrying the single frequency k.
  static TrigPoly basis(int q, int component, int k);
};

// Compares ||f||^2 in the w-weighted norm against ||f h#*||^2 in the flat
// norm by quadrature on a shared grid; the two agree exactly when
// w = h#* h#, so the discrepancy measures the factorization quality seen
// through one test vector.
struct IsometryReport {
  double norm_weighted = 0.0;
  double norm_image = 0.0;
  double discrepancy = 0.0;
};
IsometryReport isometry_discrepancy(const DensityModel& model,
                                    const OuterFactor& hsharp,
                                    const TrigPoly& f, int grid_m = 12);
IsometryReport isometry_discrepancy(const DensityModel& model,
                                    const MatFn& hsharp, const TrigPoly& f,
                                    int grid_m = 12);

}  // namespace pflab
