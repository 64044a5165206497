#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>

namespace pflab {

using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RowVec = Eigen::RowVectorXcd;

constexpr double kPi = 3.14159265358979323846;

inline bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

inline double hermitian_defect(const Mat& a) {
  return (a - a.adjoint()).norm();
}

// Frobenius distance, the workhorse metric for residual reporting.
inline double frob_dist(const Mat& a, const Mat& b) { return (a - b).norm(); }

// Smallest eigenvalue of a Hermitian matrix (input symmetrized first so that
// roundoff-level defects do not feed complex garbage into the solver).
inline double min_eig_hermitian(const Mat& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a + a.adjoint()),
                                        Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Lower Cholesky factor with strictly positive diagonal. Throws on failure;
// callers that need a softer failure mode check positive definiteness first.
Mat chol_lower(const Mat& a);

// Unitary U (returned) such that m * U is lower triangular with strictly
// positive real diagonal; m must be square and invertible. This is the gauge
// used to pin spectral factors that are otherwise unique only up to a
// constant unitary on the right.
Mat lower_positive_gauge(const Mat& m);

}  // namespace pflab
