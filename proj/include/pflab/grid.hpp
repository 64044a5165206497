#pragma once

// Midpoint quadrature on the unit circle.
//
// The grid with exponent m carries G = 2^m nodes
//
//     theta_j = -pi + (j + 1/2) * 2 pi / G,   j = 0..G-1,
//
// i.e. cell midpoints offset half a step from the endpoints, so theta = +-pi
// and theta = 0 are never nodes. Integrals against sigma(d.theta) =
// d.theta/(2 pi) reduce to plain means over the nodes; for trigonometric
// polynomials of degree < G the rule is exact, and doubling m refines by node
// insertion at the half-cells.

#include <functional>
#include <string>
#include <vector>

#include "pflab/linalg.hpp"
#include "pflab/models.hpp"

namespace pflab {

struct SpectralGrid {
  int m = 0;                 // G = 2^m
  int q = 0;
  std::vector<double> nodes;
  std::vector<Mat> values;   // w(theta_j), Hermitian within 1e-12 (validated)

  int size() const { return static_cast<int>(nodes.size()); }
};

// Node set alone (no density evaluation); m in [3, 24].
std::vector<double> grid_nodes(int m);

// Evaluate the model on the grid; throws with the node index if the model
// produces a non-finite or non-Hermitian value.
SpectralGrid make_grid(const DensityModel& model, int m);

// (1/G) * sum(values), left-to-right fixed order. values.size() must be a
// power of two >= 8 (a grid size).
double integrate(std::span<const double> values);

// Gamma(k) = (1/G) sum_j e^{-ik.theta_j} w(theta_j) for k = 0..max_lag,
// mirrored exactly to negative lags. Requires max_lag < G/2 (alias guard).
AutocovSeq fourier_coeffs(const SpectralGrid& grid, int max_lag);

enum class ProbeVerdict { Finite, Divergent, Inconclusive };

struct ProbeSample {
  int m;
  double value;
};

// Refinement probe for integrals of nonnegative scalar integrands.
//
// The integrand is evaluated on the grids m = m_lo..m_hi (at least four
// consecutive exponents) and one mean per grid is recorded. Classification:
//
//   Finite      last relative change < kProbeRelTol, value = last mean; or the
//               per-doubling increments decay geometrically (ratio <=
//               kProbeGeomRatio over the last steps), value = Richardson limit
//               and `extrapolated` set
//   Divergent   monotone growth whose increments do not shrink geometrically
//               (ratio >= kProbeDivergeRatio), or a non-finite node value
//   Inconclusive anything else; the trace is the evidence either way
struct ProbeResult {
  ProbeVerdict verdict = ProbeVerdict::Inconclusive;
  double value = 0.0;              // meaningful for Finite
  bool extrapolated = false;
  bool nonfinite_node = false;
  std::vector<ProbeSample> trace;
  std::string note;
};

inline constexpr double kProbeRelTol = 1e-6;
inline constexpr double kProbeGeomRatio = 0.75;
inline constexpr double kProbeDivergeRatio = 0.9;

ProbeResult integrability_probe(const std::function<double(double)>& integrand,
                                int m_lo, int m_hi);

}  // namespace pflab
