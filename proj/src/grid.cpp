#include "pflab/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace pflab {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

std::vector<double> grid_nodes(int m) {
  require(m >= 3 && m <= 24, "grid_nodes: exponent must lie in [3, 24]");
  const long g = 1L << m;
  std::vector<double> nodes(static_cast<size_t>(g));
  const double step = 2.0 * kPi / static_cast<double>(g);
  for (long j = 0; j < g; ++j)
    nodes[static_cast<size_t>(j)] = -kPi + (static_cast<double>(j) + 0.5) * step;
  return nodes;
}

SpectralGrid make_grid(const DensityModel& model, int m) {
  SpectralGrid grid;
  grid.m = m;
  grid.q = model.dim();
  grid.nodes = grid_nodes(m);
  grid.values.reserve(grid.nodes.size());
  for (size_t j = 0; j < grid.nodes.size(); ++j) {
    Mat w = model.evaluate(grid.nodes[j]);
    if (!w.allFinite())
      throw std::runtime_error("make_grid: non-finite density value at node " +
                               std::to_string(j));
    if (hermitian_defect(w) > 1e-12 * std::max(1.0, w.norm()))
      throw std::runtime_error("make_grid: non-Hermitian density value at node " +
                               std::to_string(j));
    grid.values.push_back(std::move(w));
  }
  return grid;
}

double integrate(std::span<const double> values) {
  require(values.size() >= 8 && is_power_of_two(static_cast<long>(values.size())),
          "integrate: value count must be a grid size (power of two >= 8)");
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

AutocovSeq fourier_coeffs(const SpectralGrid& grid, int max_lag) {
  const long g = grid.size();
  require(max_lag >= 0, "fourier_coeffs: max_lag must be nonnegative");
  require(max_lag < g / 2, "fourier_coeffs: max_lag must stay below G/2 (aliasing)");
  std::vector<Mat> gammas;
  gammas.reserve(static_cast<size_t>(max_lag) + 1);
  for (long k = 0; k <= max_lag; ++k) {
    Mat acc = Mat::Zero(grid.q, grid.q);
    for (long j = 0; j < g; ++j)
      acc += std::polar(1.0, -static_cast<double>(k) * grid.nodes[static_cast<size_t>(j)]) *
             grid.values[static_cast<size_t>(j)];
    gammas.push_back(acc / static_cast<double>(g));
  }
  return AutocovSeq(grid.q, std::move(gammas));
}

ProbeResult integrability_probe(const std::function<double(double)>& integrand,
                                int m_lo, int m_hi) {
  require(m_lo >= 3 && m_hi <= 24 && m_hi - m_lo >= 3,
          "integrability_probe: need at least four consecutive exponents in [3, 24]");

  ProbeResult res;
  for (int m = m_lo; m <= m_hi; ++m) {
    const auto nodes = grid_nodes(m);
    double sum = 0.0;
    bool bad = false;
    for (double th : nodes) {
      const double v = integrand(th);
      if (!std::isfinite(v)) {
        bad = true;
        break;
      }
      sum += v;
    }
    if (bad) {
      res.verdict = ProbeVerdict::Divergent;
      res.nonfinite_node = true;
      res.note = "non-finite integrand value treated as divergence evidence";
      return res;
    }
    res.trace.push_back({m, sum / static_cast<double>(nodes.size())});
  }

  const size_t n = res.trace.size();
  const double last = res.trace[n - 1].value;
  const double prev = res.trace[n - 2].value;
  const double rel = std::abs(last - prev) / std::max(std::abs(last), 1e-300);
  if (rel < kProbeRelTol) {
    res.verdict = ProbeVerdict::Finite;
    res.value = last;
    res.note = "converged (relative change below threshold)";
    return res;
  }

  std::vector<double> inc;
  for (size_t i = 0; i + 1 < n; ++i)
    inc.push_back(res.trace[i + 1].value - res.trace[i].value);
  const size_t ni = inc.size();  // >= 3 by the m-range precondition

  const double d0 = inc[ni - 3], d1 = inc[ni - 2], d2 = inc[ni - 1];
  if (d0 > 0.0 && d1 > 0.0 && d2 > 0.0 && d1 / d0 >= kProbeDivergeRatio &&
      d2 / d1 >= kProbeDivergeRatio) {
    res.verdict = ProbeVerdict::Divergent;
    res.note = "monotone growth with non-shrinking increments";
    return res;
  }

  if (d0 != 0.0 && d1 != 0.0) {
    const double r1 = d1 / d0, r2 = d2 / d1;
    if (std::abs(r1) <= kProbeGeomRatio && std::abs(r2) <= kProbeGeomRatio &&
        std::abs(r2) > 0.0) {
      // Geometric tail: sum the remaining increments as a geometric series.
      res.verdict = ProbeVerdict::Finite;
      res.value = last + d2 * r2 / (1.0 - r2);
      res.extrapolated = true;
      res.note = "converged (geometric increment decay, extrapolated limit)";
      return res;
    }
  }

  res.verdict = ProbeVerdict::Inconclusive;
  res.note = "no convergence or divergence pattern at the probed resolutions";
  return res;
}

}  // namespace pflab
