#pragma once

// Numeric screening of the regularity conditions that govern the geometry of
// past and future for a q-variate stationary sequence:
//
//   maximal rank (MR)   det w > 0 almost everywhere
//   condition (A)       log det w integrable (maximal rank + full
//                       nondeterminism; the Szego-Kolmogorov setting)
//   minimality          w^{-1} integrable
//
// The checks are grid probes, so every verdict ships with its numeric
// evidence and the thresholds that produced it. On top of the three checks, a
// small rule engine turns verdicts plus per-model analytic certificates into
// expectations for two subspace properties: complete nondeterminism of
// past/future (CND) and the finite-past intersection property (IPF).
// Complete nondeterminism implies the intersection property unconditionally;
// under condition (A) the two are equivalent, and integrable w^{-1} is
// sufficient for both. The engine encodes exactly those implications and
// nothing stronger.

#include <optional>
#include <string>

#include "pflab/grid.hpp"
#include "pflab/models.hpp"

namespace pflab {

enum class Verdict { Holds, Fails, Inconclusive };
enum class Expectation { ExpectedTrue, ExpectedFalse, Undetermined };

const char* to_string(Verdict v);
const char* to_string(Expectation e);
const char* to_string(ProbeVerdict v);

// det floor above which MR is accepted outright
inline constexpr double kMrDetFloor = 1e-10;
// nodes with det at or below this count as zero witnesses
inline constexpr double kMrZeroFloor = 1e-12;
// fraction of zero witnesses that turns isolated zeros into a.e. degeneracy
inline constexpr double kMrZeroFraction = 0.01;

struct MrReport {
  Verdict verdict = Verdict::Inconclusive;
  bool analytic_degeneracy = false;  // det w == 0 identically, by construction
  double min_det = 0.0;
  double max_det = 0.0;
  double zero_fraction = 0.0;  // fraction of nodes with det <= kMrZeroFloor
  int grid_m = 0;
};

struct SzegoReport {
  Verdict verdict = Verdict::Inconclusive;
  double value = 0.0;  // integral of log det w, when it exists
  ProbeResult positive_part;
  ProbeResult negative_part;
  std::string note;
};

struct MinimalityReport {
  ProbeVerdict verdict = ProbeVerdict::Inconclusive;
  double value = 0.0;  // integral of tr(w^{-1}) when finite
  bool skipped = false;  // degenerate density: inverse never probed
  ProbeResult probe;
  std::string note;
};

MrReport check_mr(const DensityModel& model, int grid_m = 14);
SzegoReport check_condition_a(const DensityModel& model, int m_lo = 8, int m_hi = 16);
MinimalityReport check_minimality(const DensityModel& model, int m_lo = 8,
                                  int m_hi = 16);

// Pure implication engine, exposed for exhaustive property tests. Throws
// std::logic_error when the inputs are mutually contradictory (evidence that
// would certify complete nondeterminism while refuting the intersection
// property cannot be valid).
struct RuleInput {
  Verdict mr = Verdict::Inconclusive;
  Verdict condition_a = Verdict::Inconclusive;
  ProbeVerdict minimality = ProbeVerdict::Inconclusive;
  std::optional<bool> cert_ipf;  // analytic certificate, when the model has one
  std::optional<bool> cert_cnd;
};

struct RuleOutput {
  Expectation implied_cnd = Expectation::Undetermined;
  Expectation implied_ipf = Expectation::Undetermined;
  std::string rule;  // which clause fired, for the report
};

RuleOutput implication_rule(const RuleInput& in);

struct ConditionReport {
  MrReport mr;
  SzegoReport condition_a;
  MinimalityReport minimality;
  Expectation implied_cnd = Expectation::Undetermined;
  Expectation implied_ipf = Expectation::Undetermined;
  std::string rule;
};

ConditionReport classify(const DensityModel& model);

}  // namespace pflab
