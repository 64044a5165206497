#include "pflab/conditions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pflab {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "HOLDS";
    case Verdict::Fails: return "FAILS";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

const char* to_string(Expectation e) {
  switch (e) {
    case Expectation::ExpectedTrue: return "EXPECTED_TRUE";
    case Expectation::ExpectedFalse: return "EXPECTED_FALSE";
    case Expectation::Undetermined: return "UNDETERMINED";
  }
  return "?";
}

const char* to_string(ProbeVerdict v) {
  switch (v) {
    case ProbeVerdict::Finite: return "FINITE";
    case ProbeVerdict::Divergent: return "DIVERGENT";
    case ProbeVerdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

MrReport check_mr(const DensityModel& model, int grid_m) {
  MrReport rep;
  rep.grid_m = grid_m;
  rep.analytic_degeneracy = model.analytically_degenerate();

  const auto grid = make_grid(model, grid_m);
  double min_det = std::numeric_limits<double>::infinity();
  double max_det = 0.0;
  long below = 0;
  for (const Mat& w : grid.values) {
    const double d = std::abs(w.determinant());
    min_det = std::min(min_det, d);
    max_det = std::max(max_det, d);
    if (d <= kMrZeroFloor) ++below;
  }
  rep.min_det = min_det;
  rep.max_det = max_det;
  rep.zero_fraction = static_cast<double>(below) / grid.size();

  if (rep.analytic_degeneracy || rep.zero_fraction >= kMrZeroFraction)
    rep.verdict = Verdict::Fails;
  else if (rep.min_det > kMrDetFloor)
    rep.verdict = Verdict::Holds;
  else
    rep.verdict = Verdict::Inconclusive;  // isolated near-zeros are not a.e. failure
  return rep;
}

SzegoReport check_condition_a(const DensityModel& model, int m_lo, int m_hi) {
  SzegoReport rep;
  if (model.analytically_degenerate()) {
    rep.verdict = Verdict::Fails;
    rep.note = "density is degenerate at every angle; log det w = -inf a.e.";
    return rep;
  }

  // The two signed parts are probed separately: the integral exists exactly
  // when each part is finite, and near-zero determinants only burden the
  // negative part.
  const auto log_det = [&model](double th) {
    const double d = model.evaluate(th).determinant().real();
    if (d <= 0.0) return -std::numeric_limits<double>::infinity();
    return std::log(d);
  };
  rep.positive_part = integrability_probe(
      [&log_det](double th) { return std::max(log_det(th), 0.0); }, m_lo, m_hi);
  rep.negative_part = integrability_probe(
      [&log_det](double th) { return std::max(-log_det(th), 0.0); }, m_lo, m_hi);

  if (rep.positive_part.verdict == ProbeVerdict::Finite &&
      rep.negative_part.verdict == ProbeVerdict::Finite) {
    rep.verdict = Verdict::Holds;
    rep.value = rep.positive_part.value - rep.negative_part.value;
    rep.note = "log det w integrable; value is the mean of log det w";
  } else if (rep.negative_part.verdict == ProbeVerdict::Divergent) {
    rep.verdict = Verdict::Fails;
    rep.note = "negative part of log det w diverges";
  } else {
    rep.verdict = Verdict::Inconclusive;
    rep.note = "probe did not resolve the log integrability";
  }
  return rep;
}

MinimalityReport check_minimality(const DensityModel& model, int m_lo, int m_hi) {
  MinimalityReport rep;
  if (model.analytically_degenerate()) {
    rep.verdict = ProbeVerdict::Divergent;
    rep.skipped = true;
    rep.note = "density has no a.e. inverse (maximal rank fails by construction)";
    return rep;
  }

  rep.probe = integrability_probe(
      [&model](double th) {
        const Mat w = model.evaluate(th);
        return w.inverse().trace().real();
      },
      m_lo, m_hi);
  rep.verdict = rep.probe.verdict;
  if (rep.verdict == ProbeVerdict::Finite) rep.value = rep.probe.value;
  rep.note = rep.probe.note;
  return rep;
}

RuleOutput implication_rule(const RuleInput& in) {
  RuleOutput out;

  // Analytic certificates are authoritative wherever present.
  if (in.cert_ipf) out.implied_ipf =
      *in.cert_ipf ? Expectation::ExpectedTrue : Expectation::ExpectedFalse;
  if (in.cert_cnd) out.implied_cnd =
      *in.cert_cnd ? Expectation::ExpectedTrue : Expectation::ExpectedFalse;
  out.rule = (in.cert_ipf || in.cert_cnd) ? "analytic-certificate" : "";

  const bool condition_a =
      in.mr == Verdict::Holds && in.condition_a == Verdict::Holds;

  if (condition_a) {
    if (in.minimality == ProbeVerdict::Finite) {
      // Integrable inverse is sufficient for complete nondeterminism (and
      // hence the intersection property) in the condition-(A) setting.
      if (out.implied_cnd == Expectation::ExpectedFalse ||
          out.implied_ipf == Expectation::ExpectedFalse)
        throw std::logic_error(
            "implication_rule: minimality evidence contradicts a certificate");
      out.implied_cnd = Expectation::ExpectedTrue;
      out.implied_ipf = Expectation::ExpectedTrue;
      out.rule = "minimality-sufficient";
    } else {
      // Equivalence of the two properties under condition (A): copy whatever
      // one side determines to the other.
      if (out.implied_cnd != Expectation::Undetermined &&
          out.implied_ipf != Expectation::Undetermined &&
          out.implied_cnd != out.implied_ipf)
        throw std::logic_error(
            "implication_rule: certificates disagree under condition (A)");
      if (out.implied_cnd == Expectation::Undetermined &&
          out.implied_ipf != Expectation::Undetermined) {
        out.implied_cnd = out.implied_ipf;
        out.rule = "certificate-under-equivalence";
      } else if (out.implied_ipf == Expectation::Undetermined &&
                 out.implied_cnd != Expectation::Undetermined) {
        out.implied_ipf = out.implied_cnd;
        out.rule = "certificate-under-equivalence";
      }
    }
  }

  // Complete nondeterminism implies the intersection property with no side
  // conditions; enforce the implication and reject impossible evidence.
  if (out.implied_cnd == Expectation::ExpectedTrue) {
    if (out.implied_ipf == Expectation::ExpectedFalse)
      throw std::logic_error(
          "implication_rule: CND expected true with IPF expected false");
    out.implied_ipf = Expectation::ExpectedTrue;
  }

  if (out.rule.empty()) out.rule = "no-implication";
  return out;
}

ConditionReport classify(const DensityModel& model) {
  ConditionReport rep;
  rep.mr = check_mr(model);
  rep.condition_a = check_condition_a(model);
  rep.minimality = check_minimality(model);

  RuleInput in;
  in.mr = rep.mr.verdict;
  in.condition_a = rep.condition_a.verdict;
  in.minimality = rep.minimality.verdict;
  in.cert_ipf = model.known_ipf();
  in.cert_cnd = model.known_cnd();

  const RuleOutput out = implication_rule(in);
  rep.implied_cnd = out.implied_cnd;
  rep.implied_ipf = out.implied_ipf;
  rep.rule = out.rule;
  return rep;
}

}  // namespace pflab
