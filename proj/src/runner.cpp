#include "pflab/runner.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pflab/conditions.hpp"
#include "pflab/factorization.hpp"
#include "pflab/grid.hpp"
#include "pflab/subspace.hpp"

namespace pflab {
namespace {

using nlohmann::ordered_json;

// Shortest round-tripping decimal form, locale independent.
std::string num_str(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

ordered_json cmat_json(const Mat& m) {
  ordered_json rows = ordered_json::array();
  for (long r = 0; r < m.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (long c = 0; c < m.cols(); ++c)
      row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

ordered_json probe_json(const ProbeResult& p) {
  ordered_json j;
  j["verdict"] = to_string(p.verdict);
  j["value"] = p.value;
  j["extrapolated"] = p.extrapolated;
  j["nonfinite_node"] = p.nonfinite_node;
  ordered_json trace = ordered_json::array();
  for (const auto& s : p.trace) trace.push_back({{"m", s.m}, {"value", s.value}});
  j["trace"] = std::move(trace);
  j["note"] = p.note;
  return j;
}

struct CsvTable {
  std::string file;
  std::string header;
  std::vector<std::string> rows;
};

struct TaskOutput {
  bool ok = true;
  std::string code;     // machine readable failure class, empty when ok
  std::string message;  // human readable failure detail
  ordered_json result;
  std::vector<CsvTable> tables;
};

// Coefficient table rows in the pinned (index,row,col,re,im) layout.
CsvTable coeff_table(const std::string& file, const std::string& index_name,
                     const std::vector<Mat>& coeffs) {
  CsvTable t;
  t.file = file;
  t.header = index_name + ",row,col,re,im";
  for (size_t n = 0; n < coeffs.size(); ++n)
    for (long r = 0; r < coeffs[n].rows(); ++r)
      for (long c = 0; c < coeffs[n].cols(); ++c)
        t.rows.push_back(std::to_string(n) + "," + std::to_string(r) + "," +
                         std::to_string(c) + "," +
                         num_str(coeffs[n](r, c).real()) + "," +
                         num_str(coeffs[n](r, c).imag()));
  return t;
}

TaskOutput run_autocov(const ExperimentConfig& cfg) {
  TaskOutput out;
  const auto seq = cfg.model->autocov_seq(cfg.autocov_max_lag);
  std::vector<Mat> gammas;
  for (long k = 0; k <= seq.max_lag(); ++k) gammas.push_back(seq.gamma(k));
  out.tables.push_back(coeff_table("autocov.csv", "k", gammas));
  out.result["max_lag"] = cfg.autocov_max_lag;
  out.result["dim"] = cfg.model->dim();
  out.result["gamma0"] = cmat_json(gammas[0]);
  out.result["file"] = "autocov.csv";
  return out;
}

TaskOutput run_factorize(const ExperimentConfig& cfg, int grid_m) {
  TaskOutput out;
  BauerOptions opt;
  opt.order = cfg.factorize_order;
  opt.order_cap = cfg.factorize_order_cap;
  opt.tol = cfg.factorize_tol;
  const auto seq =
      factorization_autocov(*cfg.model, cfg.factorize_order_cap);
  const auto res = bauer_factorize(seq, opt);

  out.result["order_used"] = res.order_used;
  out.result["last_change"] = res.last_change;
  out.result["degree"] = res.factor.degree();
  out.result["residual"] = res.factor.residual;
  out.result["tail_energy"] = res.factor.tail_energy;
  ordered_json flags = ordered_json::array();
  if (res.slow_convergence) flags.push_back("SLOW_CONVERGENCE");
  out.result["flags"] = std::move(flags);

  const auto outer = verify_outer(res.factor, grid_m);
  out.result["outerness"] = {{"value", outer.value},
                             {"excluded_nodes", outer.excluded_nodes},
                             {"inconclusive", outer.inconclusive}};

  const auto innov = innovation_coeffs(res.factor);
  out.result["innovation_error_cov"] = cmat_json(innov.error_cov);

  // Random trigonometric rows push the factor through the norm identity the
  // factorization is supposed to realize; the config seed pins them.
  const int q = cfg.model->dim();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  const MatFn sharp_adapter = [&res](double theta) {
    return Mat(res.factor.at(theta).adjoint());
  };
  double max_disc = 0.0;
  for (int t = 0; t < cfg.isometry_count; ++t) {
    TrigPoly f;
    f.q = q;
    f.k_min = -2;
    for (int k = 0; k < 5; ++k) {
      RowVec row(q);
      for (int c = 0; c < q; ++c) row(c) = cd(dist(rng), dist(rng));
      f.coeffs.push_back(row);
    }
    const auto iso = isometry_discrepancy(*cfg.model, sharp_adapter, f,
                                          std::min(grid_m, 12));
    max_disc = std::max(max_disc, iso.discrepancy);
  }
  out.result["isometry"] = {{"seed", cfg.seed},
                            {"count", cfg.isometry_count},
                            {"max_discrepancy", max_disc}};

  out.tables.push_back(coeff_table("factor.csv", "n", res.factor.coeffs));
  out.result["file"] = "factor.csv";
  return out;
}

TaskOutput run_conditions(const ExperimentConfig& cfg) {
  TaskOutput out;
  const auto rep = classify(*cfg.model);
  out.result["mr"] = {{"verdict", to_string(rep.mr.verdict)},
                      {"analytic_degeneracy", rep.mr.analytic_degeneracy},
                      {"min_det", rep.mr.min_det},
                      {"max_det", rep.mr.max_det},
                      {"zero_fraction", rep.mr.zero_fraction},
                      {"grid_m", rep.mr.grid_m}};
  out.result["condition_a"] = {
      {"verdict", to_string(rep.condition_a.verdict)},
      {"value", rep.condition_a.value},
      {"positive_part", probe_json(rep.condition_a.positive_part)},
      {"negative_part", probe_json(rep.condition_a.negative_part)},
      {"note", rep.condition_a.note}};
  out.result["minimality"] = {{"verdict", to_string(rep.minimality.verdict)},
                              {"value", rep.minimality.value},
                              {"skipped", rep.minimality.skipped},
                              {"probe", probe_json(rep.minimality.probe)},
                              {"note", rep.minimality.note}};
  out.result["implied_cnd"] = to_string(rep.implied_cnd);
  out.result["implied_ipf"] = to_string(rep.implied_ipf);
  out.result["rule"] = rep.rule;
  return out;
}

TaskOutput run_angles(const ExperimentConfig& cfg) {
  TaskOutput out;
  const auto rows = cnd_profile(*cfg.model, cfg.angles_horizons,
                                cfg.angles_tol);
  CsvTable t;
  t.file = "angles.csv";
  t.header = "N,cos_1,cos_2,dim,residual";
  ordered_json jrows = ordered_json::array();
  for (const auto& row : rows) {
    t.rows.push_back(std::to_string(row.horizon) + "," + num_str(row.cos1) +
                     "," + num_str(row.cos2) + "," + std::to_string(row.dim) +
                     "," + num_str(row.residual));
    jrows.push_back({{"N", row.horizon},
                     {"cos_1", row.cos1},
                     {"cos_2", row.cos2},
                     {"dim", row.dim},
                     {"residual", row.residual}});
  }
  out.tables.push_back(std::move(t));
  out.result["rows"] = std::move(jrows);
  out.result["tol"] = cfg.angles_tol;
  out.result["file"] = "angles.csv";
  return out;
}

TaskOutput run_intersect(const ExperimentConfig& cfg) {
  TaskOutput out;
  const IndexSet a(cfg.intersect_a);
  const IndexSet b(cfg.intersect_b);
  const long span =
      std::max(a.max_lag(), b.max_lag()) - std::min(a.min_lag(), b.min_lag());
  const auto seq = cfg.model->autocov_seq(span);
  const auto cert = intersection(a, b, seq, cfg.intersect_tol);
  out.result["dim"] = cert.dim;
  out.result["rank_a"] = cert.rank_a;
  out.result["rank_b"] = cert.rank_b;
  out.result["rank_union"] = cert.rank_union;
  out.result["residual"] = cert.residual;
  out.result["unstable"] = cert.unstable;
  out.result["union_lags"] = cert.union_lags;
  out.result["basis"] = cmat_json(cert.basis);
  return out;
}

TaskOutput run_predictor(const ExperimentConfig& cfg) {
  TaskOutput out;
  const auto seq = cfg.model->autocov_seq(cfg.predictor_order);
  const auto pred = finite_predictor(seq, cfg.predictor_order);
  CsvTable t;
  t.file = "predictor.csv";
  t.header = "N,det_v";
  for (size_t m = 0; m < pred.error_trace.size(); ++m)
    t.rows.push_back(std::to_string(m + 1) + "," +
                     num_str(pred.error_trace[m].determinant().real()));
  out.tables.push_back(std::move(t));
  out.result["order"] = cfg.predictor_order;
  out.result["error_cov"] = cmat_json(pred.error_cov);
  out.result["det_v"] = pred.error_cov.determinant().real();
  out.result["file"] = "predictor.csv";
  return out;
}

TaskOutput run_report_marker() {
  TaskOutput out;
  out.result["format"] = "pflab-report-v1";
  return out;
}

TaskOutput dispatch(const std::string& name, const ExperimentConfig& cfg,
                    int grid_m) {
  try {
    if (name == "autocov") return run_autocov(cfg);
    if (name == "factorize") return run_factorize(cfg, grid_m);
    if (name == "conditions") return run_conditions(cfg);
    if (name == "angles") return run_angles(cfg);
    if (name == "intersect") return run_intersect(cfg);
    if (name == "predictor") return run_predictor(cfg);
    if (name == "report") return run_report_marker();
    TaskOutput out;
    out.ok = false;
    out.code = "UNKNOWN_TASK";
    out.message = name;
    return out;
  } catch (const NotFactorizableError& e) {
    TaskOutput out;
    out.ok = false;
    out.code = "NOT_FACTORIZABLE";
    out.message = e.what();
    return out;
  } catch (const std::exception& e) {
    TaskOutput out;
    out.ok = false;
    out.code = "TASK_FAILED";
    out.message = e.what();
    return out;
  }
}

ordered_json constants_json() {
  ordered_json j;
  j["probe_rel_tol"] = kProbeRelTol;
  j["probe_geom_ratio"] = kProbeGeomRatio;
  j["probe_diverge_ratio"] = kProbeDivergeRatio;
  j["mr_det_floor"] = kMrDetFloor;
  j["mr_zero_floor"] = kMrZeroFloor;
  j["mr_zero_fraction"] = kMrZeroFraction;
  j["factor_tail_truncation"] = kFactorTailTruncation;
  j["outer_det_floor"] = kOuterDetFloor;
  j["rank_tol"] = kRankTol;
  j["cosine_one"] = kCosineOne;
  j["coincidence_tol"] = kCoincidenceTol;
  return j;
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg_in,
                          const RunOptions& opt) {
  RunOutcome outcome;

  ExperimentConfig cfg = cfg_in;
  if (opt.output_dir) cfg.output_dir = *opt.output_dir;
  if (opt.grid_m) cfg.grid_m = *opt.grid_m;
  if (!cfg.model || cfg.grid_m < 3 || cfg.grid_m > 24) {
    outcome.exit_code = 1;
    outcome.errors.push_back("run: invalid effective config");
    return outcome;
  }

  struct Timed {
    TaskOutput out;
    double seconds = 0.0;
  };
  const auto timed_task = [&cfg](const std::string& name) {
    const auto start = std::chrono::steady_clock::now();
    Timed t;
    t.out = dispatch(name, cfg, cfg.grid_m);
    t.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start)
                    .count();
    return t;
  };

  // Results are collected (and later written) strictly in declared order;
  // only the computation itself fans out.
  std::vector<Timed> results(cfg.tasks.size());
  if (opt.serial) {
    for (size_t t = 0; t < cfg.tasks.size(); ++t)
      results[t] = timed_task(cfg.tasks[t]);
  } else {
    std::vector<std::future<Timed>> futures;
    futures.reserve(cfg.tasks.size());
    for (const auto& name : cfg.tasks)
      futures.push_back(
          std::async(std::launch::async, timed_task, name));
    for (size_t t = 0; t < futures.size(); ++t) results[t] = futures[t].get();
  }

  ordered_json report;
  report["schema"] = "pflab-report-v1";
  report["config"] = echo_config(cfg);
  report["constants"] = constants_json();
  ordered_json tasks = ordered_json::array();
  std::vector<std::string> failed;
  for (size_t t = 0; t < cfg.tasks.size(); ++t) {
    const auto& r = results[t].out;
    ordered_json entry;
    entry["name"] = cfg.tasks[t];
    entry["ok"] = r.ok;
    if (!r.ok) {
      entry["error"] = {{"code", r.code}, {"message", r.message}};
      failed.push_back(cfg.tasks[t]);
    }
    entry["result"] = r.result;
    tasks.push_back(std::move(entry));
    outcome.timings.push_back({cfg.tasks[t], results[t].seconds});
  }
  report["tasks"] = std::move(tasks);
  report["status"] = {{"ok", failed.empty()}, {"failed", failed}};
  outcome.report = report;
  outcome.exit_code = failed.empty() ? 0 : 2;

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) {
    outcome.exit_code = 1;
    outcome.errors.push_back("run: cannot create output dir '" +
                             cfg.output_dir + "': " + ec.message());
    return outcome;
  }
  const auto write_file = [&](const std::string& name,
                              const std::string& body) {
    const auto path = fs::path(cfg.output_dir) / name;
    std::ofstream out(path, std::ios::binary);
    out << body;
    if (!out) {
      outcome.exit_code = 1;
      outcome.errors.push_back("run: cannot write '" + path.string() + "'");
      return;
    }
    outcome.files_written.push_back(path.string());
  };

  write_file("report.json", report.dump(2) + "\n");
  for (size_t t = 0; t < results.size(); ++t)
    for (const auto& table : results[t].out.tables) {
      std::string body = table.header + "\n";
      for (const auto& row : table.rows) body += row + "\n";
      write_file(table.file, body);
    }
  std::string timing_body = "task,seconds\n";
  for (const auto& tim : outcome.timings)
    timing_body += tim.name + "," + num_str(tim.seconds) + "\n";
  write_file("timings.csv", timing_body);

  return outcome;
}

}  // namespace pflab
