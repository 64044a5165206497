#include "pflab/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace pflab {
namespace {

using nlohmann::ordered_json;

struct Parser {
  std::vector<std::string> diags;

  void fail(const std::string& path, const std::string& what) {
    diags.push_back(path + ": " + what);
  }

  // Strict schema: every present key must be declared.
  void check_keys(const ordered_json& obj, const std::string& path,
                  const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
      (void)value;
      if (!allowed.count(key)) fail(path + "." + key, "unknown field");
    }
  }

  bool require_object(const ordered_json& j, const std::string& path) {
    if (j.is_object()) return true;
    fail(path, "expected an object");
    return false;
  }

  std::optional<long long> get_int(const ordered_json& obj,
                                   const std::string& path,
                                   const std::string& key) {
    if (!obj.contains(key)) return std::nullopt;
    const auto& v = obj.at(key);
    if (!v.is_number_integer()) {
      fail(path + "." + key, "expected an integer");
      return std::nullopt;
    }
    return v.get<long long>();
  }

  std::optional<double> get_number(const ordered_json& obj,
                                   const std::string& path,
                                   const std::string& key) {
    if (!obj.contains(key)) return std::nullopt;
    const auto& v = obj.at(key);
    if (!v.is_number()) {
      fail(path + "." + key, "expected a number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<Mat> get_cmatrix(const ordered_json& j,
                                 const std::string& path) {
    if (!j.is_array() || j.empty()) {
      fail(path, "expected a nonempty array of matrix rows");
      return std::nullopt;
    }
    const size_t rows = j.size();
    size_t cols = 0;
    Mat m;
    for (size_t r = 0; r < rows; ++r) {
      const auto& row = j[r];
      const std::string rpath = path + "[" + std::to_string(r) + "]";
      if (!row.is_array() || row.empty()) {
        fail(rpath, "expected a nonempty array of [re, im] pairs");
        return std::nullopt;
      }
      if (r == 0) {
        cols = row.size();
        m = Mat(static_cast<long>(rows), static_cast<long>(cols));
      } else if (row.size() != cols) {
        fail(rpath, "ragged matrix: expected " + std::to_string(cols) +
                        " entries");
        return std::nullopt;
      }
      for (size_t c = 0; c < cols; ++c) {
        const auto& e = row[c];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() ||
            !e[1].is_number()) {
          fail(rpath + "[" + std::to_string(c) + "]",
               "expected an [re, im] pair of numbers");
          return std::nullopt;
        }
        m(static_cast<long>(r), static_cast<long>(c)) =
            cd(e[0].get<double>(), e[1].get<double>());
      }
    }
    return m;
  }

  std::optional<DensityModel> parse_model(const ordered_json& j,
                                          const std::string& path) {
    if (!require_object(j, path)) return std::nullopt;
    if (!j.contains("kind") || !j.at("kind").is_string()) {
      fail(path + ".kind", "required string field");
      return std::nullopt;
    }
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "white_noise") {
      check_keys(j, path, {"kind", "q"});
      const auto q = get_int(j, path, "q");
      if (!q) {
        fail(path + ".q", "required integer field");
        return std::nullopt;
      }
      if (*q < 1) {
        fail(path + ".q", "dimension must be positive");
        return std::nullopt;
      }
      return DensityModel::white_noise(static_cast<int>(*q));
    }
    if (kind == "ma_factor") {
      check_keys(j, path, {"kind", "coeffs"});
      if (!j.contains("coeffs") || !j.at("coeffs").is_array() ||
          j.at("coeffs").empty()) {
        fail(path + ".coeffs", "required nonempty array of matrices");
        return std::nullopt;
      }
      std::vector<Mat> coeffs;
      for (size_t t = 0; t < j.at("coeffs").size(); ++t) {
        auto m = get_cmatrix(j.at("coeffs")[t],
                             path + ".coeffs[" + std::to_string(t) + "]");
        if (!m) return std::nullopt;
        if (m->rows() != m->cols()) {
          fail(path + ".coeffs[" + std::to_string(t) + "]",
               "coefficients must be square");
          return std::nullopt;
        }
        if (!coeffs.empty() && m->rows() != coeffs[0].rows()) {
          fail(path + ".coeffs[" + std::to_string(t) + "]",
               "dimension differs from the first coefficient");
          return std::nullopt;
        }
        coeffs.push_back(std::move(*m));
      }
      return DensityModel::ma_factor(std::move(coeffs));
    }
    if (kind == "scalar_weight") {
      check_keys(j, path, {"kind", "b"});
      if (!j.contains("b")) {
        fail(path + ".b", "required matrix field");
        return std::nullopt;
      }
      auto b = get_cmatrix(j.at("b"), path + ".b");
      if (!b) return std::nullopt;
      if (b->rows() != b->cols()) {
        fail(path + ".b", "matrix must be square");
        return std::nullopt;
      }
      if (b->fullPivLu().rank() < b->rows()) {
        fail(path + ".b", "matrix must be invertible");
        return std::nullopt;
      }
      return DensityModel::scalar_weight(std::move(*b));
    }
    if (kind == "stacked_shift" || kind == "transposed") {
      check_keys(j, path, {"kind", "base"});
      if (!j.contains("base")) {
        fail(path + ".base", "required model field");
        return std::nullopt;
      }
      auto base = parse_model(j.at("base"), path + ".base");
      if (!base) return std::nullopt;
      if (kind == "stacked_shift")
        return DensityModel::stacked_shift(std::move(*base));
      return base->transposed();
    }
    fail(path + ".kind", "unknown model kind '" + kind + "'");
    return std::nullopt;
  }

  bool power_of_two(long long x) { return x > 0 && (x & (x - 1)) == 0; }

  std::optional<std::vector<long>> get_lag_list(const ordered_json& obj,
                                                const std::string& path,
                                                const std::string& key) {
    if (!obj.contains(key)) return std::nullopt;
    const auto& v = obj.at(key);
    if (!v.is_array() || v.empty()) {
      fail(path + "." + key, "expected a nonempty array of integer lags");
      return std::nullopt;
    }
    std::vector<long> lags;
    for (size_t t = 0; t < v.size(); ++t) {
      if (!v[t].is_number_integer()) {
        fail(path + "." + key + "[" + std::to_string(t) + "]",
             "expected an integer");
        return std::nullopt;
      }
      lags.push_back(v[t].get<long>());
    }
    return lags;
  }
};

}  // namespace

ParsedConfig parse_config(const nlohmann::ordered_json& doc) {
  Parser p;
  ExperimentConfig cfg;
  if (!doc.is_object()) {
    p.fail("config", "expected a JSON object");
    return {std::nullopt, std::move(p.diags)};
  }
  p.check_keys(doc, "config",
               {"model", "tasks", "params", "output_dir", "seed", "grid_m"});

  if (!doc.contains("model")) {
    p.fail("config.model", "required field");
  } else {
    cfg.model = p.parse_model(doc.at("model"), "model");
  }

  if (!doc.contains("tasks") || !doc.at("tasks").is_array() ||
      doc.at("tasks").empty()) {
    p.fail("config.tasks", "required nonempty array of task names");
  } else {
    std::set<std::string> seen;
    for (size_t t = 0; t < doc.at("tasks").size(); ++t) {
      const auto& v = doc.at("tasks")[t];
      const std::string path = "tasks[" + std::to_string(t) + "]";
      if (!v.is_string()) {
        p.fail(path, "expected a task name string");
        continue;
      }
      const std::string name = v.get<std::string>();
      if (std::find(kKnownTasks.begin(), kKnownTasks.end(), name) ==
          kKnownTasks.end()) {
        p.fail(path, "unknown task '" + name + "'");
        continue;
      }
      if (!seen.insert(name).second) {
        p.fail(path, "duplicate task '" + name + "'");
        continue;
      }
      cfg.tasks.push_back(name);
    }
  }

  if (doc.contains("output_dir")) {
    if (!doc.at("output_dir").is_string())
      p.fail("config.output_dir", "expected a string");
    else
      cfg.output_dir = doc.at("output_dir").get<std::string>();
  }
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_integer() ||
        doc.at("seed").get<long long>() < 0)
      p.fail("config.seed", "expected a nonnegative integer");
    else
      cfg.seed = doc.at("seed").get<unsigned long long>();
  }
  if (const auto m = p.get_int(doc, "config", "grid_m")) {
    if (*m < 3 || *m > 24)
      p.fail("config.grid_m", "grid exponent must be in [3, 24]");
    else
      cfg.grid_m = static_cast<int>(*m);
  }

  if (doc.contains("params")) {
    const auto& params = doc.at("params");
    if (p.require_object(params, "params")) {
      p.check_keys(params, "params",
                   {"dim", "autocov", "factorize", "angles", "intersect",
                    "predictor", "conditions", "report"});
      if (const auto d = p.get_int(params, "params", "dim")) {
        if (*d < 1)
          p.fail("params.dim", "declared dimension must be positive");
        else
          cfg.declared_dim = static_cast<int>(*d);
      }
      if (params.contains("autocov") &&
          p.require_object(params.at("autocov"), "params.autocov")) {
        const auto& a = params.at("autocov");
        p.check_keys(a, "params.autocov", {"max_lag"});
        if (const auto k = p.get_int(a, "params.autocov", "max_lag")) {
          if (*k < 0)
            p.fail("params.autocov.max_lag", "must be nonnegative");
          else
            cfg.autocov_max_lag = static_cast<int>(*k);
        }
      }
      if (params.contains("factorize") &&
          p.require_object(params.at("factorize"), "params.factorize")) {
        const auto& f = params.at("factorize");
        p.check_keys(f, "params.factorize",
                     {"order", "order_cap", "tol", "isometry_count"});
        if (const auto o = p.get_int(f, "params.factorize", "order")) {
          if (!p.power_of_two(*o))
            p.fail("params.factorize.order",
                   std::to_string(*o) + " is not a power of two");
          else if (*o < 4)
            p.fail("params.factorize.order", "must be at least 4");
          else
            cfg.factorize_order = static_cast<int>(*o);
        }
        if (const auto o = p.get_int(f, "params.factorize", "order_cap")) {
          if (!p.power_of_two(*o))
            p.fail("params.factorize.order_cap",
                   std::to_string(*o) + " is not a power of two");
          else
            cfg.factorize_order_cap = static_cast<int>(*o);
        }
        if (const auto t = p.get_number(f, "params.factorize", "tol")) {
          if (!(*t > 0.0))
            p.fail("params.factorize.tol", "tolerance must be positive");
          else
            cfg.factorize_tol = *t;
        }
        if (const auto c = p.get_int(f, "params.factorize",
                                     "isometry_count")) {
          if (*c < 0)
            p.fail("params.factorize.isometry_count", "must be nonnegative");
          else
            cfg.isometry_count = static_cast<int>(*c);
        }
        if (cfg.factorize_order_cap < cfg.factorize_order)
          p.fail("params.factorize.order_cap",
                 "must be at least params.factorize.order");
      }
      if (params.contains("angles") &&
          p.require_object(params.at("angles"), "params.angles")) {
        const auto& a = params.at("angles");
        p.check_keys(a, "params.angles", {"horizons", "tol"});
        if (a.contains("horizons")) {
          if (const auto h =
                  p.get_lag_list(a, "params.angles", "horizons")) {
            cfg.angles_horizons.clear();
            for (long n : *h) {
              if (n < 1) {
                p.fail("params.angles.horizons",
                       "horizons must be positive");
                break;
              }
              cfg.angles_horizons.push_back(static_cast<int>(n));
            }
          }
        }
        if (const auto t = p.get_number(a, "params.angles", "tol")) {
          if (!(*t > 0.0))
            p.fail("params.angles.tol", "tolerance must be positive");
          else
            cfg.angles_tol = *t;
        }
      }
      if (params.contains("intersect") &&
          p.require_object(params.at("intersect"), "params.intersect")) {
        const auto& i = params.at("intersect");
        p.check_keys(i, "params.intersect", {"a", "b", "tol"});
        if (const auto a = p.get_lag_list(i, "params.intersect", "a"))
          cfg.intersect_a = *a;
        if (const auto b = p.get_lag_list(i, "params.intersect", "b"))
          cfg.intersect_b = *b;
        if (const auto t = p.get_number(i, "params.intersect", "tol")) {
          if (!(*t > 0.0))
            p.fail("params.intersect.tol", "tolerance must be positive");
          else
            cfg.intersect_tol = *t;
        }
      }
      if (params.contains("predictor") &&
          p.require_object(params.at("predictor"), "params.predictor")) {
        const auto& pr = params.at("predictor");
        p.check_keys(pr, "params.predictor", {"order"});
        if (const auto o = p.get_int(pr, "params.predictor", "order")) {
          if (!p.power_of_two(*o))
            p.fail("params.predictor.order",
                   std::to_string(*o) + " is not a power of two");
          else
            cfg.predictor_order = static_cast<int>(*o);
        }
      }
      if (params.contains("conditions") &&
          p.require_object(params.at("conditions"), "params.conditions"))
        p.check_keys(params.at("conditions"), "params.conditions", {});
      if (params.contains("report") &&
          p.require_object(params.at("report"), "params.report"))
        p.check_keys(params.at("report"), "params.report", {});
    }
  }

  // Cross-field checks need a constructed model.
  if (cfg.model) {
    if (cfg.declared_dim && *cfg.declared_dim != cfg.model->dim())
      p.fail("params.dim",
             "declared dimension " + std::to_string(*cfg.declared_dim) +
                 " does not match the model dimension " +
                 std::to_string(cfg.model->dim()));
  }
  const bool wants_intersect =
      std::find(cfg.tasks.begin(), cfg.tasks.end(), "intersect") !=
      cfg.tasks.end();
  if (wants_intersect && (cfg.intersect_a.empty() || cfg.intersect_b.empty()))
    p.fail("params.intersect",
           "task 'intersect' requires lag sets 'a' and 'b'");

  if (!p.diags.empty()) return {std::nullopt, std::move(p.diags)};
  return {std::move(cfg), {}};
}

ParsedConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {std::nullopt, {"config: cannot open '" + path + "'"}};
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(in);
  } catch (const std::exception& e) {
    return {std::nullopt, {std::string("config: invalid JSON: ") + e.what()}};
  }
  return parse_config(doc);
}

namespace {

nlohmann::ordered_json cmatrix_json(const Mat& m) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (long r = 0; r < m.rows(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (long c = 0; c < m.cols(); ++c)
      row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::ordered_json model_json(const DensityModel& model) {
  nlohmann::ordered_json j;
  switch (model.kind()) {
    case ModelKind::WhiteNoise:
      j["kind"] = "white_noise";
      j["q"] = model.dim();
      break;
    case ModelKind::MAFactor: {
      j["kind"] = "ma_factor";
      nlohmann::ordered_json coeffs = nlohmann::ordered_json::array();
      for (const auto& c : model.ma_coeffs()) coeffs.push_back(cmatrix_json(c));
      j["coeffs"] = std::move(coeffs);
      break;
    }
    case ModelKind::ScalarWeight:
      j["kind"] = "scalar_weight";
      j["b"] = cmatrix_json(model.weight_matrix());
      break;
    case ModelKind::StackedShift:
      j["kind"] = "stacked_shift";
      j["base"] = model_json(model.base());
      break;
    case ModelKind::Transposed:
      j["kind"] = "transposed";
      j["base"] = model_json(model.base());
      break;
  }
  return j;
}

}  // namespace

nlohmann::ordered_json echo_config(const ExperimentConfig& cfg) {
  nlohmann::ordered_json j;
  j["model"] = cfg.model ? model_json(*cfg.model) : nullptr;
  j["tasks"] = cfg.tasks;
  nlohmann::ordered_json params;
  if (cfg.declared_dim) params["dim"] = *cfg.declared_dim;
  params["autocov"] = {{"max_lag", cfg.autocov_max_lag}};
  params["factorize"] = {{"order", cfg.factorize_order},
                         {"order_cap", cfg.factorize_order_cap},
                         {"tol", cfg.factorize_tol},
                         {"isometry_count", cfg.isometry_count}};
  params["angles"] = {{"horizons", cfg.angles_horizons},
                      {"tol", cfg.angles_tol}};
  params["intersect"] = {{"a", cfg.intersect_a},
                         {"b", cfg.intersect_b},
                         {"tol", cfg.intersect_tol}};
  params["predictor"] = {{"order", cfg.predictor_order}};
  j["params"] = std::move(params);
  j["output_dir"] = cfg.output_dir;
  j["seed"] = cfg.seed;
  j["grid_m"] = cfg.grid_m;
  return j;
}

}  // namespace pflab
