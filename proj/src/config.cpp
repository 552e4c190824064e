#include "clda/config.hpp"

#include <set>

#include "clda/bench.hpp"
#include "clda/errors.hpp"
#include "clda/io.hpp"

namespace clda::config {

namespace {

class Reader {
 public:
  Reader(const Json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw InputError("config: '" + (where_.empty() ? "<root>" : where_) + "' must be an object");
  }

  // Rejects fields that no getter asked for.
  void finish(const std::set<std::string>& known) const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!known.count(it.key())) throw InputError("config: unknown field '" + path(it.key()) + "'");
    }
  }

  bool has(const std::string& k) const { return j_.contains(k) && !j_.at(k).is_null(); }
  const Json& raw(const std::string& k) const { return j_.at(k); }
  std::string path(const std::string& k) const { return where_.empty() ? k : where_ + "." + k; }

  template <class T>
  void opt(const std::string& k, T& out) const {
    if (!has(k)) return;
    const Json& v = j_.at(k);
    if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw type_error(k, "a string");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw type_error(k, "a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw type_error(k, "an integer");
    } else {
      if (!v.is_number()) throw type_error(k, "a number");
    }
    out = v.get<T>();
  }

 private:
  InputError type_error(const std::string& k, const char* what) const {
    return InputError("config: field '" + path(k) + "' must be " + what);
  }

  const Json& j_;
  std::string where_;
};

std::string join(const std::string& where, const std::string& k) { return where.empty() ? k : where + "." + k; }

}  // namespace

Json parse_file(const std::string& path) {
  try {
    return Json::parse(io::read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": invalid JSON: " + e.what());
  }
}

SimSettings sim_from_json(const Json& j, const std::string& where) {
  Reader r(j, where);
  SimSettings s;
  auto& c = s.sim;
  std::string family = simgen::to_string(c.family), structure = simgen::to_string(c.structure),
              truncation = simgen::to_string(c.truncation);
  r.opt("family", family);
  r.opt("structure", structure);
  r.opt("truncation", truncation);
  c.family = simgen::parse_family(family);
  c.structure = simgen::parse_structure(structure);
  c.truncation = simgen::parse_truncation(truncation);
  r.opt("n", c.n);
  r.opt("n_test", c.n_test);
  r.opt("p", c.p);
  r.opt("s", c.s);
  r.opt("v2", c.v2);
  r.opt("alpha", c.alpha);
  if (r.has("mean_shift")) {
    double m = 0.0;
    r.opt("mean_shift", m);
    c.mean_shift = m;
  }
  r.opt("seed", c.seed);
  if (r.has("library")) {
    std::string lib;
    r.opt("library", lib);
    s.library = lib;
  }
  r.finish({"family", "structure", "truncation", "n", "n_test", "p", "s", "v2", "alpha", "mean_shift", "seed", "library"});
  try {
    simgen::validate(c);
  } catch (const InputError& e) {
    throw InputError("config" + std::string(where.empty() ? "" : " '" + where + "'") + ": " + e.what());
  }
  return s;
}

tune::TuneConfig tune_from_json(const Json& j, const std::string& where) {
  Reader r(j, where);
  tune::TuneConfig c;
  r.opt("n_folds", c.n_folds);
  r.opt("n_lambdas", c.n_lambdas);
  r.opt("lambda_ratio", c.lambda_ratio);
  if (r.has("intercept_grid")) {
    const Json& g = r.raw("intercept_grid");
    if (!g.is_array() || g.size() != 3 || !g[0].is_number() || !g[1].is_number() || !g[2].is_number_integer()) {
      throw InputError("config: field '" + join(where, "intercept_grid") + "' must be [lo, hi, count]");
    }
    c.intercept_lo = g[0].get<double>();
    c.intercept_hi = g[1].get<double>();
    c.intercept_count = g[2].get<int>();
  }
  std::string rule = classify::rule_name(c.final_rule.rule), cv_rule = classify::rule_name(c.cv_rule.rule);
  r.opt("rule", rule);
  r.opt("cv_rule", cv_rule);
  c.final_rule.rule = classify::parse_rule(rule);
  c.cv_rule.rule = classify::parse_rule(cv_rule);
  r.opt("S", c.final_rule.samples);
  r.opt("cv_S", c.cv_rule.samples);
  r.opt("burn_in", c.final_rule.burn_in);
  c.cv_rule.burn_in = c.final_rule.burn_in;
  r.opt("nu", c.nu);
  r.opt("seed", c.seed);
  r.finish({"n_folds", "n_lambdas", "lambda_ratio", "intercept_grid", "rule", "cv_rule", "S", "cv_S", "burn_in", "nu", "seed"});
  tune::validate(c);
  return c;
}

coda::CodaConfig coda_from_json(const Json& j, const std::string& where) {
  Reader r(j, where);
  coda::CodaConfig c;
  r.opt("n_folds", c.n_folds);
  r.opt("n_lambdas", c.n_lambdas);
  r.opt("lambda_ratio", c.lambda_ratio);
  r.opt("seed", c.seed);
  r.finish({"n_folds", "n_lambdas", "lambda_ratio", "seed"});
  if (c.n_folds < 2 || c.n_lambdas < 1 || !(c.lambda_ratio > 0.0 && c.lambda_ratio < 1.0)) {
    throw InputError("config: invalid CODA settings in '" + (where.empty() ? "<root>" : where) + "'");
  }
  return c;
}

BenchSettings bench_from_json(const Json& j) {
  Reader r(j, "");
  BenchSettings b;
  r.opt("replicates", b.replicates);
  if (b.replicates < 1) throw InputError("config: field 'replicates' must be at least 1");
  b.methods = bench::kMethods;
  if (r.has("methods")) {
    const Json& m = r.raw("methods");
    if (!m.is_array()) throw InputError("config: field 'methods' must be an array of strings");
    b.methods.clear();
    for (const auto& v : m) {
      if (!v.is_string()) throw InputError("config: field 'methods' must be an array of strings");
      b.methods.push_back(v.get<std::string>());
    }
  }
  if (!r.has("scenarios") || !r.raw("scenarios").is_array() || r.raw("scenarios").empty()) {
    throw InputError("config: field 'scenarios' must be a non-empty array");
  }
  const Json& sc = r.raw("scenarios");
  for (std::size_t k = 0; k < sc.size(); ++k) b.scenarios.push_back(sim_from_json(sc[k], "scenarios[" + std::to_string(k) + "]"));
  if (r.has("tune")) b.tune = tune_from_json(r.raw("tune"), "tune");
  if (r.has("coda")) b.coda = coda_from_json(r.raw("coda"), "coda");
  r.finish({"replicates", "methods", "scenarios", "tune", "coda"});
  return b;
}

Json to_json(const simgen::SimConfig& c) {
  Json j = {{"family", simgen::to_string(c.family)},
            {"structure", simgen::to_string(c.structure)},
            {"truncation", simgen::to_string(c.truncation)},
            {"n", c.n},
            {"n_test", c.n_test},
            {"p", c.p},
            {"s", c.s},
            {"v2", c.v2},
            {"alpha", c.alpha},
            {"seed", c.seed}};
  j["mean_shift"] = c.mean_shift ? Json(*c.mean_shift) : Json(nullptr);
  return j;
}

Json to_json(const tune::TuneConfig& c) {
  return {{"n_folds", c.n_folds},
          {"n_lambdas", c.n_lambdas},
          {"lambda_ratio", c.lambda_ratio},
          {"intercept_grid", {c.intercept_lo, c.intercept_hi, c.intercept_count}},
          {"rule", classify::rule_name(c.final_rule.rule)},
          {"cv_rule", classify::rule_name(c.cv_rule.rule)},
          {"S", c.final_rule.samples},
          {"cv_S", c.cv_rule.samples},
          {"burn_in", c.final_rule.burn_in},
          {"nu", c.nu},
          {"seed", c.seed}};
}

Json to_json(const coda::CodaConfig& c) {
  return {{"n_folds", c.n_folds}, {"n_lambdas", c.n_lambdas}, {"lambda_ratio", c.lambda_ratio}, {"seed", c.seed}};
}

}  // namespace clda::config
