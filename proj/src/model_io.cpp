#include "clda/model_io.hpp"

#include "clda/errors.hpp"
#include "clda/io.hpp"

namespace clda::model_io {

namespace {

constexpr int kFormatVersion = 1;

const Json& field(const Json& j, const std::string& name, const std::string& path) {
  if (!j.is_object() || !j.contains(name)) throw InputError("model: missing field '" + path + name + "'");
  return j.at(name);
}

template <class T>
T get(const Json& j, const std::string& name, const std::string& path = "") {
  const Json& v = field(j, name, path);
  try {
    return v.get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InputError("model: field '" + path + name + "' has the wrong type");
  }
}

const char* kind_name(latent::VariableKind k) {
  switch (k) {
    case latent::VariableKind::BinaryLabel: return "label";
    case latent::VariableKind::Truncated: return "truncated";
    case latent::VariableKind::EffectivelyContinuous: return "continuous";
  }
  return "?";
}

latent::VariableKind parse_kind(const std::string& s) {
  if (s == "label") return latent::VariableKind::BinaryLabel;
  if (s == "truncated") return latent::VariableKind::Truncated;
  if (s == "continuous") return latent::VariableKind::EffectivelyContinuous;
  throw InputError("model: unknown variable kind '" + s + "'");
}

}  // namespace

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& name) {
  if (!j.is_array()) throw InputError("model: field '" + name + "' must be a matrix");
  const auto n = static_cast<Eigen::Index>(j.size());
  const Eigen::Index c = n ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(n, c);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Json& r = j[static_cast<std::size_t>(i)];
    if (!r.is_array() || static_cast<Eigen::Index>(r.size()) != c) {
      throw InputError("model: field '" + name + "' has ragged rows");
    }
    for (Eigen::Index k = 0; k < c; ++k) {
      if (!r[static_cast<std::size_t>(k)].is_number()) throw InputError("model: field '" + name + "' is not numeric");
      m(i, k) = r[static_cast<std::size_t>(k)].get<double>();
    }
  }
  return m;
}

Json vector_to_json(const Eigen::VectorXd& v) {
  return Json(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd vector_from_json(const Json& j, const std::string& name) {
  if (!j.is_array()) throw InputError("model: field '" + name + "' must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InputError("model: field '" + name + "' is not numeric");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Json to_json(const classify::ClassifierModel& m) {
  Json kinds = Json::array();
  for (const auto k : m.latent.kinds) kinds.push_back(kind_name(k));
  Json transforms = Json::array();
  for (const auto& t : m.transforms) {
    transforms.push_back({{"delta_n", t.delta_n()}, {"values", t.sorted_values()}});
  }
  return {
      {"format", kFormatVersion},
      {"method", "clda"},
      {"names", m.names},
      {"beta", vector_to_json(m.beta)},
      {"lambda", m.lambda},
      {"delta_y", m.delta_y},
      {"v_hat", m.v_hat},
      {"rule", {{"name", classify::rule_name(m.rule.rule)}, {"S", m.rule.samples}, {"burn_in", m.rule.burn_in}}},
      {"latent",
       {{"sigma", matrix_to_json(m.latent.sigma)},
        {"nu", m.latent.nu},
        {"label_threshold", m.latent.label_threshold},
        {"delta", vector_to_json(m.latent.thresholds.delta)},
        {"pi_hat", vector_to_json(m.latent.thresholds.pi_hat)},
        {"kinds", kinds},
        {"clamped_pairs", m.latent.clamped_pairs}}},
      {"transforms", transforms},
  };
}

classify::ClassifierModel clda_from_json(const Json& j) {
  classify::ClassifierModel m;
  m.names = get<std::vector<std::string>>(j, "names");
  m.beta = vector_from_json(field(j, "beta", ""), "beta");
  m.lambda = get<double>(j, "lambda");
  m.delta_y = get<double>(j, "delta_y");
  m.v_hat = get<double>(j, "v_hat");
  const Json& rule = field(j, "rule", "");
  m.rule.rule = classify::parse_rule(get<std::string>(rule, "name", "rule."));
  m.rule.samples = get<int>(rule, "S", "rule.");
  m.rule.burn_in = get<int>(rule, "burn_in", "rule.");

  const Json& lat = field(j, "latent", "");
  m.latent.sigma = matrix_from_json(field(lat, "sigma", "latent."), "latent.sigma");
  m.latent.nu = get<double>(lat, "nu", "latent.");
  m.latent.label_threshold = get<double>(lat, "label_threshold", "latent.");
  m.latent.thresholds.delta = vector_from_json(field(lat, "delta", "latent."), "latent.delta");
  m.latent.thresholds.pi_hat = vector_from_json(field(lat, "pi_hat", "latent."), "latent.pi_hat");
  for (const auto& k : get<std::vector<std::string>>(lat, "kinds", "latent.")) m.latent.kinds.push_back(parse_kind(k));
  m.latent.clamped_pairs = get<std::size_t>(lat, "clamped_pairs", "latent.");

  const Json& tr = field(j, "transforms", "");
  if (!tr.is_array()) throw InputError("model: field 'transforms' must be an array");
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const std::string path = "transforms[" + std::to_string(k) + "].";
    m.transforms.push_back(transform::MarginalTransform::from_parts(
        get<std::vector<double>>(tr[k], "values", path), get<double>(tr[k], "delta_n", path)));
  }

  const auto p = static_cast<Eigen::Index>(m.beta.size());
  if (m.latent.sigma.rows() != p + 1 || m.latent.sigma.cols() != p + 1 ||
      m.latent.thresholds.delta.size() != p || static_cast<Eigen::Index>(m.transforms.size()) != p ||
      static_cast<Eigen::Index>(m.names.size()) != p) {
    throw InputError("model: inconsistent dimensions");
  }
  if (!(m.v_hat > 0.0) || m.rule.samples < 1 || m.rule.burn_in < 0) throw InputError("model: invalid rule settings");
  return m;
}

Json to_json(const coda::CodaModel& m) {
  const auto& t = m.problem.transform;
  return {
      {"format", kFormatVersion},
      {"method", "coda"},
      {"beta", vector_to_json(m.beta)},
      {"lambda", m.lambda},
      {"intercept", m.intercept},
      {"intercept_fallback", m.intercept_fallback},
      {"mu0", vector_to_json(m.problem.mu0)},
      {"mu1", vector_to_json(m.problem.mu1)},
      {"pooled_s", matrix_to_json(m.problem.pooled_s)},
      {"nu", m.problem.nu},
      {"n0", m.problem.n0},
      {"n1", m.problem.n1},
      {"transform",
       {{"mean", vector_to_json(t.mean)}, {"sd", vector_to_json(t.sd)}, {"delta_n", t.delta_n}, {"values", t.sorted}}},
  };
}

coda::CodaModel coda_from_json(const Json& j) {
  coda::CodaModel m;
  m.beta = vector_from_json(field(j, "beta", ""), "beta");
  m.lambda = get<double>(j, "lambda");
  m.intercept = get<double>(j, "intercept");
  m.intercept_fallback = get<bool>(j, "intercept_fallback");
  m.problem.mu0 = vector_from_json(field(j, "mu0", ""), "mu0");
  m.problem.mu1 = vector_from_json(field(j, "mu1", ""), "mu1");
  m.problem.pooled_s = matrix_from_json(field(j, "pooled_s", ""), "pooled_s");
  m.problem.nu = get<double>(j, "nu");
  m.problem.n0 = get<std::size_t>(j, "n0");
  m.problem.n1 = get<std::size_t>(j, "n1");
  const Json& t = field(j, "transform", "");
  m.problem.transform.mean = vector_from_json(field(t, "mean", "transform."), "transform.mean");
  m.problem.transform.sd = vector_from_json(field(t, "sd", "transform."), "transform.sd");
  m.problem.transform.delta_n = get<double>(t, "delta_n", "transform.");
  m.problem.transform.sorted = get<std::vector<std::vector<double>>>(t, "values", "transform.");
  const auto p = m.beta.size();
  if (m.problem.mu0.size() != p || m.problem.mu1.size() != p || m.problem.transform.mean.size() != p ||
      m.problem.transform.sd.size() != p || static_cast<Eigen::Index>(m.problem.transform.sorted.size()) != p) {
    throw InputError("model: inconsistent dimensions");
  }
  return m;
}

AnyModel load(const std::string& path) {
  Json j;
  try {
    j = Json::parse(io::read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path + ": invalid JSON: " + e.what());
  }
  const auto method = get<std::string>(j, "method");
  if (method == "clda") return clda_from_json(j);
  if (method == "coda") return coda_from_json(j);
  throw InputError(path + ": unknown method '" + method + "'");
}

void save(const std::string& path, const AnyModel& model) {
  const Json j = std::visit([](const auto& m) { return to_json(m); }, model);
  io::write_text(path, j.dump(1) + "\n");
}

}  // namespace clda::model_io
