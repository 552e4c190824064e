// Command-line front end: simulate, fit, cv, predict, bench.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "clda/bench.hpp"
#include "clda/classify.hpp"
#include "clda/coda.hpp"
#include "clda/config.hpp"
#include "clda/errors.hpp"
#include "clda/io.hpp"
#include "clda/model_io.hpp"
#include "clda/rng.hpp"
#include "clda/simgen.hpp"
#include "clda/tune.hpp"
#include "clda/version.hpp"

namespace {

using clda::config::Json;
namespace fs = std::filesystem;

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string checksum(const std::string& path) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(clda::io::read_text(path))));
  return std::string("fnv1a64:") + buf;
}

struct Globals {
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

// One manifest per output directory. Everything except `timing` is a pure
// function of the inputs.
class Manifest {
 public:
  Manifest(std::string command, std::string out_dir) : command_(std::move(command)), dir_(std::move(out_dir)) {}

  void input(const std::string& path) { inputs_[path] = checksum(path); }
  void output(const std::string& name) { outputs_[name] = checksum((fs::path(dir_) / name).string()); }
  std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

  void write(const Json& config, std::uint64_t seed, int threads) const {
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    Json j = {{"command", command_},
              {"version", CLDA_VERSION},
              {"seed", seed},
              {"threads", threads},
              {"config", config},
              {"inputs", inputs_},
              {"outputs", outputs_},
              {"timing", {{"seconds", seconds}}}};
    clda::io::write_text(path("manifest.json"), j.dump(1) + "\n");
  }

 private:
  std::string command_, dir_;
  Json inputs_ = Json::object(), outputs_ = Json::object();
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::uint64_t resolve_seed(const Globals& g, std::uint64_t config_seed) { return g.seed.value_or(config_seed); }

std::string csv_join(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
  return s + "\n";
}

using clda::io::format_number;

// ---- simulate -------------------------------------------------------------

int cmd_simulate(const Globals& g, const std::string& config_path, const std::string& out) {
  Manifest m("simulate", out);
  auto settings = clda::config::sim_from_json(clda::config::parse_file(config_path));
  m.input(config_path);
  settings.sim.seed = resolve_seed(g, settings.sim.seed);
  std::optional<clda::simgen::MarginalLibrary> library;
  if (settings.library) {
    library = clda::simgen::MarginalLibrary::from_csv(*settings.library);
    m.input(*settings.library);
  }
  const auto sim = clda::simgen::generate(settings.sim, library);

  clda::io::write_dataset(m.path("train.csv"), sim.train);
  clda::io::write_dataset(m.path("test.csv"), sim.test);
  std::vector<std::string> header;
  for (int j = 1; j <= settings.sim.p; ++j) header.push_back("z" + std::to_string(j));
  clda::io::write_matrix(m.path("test_latent.csv"), header, sim.test_latent);

  const auto oracle = clda::simgen::oracle_classify(sim.oracle, sim.test_latent);
  Json truth = {{"config", clda::config::to_json(settings.sim)},
                {"family", clda::simgen::to_string(settings.sim.family)},
                {"beta", clda::model_io::vector_to_json(sim.oracle.beta)},
                {"sigma", clda::model_io::matrix_to_json(sim.sigma)},
                {"oracle_test_error", clda::simgen::error_rate(oracle, sim.test.labels)}};
  if (settings.sim.family == clda::simgen::Family::Mixture) {
    truth["center"] = clda::model_io::vector_to_json(sim.oracle.center);
    truth["mu0"] = clda::model_io::vector_to_json(sim.mu0);
    truth["mu1"] = clda::model_io::vector_to_json(sim.mu1);
    truth["scales"] = clda::model_io::vector_to_json(sim.scales);
    Json thr = Json::array();
    for (Eigen::Index j = 0; j < sim.thresholds.size(); ++j) {
      thr.push_back(std::isfinite(sim.thresholds(j)) ? Json(sim.thresholds(j)) : Json(nullptr));
    }
    truth["thresholds"] = thr;
  } else {
    truth["table_index"] = sim.table_index;
  }
  clda::io::write_text(m.path("truth.json"), truth.dump(1) + "\n");

  for (const char* f : {"train.csv", "test.csv", "test_latent.csv", "truth.json"}) m.output(f);
  Json cfg = clda::config::to_json(settings.sim);
  if (settings.library) cfg["library"] = *settings.library;
  m.write(cfg, settings.sim.seed, g.threads);
  std::printf("wrote %d training and %d test rows to %s\n", settings.sim.n, settings.sim.n_test, out.c_str());
  return 0;
}

// ---- fit / cv -------------------------------------------------------------

Json load_optional(const std::string& path) { return path.empty() ? Json::object() : clda::config::parse_file(path); }

void write_clda_cv(const std::string& path, const clda::tune::CvResult& cv) {
  std::string out = "lambda_index,lambda,intercept,error\n";
  for (std::size_t l = 0; l < cv.lambdas.size(); ++l) {
    for (std::size_t c = 0; c < cv.intercepts.size(); ++c) {
      out += csv_join({std::to_string(l), format_number(cv.lambdas[l]), format_number(cv.intercepts[c]),
                       format_number(cv.error(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(c)))});
    }
  }
  clda::io::write_text(path, out);
}

void write_coda_cv(const std::string& path, const clda::coda::CodaCvResult& cv) {
  std::string out = "lambda_index,lambda,error\n";
  for (std::size_t l = 0; l < cv.lambdas.size(); ++l) {
    out += csv_join({std::to_string(l), format_number(cv.lambdas[l]),
                     format_number(cv.error(static_cast<Eigen::Index>(l)))});
  }
  clda::io::write_text(path, out);
}

int cmd_fit(const Globals& g, const std::string& train_path, const std::string& config_path,
            const std::string& method, const std::string& out, bool with_model) {
  Manifest m(with_model ? "fit" : "cv", out);
  const Json raw = load_optional(config_path);
  if (!config_path.empty()) m.input(config_path);
  const auto data = clda::io::read_dataset(train_path);
  m.input(train_path);

  Json cfg_snapshot;
  std::uint64_t seed = 0;
  if (method == "clda") {
    auto cfg = clda::config::tune_from_json(raw);
    cfg.seed = seed = resolve_seed(g, cfg.seed);
    cfg.threads = g.threads;
    cfg_snapshot = clda::config::to_json(cfg);
    if (with_model) {
      const auto fit = clda::tune::fit(data, cfg);
      write_clda_cv(m.path("cv_table.csv"), fit.cv);
      clda::model_io::save(m.path("model.json"), fit.model);
      const auto post = clda::classify::posterior_batch(fit.model, data.x, seed, g.threads);
      std::vector<int> pred;
      for (const auto& p : post) pred.push_back(clda::classify::decide(clda::classify::rule_value(p, fit.model.rule.rule)));
      std::printf("lambda %.6g intercept %.6g cv error %.4f support %ld\n", fit.cv.best_lambda, fit.cv.best_intercept,
                  fit.cv.best_error, static_cast<long>((fit.model.beta.array() != 0.0).count()));
      std::printf("training error: %.4f\n", clda::simgen::error_rate(pred, data.labels));
    } else {
      const auto cv = clda::tune::cross_validate(data, cfg);
      write_clda_cv(m.path("cv_table.csv"), cv);
      std::printf("lambda %.6g intercept %.6g cv error %.4f\n", cv.best_lambda, cv.best_intercept, cv.best_error);
    }
  } else if (method == "coda") {
    auto cfg = clda::config::coda_from_json(raw);
    cfg.seed = seed = resolve_seed(g, cfg.seed);
    cfg.threads = g.threads;
    cfg_snapshot = clda::config::to_json(cfg);
    if (with_model) {
      const auto fit = clda::coda::coda_fit_cv(data, cfg);
      write_coda_cv(m.path("cv_table.csv"), fit.cv);
      clda::model_io::save(m.path("model.json"), fit.model);
      std::printf("lambda %.6g cv error %.4f support %ld\n", fit.cv.best_lambda, fit.cv.best_error,
                  static_cast<long>((fit.model.beta.array() != 0.0).count()));
      std::printf("training error: %.4f\n",
                  clda::simgen::error_rate(clda::coda::coda_predict(fit.model, data.x), data.labels));
    } else {
      const auto cv = clda::coda::coda_cross_validate(data, cfg);
      write_coda_cv(m.path("cv_table.csv"), cv);
      std::printf("lambda %.6g cv error %.4f\n", cv.best_lambda, cv.best_error);
    }
  } else {
    throw clda::InputError("unknown method '" + method + "' (expected clda or coda)");
  }
  m.output("cv_table.csv");
  if (with_model) m.output("model.json");
  cfg_snapshot["method"] = method;
  m.write(cfg_snapshot, seed, g.threads);
  return 0;
}

// ---- predict --------------------------------------------------------------

int cmd_predict(const Globals& g, const std::string& model_path, const std::string& data_path,
                const std::string& rule, int samples, const std::string& out) {
  Manifest m("predict", out);
  auto model = clda::model_io::load(model_path);
  m.input(model_path);
  const auto data = clda::io::read_dataset(data_path, false, false);
  m.input(data_path);
  const bool labelled = !data.labels.empty() && data.labels.front() >= 0;
  const std::uint64_t seed = resolve_seed(g, 0);

  std::vector<int> pred;
  std::string csv;
  Json cfg = Json::object();
  if (auto* cm = std::get_if<clda::classify::ClassifierModel>(&model)) {
    if (!rule.empty()) cm->rule.rule = clda::classify::parse_rule(rule);
    if (samples > 0) cm->rule.samples = samples;
    const auto post = clda::classify::posterior_batch(*cm, data.x, seed, g.threads);
    csv = labelled ? "row,posterior,prediction,y\n" : "row,posterior,prediction\n";
    for (std::size_t i = 0; i < post.size(); ++i) {
      const double pr = clda::classify::rule_value(post[i], cm->rule.rule);
      pred.push_back(clda::classify::decide(pr));
      std::vector<std::string> row = {std::to_string(i), format_number(pr), std::to_string(pred.back())};
      if (labelled) row.push_back(std::to_string(data.labels[i]));
      csv += csv_join(row);
    }
    cfg = {{"method", "clda"}, {"rule", clda::classify::rule_name(cm->rule.rule)}, {"S", cm->rule.samples}};
  } else {
    if (!rule.empty() || samples > 0) throw clda::InputError("--rule and --S apply to clda models only");
    const auto& cm2 = std::get<clda::coda::CodaModel>(model);
    if (static_cast<Eigen::Index>(data.p()) != cm2.beta.size()) throw clda::InputError("data and model covariate counts differ");
    csv = labelled ? "row,score,prediction,y\n" : "row,score,prediction\n";
    for (std::size_t i = 0; i < data.n(); ++i) {
      const Eigen::VectorXd row = data.x.row(static_cast<Eigen::Index>(i));
      const double s = clda::coda::coda_score(cm2, {row.data(), static_cast<std::size_t>(row.size())});
      pred.push_back(s > 0.0 ? 1 : 0);
      std::vector<std::string> r = {std::to_string(i), format_number(s), std::to_string(pred.back())};
      if (labelled) r.push_back(std::to_string(data.labels[i]));
      csv += csv_join(r);
    }
    cfg = {{"method", "coda"}};
  }
  clda::io::write_text(m.path("predictions.csv"), csv);
  m.output("predictions.csv");
  m.write(cfg, seed, g.threads);
  if (labelled) std::printf("error: %.4f\n", clda::simgen::error_rate(pred, data.labels));
  std::printf("wrote %zu predictions to %s\n", pred.size(), m.path("predictions.csv").c_str());
  return 0;
}

// ---- bench ----------------------------------------------------------------

int cmd_bench(const Globals& g, const std::string& config_path, const std::string& out) {
  Manifest m("bench", out);
  auto b = clda::config::bench_from_json(clda::config::parse_file(config_path));
  m.input(config_path);
  const std::uint64_t root = resolve_seed(g, 0);

  std::string results = "scenario,family,structure,truncation,replicate,method,error\n";
  std::string summary = "scenario,family,structure,truncation,method,mean,se,replicates\n";
  Json scen = Json::array();
  for (std::size_t k = 0; k < b.scenarios.size(); ++k) {
    auto& s = b.scenarios[k];
    // Each scenario draws from its own stream under the root seed unless it
    // pins a seed of its own.
    if (s.sim.seed == 0) s.sim.seed = clda::derive_seed(root, k);
    std::optional<clda::simgen::MarginalLibrary> library;
    if (s.library) {
      library = clda::simgen::MarginalLibrary::from_csv(*s.library);
      m.input(*s.library);
    }
    const auto res = clda::bench::run(s.sim, b.tune, b.coda, b.methods, b.replicates, g.threads, library);
    const std::vector<std::string> tag = {std::to_string(k), clda::simgen::to_string(s.sim.family),
                                          clda::simgen::to_string(s.sim.structure),
                                          clda::simgen::to_string(s.sim.truncation)};
    for (const auto& r : res) {
      for (std::size_t j = 0; j < r.methods.size(); ++j) {
        auto row = tag;
        row.insert(row.end(), {std::to_string(r.replicate), r.methods[j], format_number(r.errors[j])});
        results += csv_join(row);
      }
    }
    std::printf("scenario %zu (%s/%s/%s)\n", k, tag[1].c_str(), tag[2].c_str(), tag[3].c_str());
    for (const auto& sm : clda::bench::summarize(res)) {
      auto row = tag;
      row.insert(row.end(), {sm.method, format_number(sm.mean), format_number(sm.se), std::to_string(sm.count)});
      summary += csv_join(row);
      std::printf("  %-12s %.4f (se %.4f)\n", sm.method.c_str(), sm.mean, sm.se);
    }
    Json sj = clda::config::to_json(s.sim);
    if (s.library) sj["library"] = *s.library;
    scen.push_back(sj);
  }
  clda::io::write_text(m.path("results.csv"), results);
  clda::io::write_text(m.path("summary.csv"), summary);
  m.output("results.csv");
  m.output("summary.csv");
  m.write({{"replicates", b.replicates},
           {"methods", b.methods},
           {"scenarios", scen},
           {"tune", clda::config::to_json(b.tune)},
           {"coda", clda::config::to_json(b.coda)}},
          root, g.threads);
  return 0;
}

std::optional<long long> env_integer(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  const long long x = std::strtoll(v, &end, 10);
  if (*end != '\0') throw clda::InputError(std::string("environment variable ") + name + " must be an integer");
  return x;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse copula discriminant analysis for zero-inflated data"};
  app.set_version_flag("--version", CLDA_VERSION);
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed_flag;
  std::optional<int> threads_flag;
  app.add_option("--seed", seed_flag, "Root random seed (overrides CLDA_SEED and config files)");
  app.add_option("--threads", threads_flag, "Worker thread cap (overrides CLDA_THREADS)")->check(CLI::PositiveNumber);

  std::string config, out, train, method = "clda", model, data, rule;
  int samples = 0;

  auto* sim = app.add_subcommand("simulate", "Draw a synthetic train/test pair");
  sim->add_option("--config", config, "Simulation config (JSON)")->required();
  sim->add_option("--out", out, "Output directory")->required();

  auto* fit = app.add_subcommand("fit", "Cross-validate and fit a model");
  auto* cv = app.add_subcommand("cv", "Cross-validation table only");
  for (auto* sc : {fit, cv}) {
    sc->add_option("--train", train, "Training CSV with label column y")->required();
    sc->add_option("--config", config, "Tuning config (JSON)");
    sc->add_option("--method", method, "clda or coda")->check(CLI::IsMember({"clda", "coda"}));
    sc->add_option("--out", out, "Output directory")->required();
  }

  auto* pred = app.add_subcommand("predict", "Posterior probabilities and labels for new rows");
  pred->add_option("--model", model, "model.json from fit")->required();
  pred->add_option("--data", data, "CSV of covariates (label column optional)")->required();
  pred->add_option("--rule", rule, "mc or linear (clda models)")->check(CLI::IsMember({"mc", "linear"}));
  pred->add_option("--S", samples, "Monte Carlo sample size (clda models)")->check(CLI::PositiveNumber);
  pred->add_option("--out", out, "Output directory")->required();

  auto* bench = app.add_subcommand("bench", "Replicated simulation benchmark");
  bench->add_option("--config", config, "Benchmark config (JSON)")->required();
  bench->add_option("--out", out, "Output directory")->required();

  for (auto* sc : {sim, fit, cv, pred, bench}) sc->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    Globals g;
    if (seed_flag) {
      g.seed = *seed_flag;
    } else if (auto s = env_integer("CLDA_SEED")) {
      g.seed = static_cast<std::uint64_t>(*s);
    }
    if (threads_flag) {
      g.threads = *threads_flag;
    } else if (auto t = env_integer("CLDA_THREADS")) {
      if (*t < 1) throw clda::InputError("CLDA_THREADS must be positive");
      g.threads = static_cast<int>(*t);
    }

    if (sim->parsed()) return cmd_simulate(g, config, out);
    if (fit->parsed()) return cmd_fit(g, train, config, method, out, true);
    if (cv->parsed()) return cmd_fit(g, train, config, method, out, false);
    if (pred->parsed()) return cmd_predict(g, model, data, rule, samples, out);
    if (bench->parsed()) return cmd_bench(g, config, out);
  } catch (const clda::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
