#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "clda/classify.hpp"
#include "clda/coda.hpp"
#include "clda/config.hpp"
#include "clda/errors.hpp"
#include "clda/io.hpp"
#include "clda/model_io.hpp"
#include "clda/simgen.hpp"
#include "clda/tune.hpp"

namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("clda_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const clda::InputError& e) {
    return e.what();
  }
  return "";
}

clda::simgen::Simulation small_sim() {
  clda::simgen::SimConfig cfg;
  cfg.p = 6;
  cfg.s = 2;
  cfg.n = 60;
  cfg.n_test = 20;
  cfg.seed = 9;
  return clda::simgen::generate(cfg);
}

}  // namespace

using IoTest = TempDir;

TEST_F(IoTest, DatasetRoundTrip) {
  const auto sim = small_sim();
  clda::io::write_dataset(path("d.csv"), sim.train);
  const auto back = clda::io::read_dataset(path("d.csv"));
  EXPECT_EQ(back.x, sim.train.x);
  EXPECT_EQ(back.labels, sim.train.labels);
  EXPECT_EQ(back.names, sim.train.names);
}

TEST_F(IoTest, ErrorsNameTheLine) {
  const auto ragged = write("r.csv", "y,a,b\n0,1,2\n1,3\n");
  EXPECT_NE(error_of([&] { clda::io::read_dataset(ragged); }).find("r.csv:3"), std::string::npos);
  const auto text = write("t.csv", "y,a\n0,1\n1,abc\n");
  const auto msg = error_of([&] { clda::io::read_dataset(text, false); });
  EXPECT_NE(msg.find("t.csv:3"), std::string::npos);
  EXPECT_NE(msg.find("'a'"), std::string::npos);
  const auto missing = write("m.csv", "y,a\n0,\n1,2\n");
  EXPECT_NE(error_of([&] { clda::io::read_dataset(missing, false); }).find("missing"), std::string::npos);
  const auto label = write("l.csv", "y,a\n2,1\n1,2\n");
  EXPECT_NE(error_of([&] { clda::io::read_dataset(label, false); }).find("label"), std::string::npos);
  const auto negative = write("n.csv", "y,a\n0,-1\n1,2\n");
  EXPECT_NE(error_of([&] { clda::io::read_dataset(negative, false); }).find("negative"), std::string::npos);
  const auto nan = write("nan.csv", "y,a\n0,nan\n1,2\n");
  EXPECT_FALSE(error_of([&] { clda::io::read_dataset(nan, false); }).empty());
  EXPECT_THROW(clda::io::read_dataset(path("absent.csv")), clda::InputError);
}

TEST_F(IoTest, ValidationRejectsConstantColumn) {
  const auto f = write("c.csv", "y,a,b\n0,0,1\n1,0,2\n0,0,3\n");
  EXPECT_NE(error_of([&] { clda::io::read_dataset(f); }).find("a"), std::string::npos);
  EXPECT_NO_THROW(clda::io::read_dataset(f, false));
}

TEST_F(IoTest, OptionalLabel) {
  const auto f = write("u.csv", "a,b\n1,2\n0,3\n");
  EXPECT_THROW(clda::io::read_dataset(f, false, true), clda::InputError);
  const auto d = clda::io::read_dataset(f, false, false);
  EXPECT_EQ(d.labels, (std::vector<int>{-1, -1}));
}

TEST_F(IoTest, ClassifierModelRoundTrip) {
  const auto sim = small_sim();
  clda::tune::TuneConfig tc;
  tc.final_rule.rule = clda::classify::Rule::MonteCarlo;
  const auto model = clda::tune::fit_at(sim.train, 0.02, 0.1, tc);
  clda::model_io::save(path("m.json"), model);
  const auto back = std::get<clda::classify::ClassifierModel>(clda::model_io::load(path("m.json")));
  EXPECT_EQ(back.beta, model.beta);
  EXPECT_EQ(back.rule.rule, model.rule.rule);
  const auto a = clda::classify::posterior_batch(model, sim.test.x, 4);
  const auto b = clda::classify::posterior_batch(back, sim.test.x, 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].mc, b[i].mc);
    EXPECT_EQ(a[i].linear, b[i].linear);
  }
}

TEST_F(IoTest, CodaModelRoundTrip) {
  const auto sim = small_sim();
  const auto model = clda::coda::coda_fit(sim.train, 0.01);
  clda::model_io::save(path("c.json"), model);
  const auto back = std::get<clda::coda::CodaModel>(clda::model_io::load(path("c.json")));
  EXPECT_EQ(clda::coda::coda_predict(model, sim.test.x), clda::coda::coda_predict(back, sim.test.x));
  EXPECT_EQ(back.intercept, model.intercept);
}

TEST_F(IoTest, ModelSchemaErrors) {
  const auto bad = write("b.json", R"({"method":"clda","format":1})");
  EXPECT_THROW(clda::model_io::load(bad), clda::InputError);
  const auto unknown = write("u.json", R"({"method":"svm","format":1})");
  EXPECT_THROW(clda::model_io::load(unknown), clda::InputError);
  const auto broken = write("x.json", "{not json");
  EXPECT_THROW(clda::model_io::load(broken), clda::InputError);
}

TEST(Config, SimFields) {
  const auto s = clda::config::sim_from_json(
      nlohmann::json::parse(R"({"family":"mixture","structure":"gd","truncation":"none","p":20,"s":4,"alpha":0.1,"seed":3})"));
  EXPECT_EQ(s.sim.family, clda::simgen::Family::Mixture);
  EXPECT_EQ(s.sim.structure, clda::simgen::Structure::GD);
  EXPECT_EQ(s.sim.p, 20);
  EXPECT_EQ(s.sim.seed, 3u);
  EXPECT_FALSE(s.library);
}

TEST(Config, RejectsUnknownAndMistyped) {
  const auto msg = error_of([] { clda::config::sim_from_json(nlohmann::json::parse(R"({"pp":3})")); });
  EXPECT_NE(msg.find("pp"), std::string::npos);
  const auto typed = error_of([] { clda::config::tune_from_json(nlohmann::json::parse(R"({"n_folds":"five"})")); });
  EXPECT_NE(typed.find("n_folds"), std::string::npos);
  const auto nested = error_of([] {
    clda::config::bench_from_json(nlohmann::json::parse(R"({"scenarios":[{"p":10,"s":2},{"p":10,"bogus":1}]})"));
  });
  EXPECT_NE(nested.find("scenarios[1].bogus"), std::string::npos);
  EXPECT_THROW(clda::config::bench_from_json(nlohmann::json::parse(R"({"scenarios":[]})")), clda::InputError);
}

TEST(Config, TuneRoundTrip) {
  auto t = clda::config::tune_from_json(
      nlohmann::json::parse(R"({"n_lambdas":7,"intercept_grid":[-1,2,4],"rule":"mc","S":33,"seed":9})"));
  EXPECT_EQ(t.n_lambdas, 7);
  EXPECT_EQ(t.intercept_count, 4);
  EXPECT_EQ(t.final_rule.rule, clda::classify::Rule::MonteCarlo);
  EXPECT_EQ(t.final_rule.samples, 33);
  const auto again = clda::config::tune_from_json(clda::config::to_json(t));
  EXPECT_EQ(clda::config::to_json(again), clda::config::to_json(t));
}
