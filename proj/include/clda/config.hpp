#pragma once

// JSON configuration files for the command-line tool. Unknown fields and
// wrong types are rejected with the field path.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "clda/coda.hpp"
#include "clda/simgen.hpp"
#include "clda/tune.hpp"

namespace clda::config {

using Json = nlohmann::json;

Json parse_file(const std::string& path);

struct SimSettings {
  simgen::SimConfig sim;
  std::optional<std::string> library;  // CSV of marginal tables
};

SimSettings sim_from_json(const Json& j, const std::string& where = "");
tune::TuneConfig tune_from_json(const Json& j, const std::string& where = "");
coda::CodaConfig coda_from_json(const Json& j, const std::string& where = "");

struct BenchSettings {
  std::vector<SimSettings> scenarios;
  int replicates = 1;
  std::vector<std::string> methods;
  tune::TuneConfig tune;
  coda::CodaConfig coda;
};

BenchSettings bench_from_json(const Json& j);

Json to_json(const simgen::SimConfig& c);
Json to_json(const tune::TuneConfig& c);
Json to_json(const coda::CodaConfig& c);

}  // namespace clda::config
