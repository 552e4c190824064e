#pragma once

// Replicated simulation benchmark: simulate, fit each method, score the
// held-out draw.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clda/coda.hpp"
#include "clda/simgen.hpp"
#include "clda/tune.hpp"

namespace clda::bench {

inline const std::vector<std::string> kMethods = {"oracle", "clda_linear", "clda_mc", "coda"};

struct ReplicateResult {
  int replicate = 0;
  std::vector<std::string> methods;
  std::vector<double> errors;  // parallel to methods
  std::size_t clda_support = 0;
  std::size_t coda_support = 0;

  double error(const std::string& method) const;
};

// Replicate r of a scenario uses derive_seed(sim.seed, r) for the data,
// CV folds and posterior draws.
ReplicateResult run_replicate(const simgen::SimConfig& sim, const tune::TuneConfig& tune_cfg,
                              const coda::CodaConfig& coda_cfg, const std::vector<std::string>& methods,
                              int replicate, const std::optional<simgen::MarginalLibrary>& library = std::nullopt);

// Replicates run in parallel on `threads` workers; each replicate is
// single-threaded, so results do not depend on the thread count.
std::vector<ReplicateResult> run(const simgen::SimConfig& sim, const tune::TuneConfig& tune_cfg,
                                 const coda::CodaConfig& coda_cfg, const std::vector<std::string>& methods,
                                 int replicates, int threads,
                                 const std::optional<simgen::MarginalLibrary>& library = std::nullopt);

struct Summary {
  std::string method;
  double mean = 0.0;
  double se = 0.0;
  int count = 0;
};

std::vector<Summary> summarize(const std::vector<ReplicateResult>& results);

}  // namespace clda::bench
