#include "clda/bench.hpp"

#include <algorithm>
#include <cmath>

#include "clda/classify.hpp"
#include "clda/errors.hpp"
#include "clda/parallel.hpp"
#include "clda/rng.hpp"

namespace clda::bench {

double ReplicateResult::error(const std::string& method) const {
  const auto it = std::find(methods.begin(), methods.end(), method);
  if (it == methods.end()) throw std::out_of_range("no result for method " + method);
  return errors[static_cast<std::size_t>(it - methods.begin())];
}

ReplicateResult run_replicate(const simgen::SimConfig& sim, const tune::TuneConfig& tune_cfg,
                              const coda::CodaConfig& coda_cfg, const std::vector<std::string>& methods,
                              int replicate, const std::optional<simgen::MarginalLibrary>& library) {
  for (const auto& m : methods) {
    if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end()) {
      throw InputError("unknown benchmark method '" + m + "'");
    }
  }
  const std::uint64_t seed = derive_seed(sim.seed, static_cast<std::uint64_t>(replicate));
  simgen::SimConfig sc = sim;
  sc.seed = seed;
  const auto data = simgen::generate(sc, library);

  ReplicateResult r;
  r.replicate = replicate;
  auto wants = [&](const char* m) { return std::find(methods.begin(), methods.end(), m) != methods.end(); };

  std::vector<int> linear, mc;
  if (wants("clda_linear") || wants("clda_mc")) {
    tune::TuneConfig tc = tune_cfg;
    tc.seed = derive_seed(seed, 0x71);
    tc.threads = 1;
    const auto fit = tune::fit(data.train, tc);
    r.clda_support = static_cast<std::size_t>((fit.model.beta.array() != 0.0).count());
    const auto post = classify::posterior_batch(fit.model, data.test.x, derive_seed(seed, 0x72), 1);
    for (const auto& p : post) {
      linear.push_back(classify::decide(p.linear));
      mc.push_back(classify::decide(p.mc));
    }
  }
  std::vector<int> coda_pred;
  if (wants("coda")) {
    coda::CodaConfig cc = coda_cfg;
    cc.seed = derive_seed(seed, 0x73);
    cc.threads = 1;
    const auto fit = coda::coda_fit_cv(data.train, cc);
    r.coda_support = static_cast<std::size_t>((fit.model.beta.array() != 0.0).count());
    coda_pred = coda::coda_predict(fit.model, data.test.x);
  }

  for (const auto& m : methods) {
    r.methods.push_back(m);
    if (m == "oracle") {
      r.errors.push_back(simgen::error_rate(simgen::oracle_classify(data.oracle, data.test_latent), data.test.labels));
    } else if (m == "clda_linear") {
      r.errors.push_back(simgen::error_rate(linear, data.test.labels));
    } else if (m == "clda_mc") {
      r.errors.push_back(simgen::error_rate(mc, data.test.labels));
    } else {
      r.errors.push_back(simgen::error_rate(coda_pred, data.test.labels));
    }
  }
  return r;
}

std::vector<ReplicateResult> run(const simgen::SimConfig& sim, const tune::TuneConfig& tune_cfg,
                                 const coda::CodaConfig& coda_cfg, const std::vector<std::string>& methods,
                                 int replicates, int threads,
                                 const std::optional<simgen::MarginalLibrary>& library) {
  if (replicates < 1) throw InputError("replicates must be at least 1");
  std::vector<ReplicateResult> out(static_cast<std::size_t>(replicates));
  parallel_for(out.size(), threads, [&](std::size_t r) {
    out[r] = run_replicate(sim, tune_cfg, coda_cfg, methods, static_cast<int>(r), library);
  });
  return out;
}

std::vector<Summary> summarize(const std::vector<ReplicateResult>& results) {
  std::vector<Summary> out;
  if (results.empty()) return out;
  for (std::size_t k = 0; k < results.front().methods.size(); ++k) {
    Summary s;
    s.method = results.front().methods[k];
    s.count = static_cast<int>(results.size());
    double sum = 0.0, sq = 0.0;
    for (const auto& r : results) sum += r.errors[k];
    s.mean = sum / s.count;
    for (const auto& r : results) sq += (r.errors[k] - s.mean) * (r.errors[k] - s.mean);
    s.se = s.count > 1 ? std::sqrt(sq / (s.count - 1) / s.count) : 0.0;
    out.push_back(s);
  }
  return out;
}

}  // namespace clda::bench
