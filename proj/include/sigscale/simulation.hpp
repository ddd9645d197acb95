#ifndef SIGSCALE_SIMULATION_HPP
#define SIGSCALE_SIMULATION_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sigscale/copulas.hpp"
#include "sigscale/eval.hpp"
#include "sigscale/marginals.hpp"
#include "sigscale/rng.hpp"
#include "sigscale/stat_tests.hpp"

namespace sigscale::sim {

class SimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The generative model: one marginal per system, one copula per system pair,
// and an index of pairwise mean gaps for effect-size pair selection.
struct SimulationModel {
  struct Pair {
    std::string system_b;  // lower fitted mean
    std::string system_e;  // higher fitted mean
    copulas::CopulaModel copula;
    double mean_gap = 0.0;  // mean(e) - mean(b) >= 0
  };

  std::vector<std::string> system_ids;
  std::vector<marginals::MarginalModel> system_marginals;  // aligned with system_ids
  std::vector<Pair> pairs;
  std::vector<std::size_t> effect_index;  // pair indices sorted by mean_gap
  std::string metric_name;
  std::uint64_t fit_seed = 0;

  const marginals::MarginalModel& marginal_of(const std::string& system_id) const;
  // Pair whose mean gap is nearest delta; ties prefer the smaller gap, then
  // the lexicographically smallest (system_b, system_e).
  std::size_t select_pair_for_delta(double delta) const;
};

struct FitModelOptions {
  // Empty selects the metric-aware defaults.
  std::vector<marginals::Family> marginal_candidates;
  std::vector<copulas::CopulaFamily> copula_families;
  // Pseudo-observations through the fitted marginal CDFs instead of ranks.
  bool parametric_pit = false;
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = hardware concurrency
};

SimulationModel fit_simulation_model(const eval::EvaluationMatrix& matrix,
                                     const FitModelOptions& options = {});

// Target mean improvement mu_e = mu_b + delta; delta = 0 is the null
// scenario with equal means.
struct EffectSpec {
  double delta = 0.0;
};

// Draws n dependent pairs from the pair's copula and maps both coordinates
// through the same marginal F_B, which makes the two systems' effectiveness
// identical by construction.
void simulate_null_pair(const SimulationModel& model, std::size_t pair_index,
                        std::size_t n, Rng& rng, std::vector<double>& b,
                        std::vector<double>& e);

// Pair selected by mean gap nearest delta; the E marginal is transformed to
// mean(F_B) + delta exactly before sampling.
void simulate_effect_pair(const SimulationModel& model, const EffectSpec& spec,
                          std::size_t n, Rng& rng, std::vector<double>& b,
                          std::vector<double>& e);

struct ExperimentConfig {
  std::vector<std::size_t> sample_sizes;
  std::size_t trials = 2000;
  std::vector<double> alphas = {0.01, 0.05, 0.1};
  std::vector<double> deltas;  // power experiments only
  std::uint64_t seed = 0;
  std::vector<stats::TestName> tests = stats::all_test_names();
  stats::ResamplingConfig resampling;
  bool archive_pvalues = false;
  int threads = 0;
  // Progress sink, called once per completed (n, delta) block.
  std::function<void(const std::string&)> progress;

  void validate() const;  // throws SimError
};

struct ReportRow {
  stats::TestName test;
  std::size_t n = 0;
  double alpha = 0.0;
  double delta = 0.0;
  double rejection_rate = 0.0;
  std::size_t trials = 0;
  double monte_carlo_se = 0.0;
};

// Raw p-values for one (test, n, delta) block, in trial order.
struct ArchiveBlock {
  stats::TestName test;
  std::size_t n = 0;
  double delta = 0.0;
  std::vector<double> p_values;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
  std::vector<ArchiveBlock> archive;  // populated when cfg.archive_pvalues
};

// Null-scenario rejection rates: every trial simulates a same-marginal pair
// (rotating over fitted pairs) and runs the configured tests.
ExperimentReport type1_experiment(const SimulationModel& model,
                                  const ExperimentConfig& cfg);

// Effect-scenario rejection rates (power) over the delta grid.
ExperimentReport power_experiment(const SimulationModel& model,
                                  const ExperimentConfig& cfg);

// Empirical CDF of archived p-values on an alpha grid.
std::vector<std::pair<double, double>> calibration_curve(
    const ExperimentReport& report, stats::TestName test, std::size_t n,
    std::size_t grid_points = 100);

}  // namespace sigscale::sim

#endif  // SIGSCALE_SIMULATION_HPP
