#include "sigscale/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <mutex>
#include <thread>
#include <tuple>

namespace sigscale::sim {

namespace {

constexpr std::uint64_t kTestSeedSalt = 0x7e57;

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(index) for index in [0, count) across a fixed pool. Work items
// must be independent; each writes only to its own output slot.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn) {
  const int pool = std::min<int>(threads, static_cast<int>(count));
  if (pool <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(pool));
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int t = 0; t < pool; ++t) {
    workers.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failed.load()) std::rethrow_exception(error);
}

std::uint64_t bits_of(double x) { return std::bit_cast<std::uint64_t>(x); }

}  // namespace

const marginals::MarginalModel& SimulationModel::marginal_of(
    const std::string& system_id) const {
  for (std::size_t i = 0; i < system_ids.size(); ++i) {
    if (system_ids[i] == system_id) return system_marginals[i];
  }
  throw SimError("unknown system '" + system_id + "'");
}

std::size_t SimulationModel::select_pair_for_delta(double delta) const {
  if (pairs.empty()) throw SimError("model has no fitted pairs");
  std::size_t best = effect_index.front();
  for (std::size_t idx : effect_index) {
    const Pair& cand = pairs[idx];
    const Pair& cur = pairs[best];
    const double cand_dist = std::abs(cand.mean_gap - delta);
    const double cur_dist = std::abs(cur.mean_gap - delta);
    if (cand_dist < cur_dist) {
      best = idx;
    } else if (cand_dist == cur_dist) {
      if (cand.mean_gap < cur.mean_gap ||
          (cand.mean_gap == cur.mean_gap &&
           std::tie(cand.system_b, cand.system_e) <
               std::tie(cur.system_b, cur.system_e))) {
        best = idx;
      }
    }
  }
  return best;
}

SimulationModel fit_simulation_model(const eval::EvaluationMatrix& matrix,
                                     const FitModelOptions& options) {
  matrix.validate();

  SimulationModel model;
  model.metric_name = matrix.metric_name;
  model.system_ids = matrix.system_ids;
  model.fit_seed = options.seed;

  const std::vector<marginals::Family> candidates =
      options.marginal_candidates.empty()
          ? marginals::default_candidates(matrix.metric_name)
          : options.marginal_candidates;
  marginals::FitOptions fit_options;
  fit_options.support = marginals::metric_support(matrix.metric_name);

  const std::size_t n_systems = matrix.n_systems();
  model.system_marginals.resize(n_systems, marginals::MarginalModel::discrete({0.0}, {1.0}));
  const int threads = resolve_threads(options.threads);

  {
    std::vector<std::string> failures(n_systems);
    parallel_for(n_systems, threads, [&](std::size_t s) {
      const std::vector<double> column = matrix.column(s);
      try {
        auto [m, report] = marginals::select_marginal(column, candidates, fit_options);
        (void)report;
        model.system_marginals[s] = std::move(m);
      } catch (const marginals::FitError& e) {
        failures[s] = e.what();
      }
    });
    for (std::size_t s = 0; s < n_systems; ++s) {
      if (!failures[s].empty()) {
        throw SimError("marginal fit failed for system '" + matrix.system_ids[s] +
                       "': " + failures[s]);
      }
    }
  }

  const std::vector<copulas::CopulaFamily> families =
      options.copula_families.empty() ? copulas::all_copula_families()
                                      : options.copula_families;

  std::vector<std::pair<std::size_t, std::size_t>> index_pairs;
  for (std::size_t i = 0; i < n_systems; ++i) {
    for (std::size_t j = i + 1; j < n_systems; ++j) index_pairs.emplace_back(i, j);
  }
  model.pairs.resize(index_pairs.size());
  {
    std::vector<std::string> failures(index_pairs.size());
    parallel_for(index_pairs.size(), threads, [&](std::size_t k) {
      const auto [i, j] = index_pairs[k];
      const std::vector<double> xi = matrix.column(i);
      const std::vector<double> xj = matrix.column(j);
      try {
        copulas::PseudoObservations pseudo;
        if (options.parametric_pit) {
          const auto& mi = model.system_marginals[i];
          const auto& mj = model.system_marginals[j];
          pseudo = copulas::pseudo_observations_cdf(
              xi, xj, [&](double x) { return mi.cdf(x); },
              [&](double x) { return mj.cdf(x); });
        } else {
          pseudo = copulas::pseudo_observations(xi, xj);
        }
        SimulationModel::Pair pair;
        // Orient the pair so that system_e has the higher fitted mean.
        const double mean_i = model.system_marginals[i].mean();
        const double mean_j = model.system_marginals[j].mean();
        const bool i_is_baseline = mean_i <= mean_j;
        pair.system_b = matrix.system_ids[i_is_baseline ? i : j];
        pair.system_e = matrix.system_ids[i_is_baseline ? j : i];
        pair.mean_gap = std::abs(mean_j - mean_i);
        pair.copula = copulas::fit_copula(pseudo, families);
        model.pairs[k] = std::move(pair);
      } catch (const std::exception& e) {
        failures[k] = e.what();
      }
    });
    for (std::size_t k = 0; k < index_pairs.size(); ++k) {
      if (!failures[k].empty()) {
        const auto [i, j] = index_pairs[k];
        throw SimError("copula fit failed for pair ('" + matrix.system_ids[i] +
                       "', '" + matrix.system_ids[j] + "'): " + failures[k]);
      }
    }
  }

  model.effect_index.resize(model.pairs.size());
  for (std::size_t k = 0; k < model.pairs.size(); ++k) model.effect_index[k] = k;
  std::sort(model.effect_index.begin(), model.effect_index.end(),
            [&](std::size_t a, std::size_t b) {
              if (model.pairs[a].mean_gap != model.pairs[b].mean_gap) {
                return model.pairs[a].mean_gap < model.pairs[b].mean_gap;
              }
              return std::tie(model.pairs[a].system_b, model.pairs[a].system_e) <
                     std::tie(model.pairs[b].system_b, model.pairs[b].system_e);
            });
  return model;
}

void simulate_null_pair(const SimulationModel& model, std::size_t pair_index,
                        std::size_t n, Rng& rng, std::vector<double>& b,
                        std::vector<double>& e) {
  if (pair_index >= model.pairs.size()) throw SimError("pair index out of range");
  const SimulationModel::Pair& pair = model.pairs[pair_index];
  const marginals::MarginalModel& fb = model.marginal_of(pair.system_b);
  b.resize(n);
  e.resize(n);
  double u = 0.0;
  double v = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    copulas::sample_pair(pair.copula, rng, u, v);
    b[i] = fb.inverse_cdf(u);
    e[i] = fb.inverse_cdf(v);
  }
}

namespace {

struct EffectSetup {
  std::size_t pair_index;
  const marginals::MarginalModel* baseline;
  marginals::MarginalModel experimental;
};

EffectSetup prepare_effect_pair(const SimulationModel& model, double delta) {
  if (delta < 0.0) throw SimError("delta must be >= 0");
  const std::size_t idx = model.select_pair_for_delta(delta);
  const SimulationModel::Pair& pair = model.pairs[idx];
  const marginals::MarginalModel& fb = model.marginal_of(pair.system_b);
  const marginals::MarginalModel& fe = model.marginal_of(pair.system_e);
  const double target = fb.mean() + delta;
  if (target >= 1.0) {
    throw SimError("target mean " + std::to_string(target) +
                   " out of range for delta " + std::to_string(delta));
  }
  return {idx, &fb, marginals::transform_mean(fe, target)};
}

void simulate_effect_scores(const SimulationModel& model, const EffectSetup& setup,
                            std::size_t n, Rng& rng, std::vector<double>& b,
                            std::vector<double>& e) {
  const SimulationModel::Pair& pair = model.pairs[setup.pair_index];
  b.resize(n);
  e.resize(n);
  double u = 0.0;
  double v = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    copulas::sample_pair(pair.copula, rng, u, v);
    b[i] = setup.baseline->inverse_cdf(u);
    e[i] = setup.experimental.inverse_cdf(v);
  }
}

}  // namespace

void simulate_effect_pair(const SimulationModel& model, const EffectSpec& spec,
                          std::size_t n, Rng& rng, std::vector<double>& b,
                          std::vector<double>& e) {
  const EffectSetup setup = prepare_effect_pair(model, spec.delta);
  simulate_effect_scores(model, setup, n, rng, b, e);
}

void ExperimentConfig::validate() const {
  if (sample_sizes.empty()) throw SimError("empty sample-size grid");
  for (std::size_t n : sample_sizes) {
    if (n < 2) throw SimError("sample size must be >= 2");
  }
  if (trials < 100) throw SimError("trials must be >= 100");
  if (alphas.empty()) throw SimError("empty alpha grid");
  for (double a : alphas) {
    if (!(a > 0.0 && a < 1.0)) {
      throw SimError("alpha must lie in (0,1), got " + std::to_string(a));
    }
  }
  for (double d : deltas) {
    if (d < 0.0) throw SimError("delta must be >= 0");
  }
  if (tests.empty()) throw SimError("empty test set");
}

namespace {

// Shared trial loop for both experiment kinds. For each (n, delta) block,
// runs `trials` independent simulations and collects one p-value per
// configured test, in trial order.
ExperimentReport run_experiment(const SimulationModel& model,
                                const ExperimentConfig& cfg,
                                const std::vector<double>& deltas, bool null_mode) {
  cfg.validate();
  if (model.pairs.empty()) throw SimError("model has no fitted pairs");

  const int threads = resolve_threads(cfg.threads);
  ExperimentReport report;

  for (double delta : deltas) {
    std::optional<EffectSetup> effect;
    if (!null_mode) effect.emplace(prepare_effect_pair(model, delta));
    for (std::size_t n : cfg.sample_sizes) {
      // p_values[test][trial]
      std::vector<std::vector<double>> p_values(
          cfg.tests.size(), std::vector<double>(cfg.trials));

      parallel_for(cfg.trials, threads, [&](std::size_t trial) {
        const std::uint64_t stream =
            null_mode
                ? derive_stream({cfg.seed, static_cast<std::uint64_t>(n), trial})
                : derive_stream({cfg.seed, static_cast<std::uint64_t>(n),
                                 bits_of(delta), trial});
        Rng rng(stream);
        std::vector<double> b;
        std::vector<double> e;
        if (null_mode) {
          const std::size_t pair_index = rng.uniform_int(model.pairs.size());
          simulate_null_pair(model, pair_index, n, rng, b, e);
        } else {
          simulate_effect_scores(model, *effect, n, rng, b, e);
        }
        std::vector<double> diff(n);
        for (std::size_t i = 0; i < n; ++i) diff[i] = e[i] - b[i];
        const stats::DifferenceVector d(std::move(diff));
        stats::ResamplingConfig resampling = cfg.resampling;
        resampling.seed = derive_stream({stream, kTestSeedSalt});
        for (std::size_t t = 0; t < cfg.tests.size(); ++t) {
          stats::TestResult result;
          switch (cfg.tests[t]) {
            case stats::TestName::t: result = stats::t_test_paired(d); break;
            case stats::TestName::bootstrap:
              result = stats::bootstrap_shift_test(d, resampling);
              break;
            case stats::TestName::randomization:
              result = stats::randomization_test(d, resampling);
              break;
            case stats::TestName::sign: result = stats::sign_test(d); break;
            case stats::TestName::wilcoxon:
              result = stats::wilcoxon_signed_rank(d, resampling);
              break;
          }
          p_values[t][trial] = result.p_value;
        }
      });

      for (std::size_t t = 0; t < cfg.tests.size(); ++t) {
        for (double alpha : cfg.alphas) {
          std::size_t rejected = 0;
          for (double p : p_values[t]) {
            if (p <= alpha) ++rejected;
          }
          ReportRow row;
          row.test = cfg.tests[t];
          row.n = n;
          row.alpha = alpha;
          row.delta = delta;
          row.trials = cfg.trials;
          row.rejection_rate =
              static_cast<double>(rejected) / static_cast<double>(cfg.trials);
          row.monte_carlo_se = std::sqrt(row.rejection_rate *
                                         (1.0 - row.rejection_rate) /
                                         static_cast<double>(cfg.trials));
          report.rows.push_back(row);
        }
        if (cfg.archive_pvalues) {
          report.archive.push_back(
              {cfg.tests[t], n, delta, std::move(p_values[t])});
        }
      }
      if (cfg.progress) {
        cfg.progress("n=" + std::to_string(n) +
                     (null_mode ? "" : " delta=" + std::to_string(delta)) +
                     " done (" + std::to_string(cfg.trials) + " trials)");
      }
    }
  }
  return report;
}

}  // namespace

ExperimentReport type1_experiment(const SimulationModel& model,
                                  const ExperimentConfig& cfg) {
  return run_experiment(model, cfg, {0.0}, /*null_mode=*/true);
}

ExperimentReport power_experiment(const SimulationModel& model,
                                  const ExperimentConfig& cfg) {
  if (cfg.deltas.empty()) throw SimError("power experiment needs a delta grid");
  return run_experiment(model, cfg, cfg.deltas, /*null_mode=*/false);
}

std::vector<std::pair<double, double>> calibration_curve(
    const ExperimentReport& report, stats::TestName test, std::size_t n,
    std::size_t grid_points) {
  const ArchiveBlock* block = nullptr;
  for (const auto& candidate : report.archive) {
    if (candidate.test == test && candidate.n == n) {
      block = &candidate;
      break;
    }
  }
  if (block == nullptr) {
    throw SimError("no archived p-values for test '" + stats::test_label(test) +
                   "' at n=" + std::to_string(n) +
                   " (run the experiment with the archive enabled)");
  }
  std::vector<double> sorted = block->p_values;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> curve;
  curve.reserve(grid_points);
  for (std::size_t i = 1; i <= grid_points; ++i) {
    const double alpha = static_cast<double>(i) / static_cast<double>(grid_points);
    const auto count = std::upper_bound(sorted.begin(), sorted.end(), alpha) -
                       sorted.begin();
    curve.emplace_back(alpha, static_cast<double>(count) /
                                  static_cast<double>(sorted.size()));
  }
  return curve;
}

}  // namespace sigscale::sim
