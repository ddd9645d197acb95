// sigscale: paired significance tests and copula-based simulation for large
// search / top-N recommendation evaluation matrices.
//
// Subcommands:
//   eval    score run files against qrels and emit a CSV evaluation matrix
//   test    run the five paired tests on two systems of a matrix
//   fit     fit the generative simulation model to a matrix
//   type1   measure false-positive rates under the null
//   power   measure power over an effect-size grid
//   report  turn report/archive files into plot-ready CSV

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sigscale/eval.hpp"
#include "sigscale/model_io.hpp"
#include "sigscale/simulation.hpp"
#include "sigscale/stat_tests.hpp"

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat-JSON config files: {"flag": value, ...} mirroring the long options.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool,
                        std::string) const override {
    json j;
    for (const CLI::Option* opt : app->get_options({})) {
      if (!opt->get_lnames().empty() && opt->get_configurable()) {
        const std::string name = opt->get_lnames()[0];
        if (opt->count() == 1) {
          j[name] = opt->results().at(0);
        } else if (opt->count() > 1) {
          j[name] = opt->results();
        } else if (default_also && !opt->get_default_str().empty()) {
          j[name] = opt->get_default_str();
        }
      }
    }
    return j.dump(2);
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    input >> j;
    if (!j.is_object()) throw CLI::FileError("config must be a JSON object");
    std::vector<CLI::ConfigItem> output;
    collect(j, {}, output);
    return output;
  }

 private:
  // Nested objects address subcommands: {"type1": {"seed": 7}}.
  static void collect(const json& j, std::vector<std::string> parents,
                      std::vector<CLI::ConfigItem>& output) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto deeper = parents;
        deeper.push_back(key);
        collect(value, deeper, output);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& entry : value) {
          item.inputs.push_back(entry.is_string() ? entry.get<std::string>()
                                                  : entry.dump());
        }
      } else if (value.is_string()) {
        item.inputs.push_back(value.get<std::string>());
      } else {
        item.inputs.push_back(value.dump());
      }
      output.push_back(std::move(item));
    }
  }
};

// Grid syntax: comma list "25,100" or inclusive range "start:stop:step".
std::vector<double> parse_double_grid(const std::string& text) {
  std::vector<double> values;
  if (text.find(':') != std::string::npos) {
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;
    char c1 = 0;
    char c2 = 0;
    std::istringstream in(text);
    if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' ||
        step <= 0.0) {
      throw UsageError("bad grid '" + text + "' (expected start:stop:step)");
    }
    const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9));
    for (long i = 0; i <= count; ++i) {
      // Snap to 12 significant digits so 0.01 * i prints as expected.
      const double raw = start + static_cast<double>(i) * step;
      values.push_back(std::round(raw * 1e12) / 1e12);
    }
  } else {
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      if (tok.empty()) continue;
      try {
        values.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw UsageError("bad number '" + tok + "' in grid '" + text + "'");
      }
    }
  }
  if (values.empty()) throw UsageError("empty grid '" + text + "'");
  return values;
}

std::vector<std::size_t> parse_size_grid(const std::string& text) {
  std::vector<std::size_t> out;
  for (double v : parse_double_grid(text)) {
    if (v < 1.0 || v != std::floor(v)) {
      throw UsageError("grid '" + text + "' must contain positive integers");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

std::vector<sigscale::stats::TestName> parse_tests(const std::string& text) {
  if (text == "all") return sigscale::stats::all_test_names();
  std::vector<sigscale::stats::TestName> out;
  std::istringstream in(text);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    if (tok.empty()) continue;
    try {
      out.push_back(sigscale::stats::test_from_string(tok));
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) throw UsageError("empty test list");
  return out;
}

// "-" writes to standard output.
void write_text(const std::string& path, const std::string& body) {
  if (path == "-") {
    std::cout << body;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write output file: " + path);
  out << body;
}

int env_threads() {
  const char* env = std::getenv("SIGSCALE_THREADS");
  if (env == nullptr) return 0;
  try {
    return std::max(0, std::stoi(env));
  } catch (const std::exception&) {
    return 0;
  }
}

struct ExperimentFlags {
  std::string model_path;
  std::string out = "-";
  std::string archive_path;
  std::string n_grid = "25,50,100,500,1000,5000,10000,20000";
  std::string alphas = "0.01,0.05,0.1";
  std::string deltas = "0.01:0.1:0.01";
  std::string tests = "all";
  std::string format = "csv";
  std::size_t trials = 0;  // 0 = default for the experiment kind
  std::uint64_t seed = 0;
  std::uint32_t bootstrap_samples = 10000;
  std::uint32_t randomization_samples = 10000;
  std::uint32_t exact_threshold = 20;
  int threads = -1;  // -1 = env/hardware
  bool paper_scale = false;
};

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& flags, bool with_deltas) {
  cmd->add_option("--model", flags.model_path, "model bundle from `fit`")->required();
  cmd->add_option("--out", flags.out, "output path, - for stdout");
  cmd->add_option("--archive", flags.archive_path,
                  "also write raw p-values to this CSV file");
  cmd->add_option("--n", flags.n_grid, "sample-size grid (list or start:stop:step)");
  cmd->add_option("--alphas", flags.alphas, "significance levels");
  if (with_deltas) cmd->add_option("--deltas", flags.deltas, "effect-size grid");
  cmd->add_option("--tests", flags.tests, "comma list of tests, or 'all'");
  cmd->add_option("--trials", flags.trials, "trials per configuration");
  cmd->add_option("--seed", flags.seed, "random seed; all randomness flows from it");
  cmd->add_option("--bootstrap-samples", flags.bootstrap_samples, "bootstrap resamples B");
  cmd->add_option("--randomization-samples", flags.randomization_samples,
                  "Monte-Carlo sign flips R");
  cmd->add_option("--exact-threshold", flags.exact_threshold,
                  "exact enumeration when 2^n <= 2^threshold");
  cmd->add_option("--threads", flags.threads, "worker threads (default: all cores)");
  cmd->add_flag("--paper-scale", flags.paper_scale,
                "use 10,000 null / 2,500 power trials per configuration");
  cmd->add_option("--format", flags.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
}

sigscale::sim::ExperimentConfig experiment_config(const ExperimentFlags& flags,
                                                  bool power) {
  sigscale::sim::ExperimentConfig cfg;
  cfg.sample_sizes = parse_size_grid(flags.n_grid);
  cfg.alphas = parse_double_grid(flags.alphas);
  if (power) cfg.deltas = parse_double_grid(flags.deltas);
  cfg.tests = parse_tests(flags.tests);
  if (flags.trials > 0) {
    cfg.trials = flags.trials;
  } else if (flags.paper_scale) {
    cfg.trials = power ? 2500 : 10000;
  } else {
    cfg.trials = power ? 500 : 2000;
  }
  cfg.seed = flags.seed;
  cfg.resampling.bootstrap_samples = flags.bootstrap_samples;
  cfg.resampling.randomization_samples = flags.randomization_samples;
  cfg.resampling.exact_threshold = flags.exact_threshold;
  cfg.archive_pvalues = !flags.archive_path.empty();
  cfg.threads = flags.threads >= 0 ? flags.threads : env_threads();
  cfg.progress = [](const std::string& msg) { std::cerr << msg << '\n'; };
  return cfg;
}

void emit_report(const sigscale::sim::ExperimentReport& report,
                 const ExperimentFlags& flags) {
  std::ostringstream body;
  if (flags.format == "json") {
    body << sigscale::io::report_to_json(report).dump(2) << '\n';
  } else {
    sigscale::io::write_report_csv(report, body);
  }
  write_text(flags.out, body.str());
  if (!flags.archive_path.empty()) {
    std::ostringstream archive;
    sigscale::io::write_archive_csv(report, archive);
    write_text(flags.archive_path, archive.str());
  }
}

int cmd_eval(const std::string& runs_path, const std::string& qrels_path,
             const std::string& metric, int k, int rel_threshold,
             const std::string& coverage, const std::string& out) {
  const auto runs = sigscale::eval::parse_trec_runs(runs_path);
  const auto qrels = sigscale::eval::parse_qrels(qrels_path);
  const auto policy = coverage == "intersect"
                          ? sigscale::eval::CoveragePolicy::intersect
                          : sigscale::eval::CoveragePolicy::strict;
  const auto matrix = sigscale::eval::build_matrix(
      runs, qrels, sigscale::eval::metric_from_string(metric), k, policy,
      rel_threshold);
  std::ostringstream body;
  sigscale::eval::write_csv_matrix(matrix, body);
  write_text(out, body.str());
  std::cerr << "scored " << matrix.n_systems() << " systems over "
            << matrix.n_requests() << " requests (" << matrix.metric_name << ")\n";
  return 0;
}

int cmd_test(const std::string& matrix_path, const std::string& system_b,
             const std::string& system_e, const ExperimentFlags& flags) {
  const auto matrix = sigscale::eval::parse_csv_matrix(matrix_path);
  const int ib = matrix.system_index(system_b);
  if (ib < 0) throw UsageError("unknown system id '" + system_b + "'");
  const int ie = matrix.system_index(system_e);
  if (ie < 0) throw UsageError("unknown system id '" + system_e + "'");

  sigscale::stats::ResamplingConfig cfg;
  cfg.bootstrap_samples = flags.bootstrap_samples;
  cfg.randomization_samples = flags.randomization_samples;
  cfg.exact_threshold = flags.exact_threshold;
  cfg.seed = flags.seed;
  const auto results = sigscale::stats::run_all_tests(
      matrix.column(static_cast<std::size_t>(ib)),
      matrix.column(static_cast<std::size_t>(ie)), cfg);

  std::ostringstream body;
  if (flags.format == "json") {
    json j;
    for (const auto& [name, r] : results) {
      j[sigscale::stats::test_label(name)] = {
          {"statistic", r.statistic},
          {"p_value", r.p_value},
          {"method", sigscale::stats::method_label(r.method)},
          {"resamples_used", r.resamples_used},
          {"effective_n", r.effective_n}};
    }
    body << j.dump(2) << '\n';
  } else {
    body << "test,statistic,p_value,method,resamples_used,effective_n\n";
    for (const auto& [name, r] : results) {
      body << sigscale::stats::test_label(name) << ','
           << sigscale::io::format_number(r.statistic) << ','
           << sigscale::io::format_number(r.p_value) << ','
           << sigscale::stats::method_label(r.method) << ',' << r.resamples_used
           << ',' << r.effective_n << '\n';
    }
  }
  write_text(flags.out, body.str());
  return 0;
}

int cmd_fit(const std::string& matrix_path, const std::string& metric, int k,
            const std::string& pit, std::uint64_t seed, int threads,
            const std::string& out) {
  auto matrix = sigscale::eval::parse_csv_matrix(matrix_path);
  matrix.metric_name = sigscale::eval::metric_label(
      sigscale::eval::metric_from_string(metric), k);

  sigscale::sim::FitModelOptions options;
  options.parametric_pit = pit == "parametric";
  options.seed = seed;
  options.threads = threads >= 0 ? threads : env_threads();
  const auto model = sigscale::sim::fit_simulation_model(matrix, options);
  sigscale::io::save_model(model, out);
  std::cerr << "fitted " << model.system_ids.size() << " marginals and "
            << model.pairs.size() << " copulas\n";
  return 0;
}

int cmd_report(const std::string& input, const std::string& kind, double alpha,
               const std::string& out) {
  std::ifstream in(input);
  if (!in) throw UsageError("cannot open report file: " + input);
  std::ostringstream body;
  if (kind == "calibration") {
    sigscale::sim::ExperimentReport report;
    try {
      report = sigscale::io::read_archive_csv(in);
    } catch (const sigscale::sim::SimError& e) {
      throw UsageError(e.what());  // kind/file mismatch is a usage problem
    }
    if (report.archive.empty()) throw UsageError("archive file has no p-values");
    for (const auto& block : report.archive) {
      if (block.delta != 0.0) {
        throw UsageError("calibration needs a null (delta = 0) archive");
      }
    }
    body << "test,n,alpha,rate\n";
    for (const auto& block : report.archive) {
      const auto curve = sigscale::sim::calibration_curve(
          {{}, {block}}, block.test, block.n);
      for (const auto& [a, rate] : curve) {
        body << sigscale::stats::test_label(block.test) << ',' << block.n << ','
             << sigscale::io::format_number(a) << ','
             << sigscale::io::format_number(rate) << '\n';
      }
    }
  } else if (kind == "power-curve") {
    sigscale::sim::ExperimentReport report;
    try {
      report = sigscale::io::read_report_csv(in);
    } catch (const sigscale::sim::SimError& e) {
      throw UsageError(e.what());
    }
    if (report.rows.empty()) throw UsageError("report file has no rows");
    body << "test,n,delta,power\n";
    bool any = false;
    for (const auto& row : report.rows) {
      if (std::abs(row.alpha - alpha) <= 1e-12) {
        body << sigscale::stats::test_label(row.test) << ',' << row.n << ','
             << sigscale::io::format_number(row.delta) << ','
             << sigscale::io::format_number(row.rejection_rate) << '\n';
        any = true;
      }
    }
    if (!any) {
      throw UsageError("report has no rows at alpha=" + std::to_string(alpha));
    }
  } else {
    throw UsageError("unknown report kind '" + kind + "'");
  }
  write_text(out, body.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"paired significance testing and simulation for large-scale "
               "retrieval/recommendation evaluation"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file mirroring the flags");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score runs against qrels");
  std::string runs_path;
  std::string qrels_path;
  std::string eval_metric = "rr";
  int eval_k = 10;
  int rel_threshold = 1;
  std::string coverage = "strict";
  std::string eval_out = "-";
  eval_cmd->add_option("--runs", runs_path, "TREC run file")->required();
  eval_cmd->add_option("--qrels", qrels_path, "relevance judgments")->required();
  eval_cmd->add_option("--metric", eval_metric, "rr or ndcg")
      ->check(CLI::IsMember({"rr", "ndcg"}));
  eval_cmd->add_option("--k", eval_k, "rank cutoff")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--rel-threshold", rel_threshold,
                       "minimum grade counted as relevant (rr)");
  eval_cmd->add_option("--coverage", coverage, "strict or intersect")
      ->check(CLI::IsMember({"strict", "intersect"}));
  eval_cmd->add_option("--out", eval_out, "output CSV path, - for stdout");

  // test
  auto* test_cmd = app.add_subcommand("test", "run the five paired tests");
  std::string matrix_path;
  std::string system_b;
  std::string system_e;
  ExperimentFlags test_flags;
  test_cmd->add_option("--matrix", matrix_path, "CSV evaluation matrix")->required();
  test_cmd->add_option("--system-b", system_b, "baseline system id")->required();
  test_cmd->add_option("--system-e", system_e, "experimental system id")->required();
  test_cmd->add_option("--seed", test_flags.seed, "random seed");
  test_cmd->add_option("--bootstrap-samples", test_flags.bootstrap_samples,
                       "bootstrap resamples B");
  test_cmd->add_option("--randomization-samples", test_flags.randomization_samples,
                       "Monte-Carlo sign flips R");
  test_cmd->add_option("--exact-threshold", test_flags.exact_threshold,
                       "exact enumeration when 2^n <= 2^threshold");
  test_cmd->add_option("--format", test_flags.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  test_cmd->add_option("--out", test_flags.out, "output path, - for stdout");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit the simulation model");
  std::string fit_matrix;
  std::string fit_metric = "rr";
  int fit_k = 10;
  std::string pit = "rank";
  std::uint64_t fit_seed = 0;
  int fit_threads = -1;
  std::string fit_out = "model.json";
  fit_cmd->add_option("--matrix", fit_matrix, "CSV evaluation matrix")->required();
  fit_cmd->add_option("--metric", fit_metric, "metric that produced the matrix")
      ->check(CLI::IsMember({"rr", "ndcg"}));
  fit_cmd->add_option("--k", fit_k, "rank cutoff of the metric")
      ->check(CLI::PositiveNumber);
  fit_cmd->add_option("--pit", pit, "rank or parametric pseudo-observations")
      ->check(CLI::IsMember({"rank", "parametric"}));
  fit_cmd->add_option("--seed", fit_seed, "seed recorded in the bundle");
  fit_cmd->add_option("--threads", fit_threads, "worker threads");
  fit_cmd->add_option("--out", fit_out, "model bundle path");

  // type1 / power
  auto* type1_cmd = app.add_subcommand("type1", "false-positive rates under the null");
  ExperimentFlags type1_flags;
  add_experiment_flags(type1_cmd, type1_flags, /*with_deltas=*/false);
  auto* power_cmd = app.add_subcommand("power", "power over an effect-size grid");
  ExperimentFlags power_flags;
  add_experiment_flags(power_cmd, power_flags, /*with_deltas=*/true);

  // report
  auto* report_cmd = app.add_subcommand("report", "plot-ready CSV from results");
  std::string report_input;
  std::string report_kind;
  double report_alpha = 0.05;
  std::string report_out = "-";
  report_cmd->add_option("--input", report_input, "report or archive CSV")->required();
  report_cmd->add_option("--kind", report_kind, "calibration or power-curve")
      ->required()
      ->check(CLI::IsMember({"calibration", "power-curve"}));
  report_cmd->add_option("--alpha", report_alpha, "level for power curves");
  report_cmd->add_option("--out", report_out, "output path, - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (eval_cmd->parsed()) {
      return cmd_eval(runs_path, qrels_path, eval_metric, eval_k, rel_threshold,
                      coverage, eval_out);
    }
    if (test_cmd->parsed()) {
      return cmd_test(matrix_path, system_b, system_e, test_flags);
    }
    if (fit_cmd->parsed()) {
      return cmd_fit(fit_matrix, fit_metric, fit_k, pit, fit_seed, fit_threads,
                     fit_out);
    }
    if (type1_cmd->parsed()) {
      const auto model = sigscale::io::load_model(type1_flags.model_path);
      const auto cfg = experiment_config(type1_flags, /*power=*/false);
      emit_report(sigscale::sim::type1_experiment(model, cfg), type1_flags);
      return 0;
    }
    if (power_cmd->parsed()) {
      const auto model = sigscale::io::load_model(power_flags.model_path);
      const auto cfg = experiment_config(power_flags, /*power=*/true);
      emit_report(sigscale::sim::power_experiment(model, cfg), power_flags);
      return 0;
    }
    if (report_cmd->parsed()) {
      return cmd_report(report_input, report_kind, report_alpha, report_out);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const sigscale::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
