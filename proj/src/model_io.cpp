#include "sigscale/model_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "sigscale/eval.hpp"

namespace sigscale::io {

using nlohmann::json;

nlohmann::json marginal_to_json(const marginals::MarginalModel& m) {
  json j;
  j["family"] = marginals::family_label(m.family());
  j["mean"] = m.mean();
  if (!m.params().empty()) j["params"] = m.params();
  if (!m.support().empty()) j["support"] = m.support();
  if (m.family() == marginals::Family::discrete_kde) j["probs"] = m.probs();
  return j;
}

marginals::MarginalModel marginal_from_json(const json& j) {
  const auto family = marginals::family_from_string(j.at("family").get<std::string>());
  switch (family) {
    case marginals::Family::truncated_normal: {
      const auto params = j.at("params").get<std::vector<double>>();
      return marginals::MarginalModel::truncated_normal(params.at(0), params.at(1));
    }
    case marginals::Family::beta: {
      const auto params = j.at("params").get<std::vector<double>>();
      return marginals::MarginalModel::beta(params.at(0), params.at(1));
    }
    case marginals::Family::beta_binomial: {
      const auto params = j.at("params").get<std::vector<double>>();
      return marginals::MarginalModel::beta_binomial(
          j.at("support").get<std::vector<double>>(), params.at(0), params.at(1));
    }
    case marginals::Family::discrete_kde:
      return marginals::MarginalModel::discrete(
          j.at("support").get<std::vector<double>>(),
          j.at("probs").get<std::vector<double>>());
  }
  throw marginals::FitError("unknown family in model file");
}

nlohmann::json copula_to_json(const copulas::CopulaModel& c) {
  json j;
  j["family"] = copulas::copula_label(c.family);
  j["theta"] = c.theta;
  j["kendall_tau"] = c.kendall_tau;
  j["log_likelihood"] = c.log_likelihood;
  return j;
}

copulas::CopulaModel copula_from_json(const json& j) {
  copulas::CopulaModel c;
  c.family = copulas::copula_from_string(j.at("family").get<std::string>());
  c.theta = j.at("theta").get<double>();
  c.kendall_tau = j.at("kendall_tau").get<double>();
  c.log_likelihood = j.value("log_likelihood", 0.0);
  return c;
}

nlohmann::json model_to_json(const sim::SimulationModel& model) {
  json j;
  j["metric"] = model.metric_name;
  j["fit_seed"] = model.fit_seed;
  j["systems"] = model.system_ids;
  json marg = json::object();
  for (std::size_t i = 0; i < model.system_ids.size(); ++i) {
    marg[model.system_ids[i]] = marginal_to_json(model.system_marginals[i]);
  }
  j["marginals"] = std::move(marg);
  json pairs = json::array();
  for (const auto& pair : model.pairs) {
    json p = copula_to_json(pair.copula);
    p["system_b"] = pair.system_b;
    p["system_e"] = pair.system_e;
    p["mean_gap"] = pair.mean_gap;
    pairs.push_back(std::move(p));
  }
  j["copulas"] = std::move(pairs);
  json effect = json::array();
  for (std::size_t idx : model.effect_index) effect.push_back(idx);
  j["effect_index"] = std::move(effect);
  return j;
}

sim::SimulationModel model_from_json(const json& j) {
  sim::SimulationModel model;
  model.metric_name = j.at("metric").get<std::string>();
  model.fit_seed = j.at("fit_seed").get<std::uint64_t>();
  model.system_ids = j.at("systems").get<std::vector<std::string>>();
  const json& marg = j.at("marginals");
  model.system_marginals.reserve(model.system_ids.size());
  for (const auto& id : model.system_ids) {
    model.system_marginals.push_back(marginal_from_json(marg.at(id)));
  }
  for (const auto& p : j.at("copulas")) {
    sim::SimulationModel::Pair pair;
    pair.system_b = p.at("system_b").get<std::string>();
    pair.system_e = p.at("system_e").get<std::string>();
    pair.mean_gap = p.at("mean_gap").get<double>();
    pair.copula = copula_from_json(p);
    model.pairs.push_back(std::move(pair));
  }
  model.effect_index = j.at("effect_index").get<std::vector<std::size_t>>();
  for (std::size_t idx : model.effect_index) {
    if (idx >= model.pairs.size()) {
      throw sim::SimError("effect index out of range in model file");
    }
  }
  return model;
}

void save_model(const sim::SimulationModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw sim::SimError("cannot write model file: " + path);
  out << model_to_json(model).dump(2) << '\n';
}

sim::SimulationModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw sim::SimError("cannot open model file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw sim::SimError("malformed model file " + path + ": " + e.what());
  }
  return model_from_json(j);
}

std::string format_number(double x) {
  char buffer[32];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), x);
  (void)ec;
  return std::string(buffer, end);
}

namespace {

// Shortest representation that round-trips exactly.
std::string format_double(double x) { return format_number(x); }

}  // namespace

void write_report_csv(const sim::ExperimentReport& report, std::ostream& out) {
  out << "test,n,alpha,delta,rate,trials,se\n";
  for (const auto& row : report.rows) {
    out << stats::test_label(row.test) << ',' << row.n << ','
        << format_double(row.alpha) << ',' << format_double(row.delta) << ','
        << format_double(row.rejection_rate) << ',' << row.trials << ','
        << format_double(row.monte_carlo_se) << '\n';
  }
}

nlohmann::json report_to_json(const sim::ExperimentReport& report) {
  json rows = json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"test", stats::test_label(row.test)},
                    {"n", row.n},
                    {"alpha", row.alpha},
                    {"delta", row.delta},
                    {"rate", row.rejection_rate},
                    {"trials", row.trials},
                    {"se", row.monte_carlo_se}});
  }
  return json{{"rows", std::move(rows)}};
}

sim::ExperimentReport read_report_csv(std::istream& in) {
  sim::ExperimentReport report;
  std::string line;
  if (!std::getline(in, line) || line != "test,n,alpha,delta,rate,trials,se") {
    throw sim::SimError("not an experiment report (unexpected header)");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    sim::ReportRow r;
    try {
      std::getline(row, cell, ',');
      r.test = stats::test_from_string(cell);
      std::getline(row, cell, ',');
      r.n = std::stoul(cell);
      std::getline(row, cell, ',');
      r.alpha = std::stod(cell);
      std::getline(row, cell, ',');
      r.delta = std::stod(cell);
      std::getline(row, cell, ',');
      r.rejection_rate = std::stod(cell);
      std::getline(row, cell, ',');
      r.trials = std::stoul(cell);
      std::getline(row, cell, ',');
      r.monte_carlo_se = std::stod(cell);
    } catch (const std::exception&) {
      throw sim::SimError("malformed report row at line " + std::to_string(line_no));
    }
    report.rows.push_back(r);
  }
  return report;
}

void write_archive_csv(const sim::ExperimentReport& report, std::ostream& out) {
  out << "test,n,delta,trial,p\n";
  for (const auto& block : report.archive) {
    const std::string label = stats::test_label(block.test);
    for (std::size_t trial = 0; trial < block.p_values.size(); ++trial) {
      out << label << ',' << block.n << ',' << format_double(block.delta) << ','
          << trial << ',' << format_double(block.p_values[trial]) << '\n';
    }
  }
}

sim::ExperimentReport read_archive_csv(std::istream& in) {
  sim::ExperimentReport report;
  std::string line;
  if (!std::getline(in, line) || line != "test,n,delta,trial,p") {
    throw sim::SimError("not a p-value archive (unexpected header)");
  }
  std::map<std::tuple<std::string, std::size_t, double>, std::vector<double>> blocks;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string test;
    std::string cell;
    try {
      std::getline(row, test, ',');
      std::getline(row, cell, ',');
      const std::size_t n = std::stoul(cell);
      std::getline(row, cell, ',');
      const double delta = std::stod(cell);
      std::getline(row, cell, ',');  // trial index, rows arrive in order
      std::getline(row, cell, ',');
      blocks[{test, n, delta}].push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw sim::SimError("malformed archive row at line " + std::to_string(line_no));
    }
  }
  for (auto& [key, p_values] : blocks) {
    sim::ArchiveBlock block;
    block.test = stats::test_from_string(std::get<0>(key));
    block.n = std::get<1>(key);
    block.delta = std::get<2>(key);
    block.p_values = std::move(p_values);
    report.archive.push_back(std::move(block));
  }
  return report;
}

}  // namespace sigscale::io
