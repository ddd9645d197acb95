#ifndef SIGSCALE_MODEL_IO_HPP
#define SIGSCALE_MODEL_IO_HPP

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "sigscale/copulas.hpp"
#include "sigscale/marginals.hpp"
#include "sigscale/simulation.hpp"

namespace sigscale::io {

// Shortest decimal representation that round-trips exactly.
std::string format_number(double x);

nlohmann::json marginal_to_json(const marginals::MarginalModel& m);
marginals::MarginalModel marginal_from_json(const nlohmann::json& j);

nlohmann::json copula_to_json(const copulas::CopulaModel& c);
copulas::CopulaModel copula_from_json(const nlohmann::json& j);

// Full model bundle: metric, fit seed, marginals keyed by system id,
// copulas with their system pair ids, and the effect index.
nlohmann::json model_to_json(const sim::SimulationModel& model);
sim::SimulationModel model_from_json(const nlohmann::json& j);
void save_model(const sim::SimulationModel& model, const std::string& path);
sim::SimulationModel load_model(const std::string& path);

// Long-format experiment report: one row per (test, n, alpha, delta).
void write_report_csv(const sim::ExperimentReport& report, std::ostream& out);
nlohmann::json report_to_json(const sim::ExperimentReport& report);
sim::ExperimentReport read_report_csv(std::istream& in);

// Raw p-value archive: one row per (test, n, delta, trial).
void write_archive_csv(const sim::ExperimentReport& report, std::ostream& out);
sim::ExperimentReport read_archive_csv(std::istream& in);

}  // namespace sigscale::io

#endif  // SIGSCALE_MODEL_IO_HPP
