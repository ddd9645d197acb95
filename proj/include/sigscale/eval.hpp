#ifndef SIGSCALE_EVAL_HPP
#define SIGSCALE_EVAL_HPP

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace sigscale {

// Input-file problem: carries file/line context in the message.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace eval {

struct RankedItem {
  std::string doc_id;
  double score = 0.0;
};

// One system's ranking for one request. Items are ordered by descending
// score; ties keep the order of the source file.
struct RankedList {
  std::string request_id;
  std::vector<RankedItem> items;
};

// Sparse relevance judgments. Absent pairs are unjudged and count as
// non-relevant.
class Judgments {
 public:
  // Throws ParseError if the (request, doc) pair was already judged.
  void set(const std::string& request_id, const std::string& doc_id, int grade);
  int grade(const std::string& request_id, const std::string& doc_id) const;
  // Grades of all judged documents for one request (empty if none).
  std::vector<int> request_grades(const std::string& request_id) const;
  std::size_t size() const { return total_; }

 private:
  std::unordered_map<std::string, std::unordered_map<std::string, int>> grades_;
  std::size_t total_ = 0;
};

// Dense request x system grid of effectiveness scores in [0, 1]. All systems
// share the identical request set; this is what makes the tests paired.
struct EvaluationMatrix {
  std::vector<std::string> system_ids;
  std::vector<std::string> request_ids;
  std::vector<double> scores;  // row-major, request_ids.size() x system_ids.size()
  std::string metric_name;

  double at(std::size_t request, std::size_t system) const {
    return scores[request * system_ids.size() + system];
  }
  double& at(std::size_t request, std::size_t system) {
    return scores[request * system_ids.size() + system];
  }
  std::vector<double> column(std::size_t system) const;
  // Index of a system id, or -1 when absent.
  int system_index(const std::string& id) const;
  std::size_t n_requests() const { return request_ids.size(); }
  std::size_t n_systems() const { return system_ids.size(); }

  // Enforces the type invariants (finite cells in [0,1], >= 2 systems,
  // >= 2 requests, unique ids). Throws ParseError on violation.
  void validate() const;
};

// system id -> request id -> ranked list
using RunSet = std::map<std::string, std::map<std::string, RankedList>>;

// TREC run format: `qid Q0 docid rank score run_tag`, one line per item.
// The run tag names the system, so one file may carry several systems.
RunSet parse_trec_runs(const std::string& path);

// Qrels format: `qid 0 docid grade`.
Judgments parse_qrels(const std::string& path);

// CSV matrix: header `request,<sys>,...`, one row per request. This is the
// canonical interchange format consumed by the fitting and testing stages.
EvaluationMatrix parse_csv_matrix(const std::string& path);
EvaluationMatrix parse_csv_matrix(std::istream& in, const std::string& name);
void write_csv_matrix(const EvaluationMatrix& m, std::ostream& out);

enum class Metric { rr, ndcg };

Metric metric_from_string(const std::string& s);
std::string metric_label(Metric metric, int k);

// Reciprocal rank of the first item with grade >= rel_threshold within the
// top k; 0 if none.
double reciprocal_rank(const RankedList& list, const Judgments& judg, int k,
                       int rel_threshold = 1);

// nDCG@k with log2 discount and gain equal to the relevance grade. Requests
// with no judged-relevant document score 0.
double ndcg(const RankedList& list, const Judgments& judg, int k);

enum class CoveragePolicy { strict, intersect };

// Scores every (system, request) pair and assembles the paired matrix.
// Requests are sorted by id so the result is independent of input order.
EvaluationMatrix build_matrix(const RunSet& runs, const Judgments& judg,
                              Metric metric, int k,
                              CoveragePolicy policy = CoveragePolicy::strict,
                              int rel_threshold = 1);

}  // namespace eval
}  // namespace sigscale

#endif  // SIGSCALE_EVAL_HPP
