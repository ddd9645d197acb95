#include "sigscale/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace sigscale::eval {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) fields.push_back(tok);
  return fields;
}

[[noreturn]] void fail(const std::string& path, std::size_t line_no,
                       const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line_no) + ": " + what);
}

double parse_score(const std::string& tok, const std::string& path,
                   std::size_t line_no) {
  std::size_t pos = 0;
  double value = 0.0;
  try {
    value = std::stod(tok, &pos);
  } catch (const std::exception&) {
    fail(path, line_no, "non-numeric score '" + tok + "'");
  }
  if (pos != tok.size()) fail(path, line_no, "non-numeric score '" + tok + "'");
  return value;
}

long parse_int(const std::string& tok, const std::string& path,
               std::size_t line_no, const std::string& field) {
  std::size_t pos = 0;
  long value = 0;
  try {
    value = std::stol(tok, &pos);
  } catch (const std::exception&) {
    fail(path, line_no, "non-numeric " + field + " '" + tok + "'");
  }
  if (pos != tok.size()) fail(path, line_no, "non-numeric " + field + " '" + tok + "'");
  return value;
}

std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  return in;
}

}  // namespace

void Judgments::set(const std::string& request_id, const std::string& doc_id,
                    int grade) {
  auto [it, inserted] = grades_[request_id].emplace(doc_id, grade);
  (void)it;
  if (!inserted) {
    throw ParseError("duplicate judgment for (" + request_id + ", " + doc_id + ")");
  }
  ++total_;
}

int Judgments::grade(const std::string& request_id,
                     const std::string& doc_id) const {
  auto req = grades_.find(request_id);
  if (req == grades_.end()) return 0;
  auto doc = req->second.find(doc_id);
  return doc == req->second.end() ? 0 : doc->second;
}

std::vector<int> Judgments::request_grades(const std::string& request_id) const {
  std::vector<int> out;
  auto req = grades_.find(request_id);
  if (req == grades_.end()) return out;
  out.reserve(req->second.size());
  for (const auto& [doc, grade] : req->second) out.push_back(grade);
  return out;
}

std::vector<double> EvaluationMatrix::column(std::size_t system) const {
  std::vector<double> out(request_ids.size());
  for (std::size_t r = 0; r < request_ids.size(); ++r) out[r] = at(r, system);
  return out;
}

int EvaluationMatrix::system_index(const std::string& id) const {
  auto it = std::find(system_ids.begin(), system_ids.end(), id);
  if (it == system_ids.end()) return -1;
  return static_cast<int>(it - system_ids.begin());
}

void EvaluationMatrix::validate() const {
  if (system_ids.size() < 2) throw ParseError("matrix needs at least 2 systems");
  if (request_ids.size() < 2) throw ParseError("matrix needs at least 2 requests");
  if (scores.size() != system_ids.size() * request_ids.size()) {
    throw ParseError("matrix shape mismatch");
  }
  std::set<std::string> sys(system_ids.begin(), system_ids.end());
  if (sys.size() != system_ids.size()) throw ParseError("duplicate system id");
  std::set<std::string> req(request_ids.begin(), request_ids.end());
  if (req.size() != request_ids.size()) throw ParseError("duplicate request id");
  for (double v : scores) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw ParseError("matrix cell outside [0,1]: " + std::to_string(v));
    }
  }
}

RunSet parse_trec_runs(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  RunSet runs;
  // (system, request) -> docs seen, for duplicate detection
  std::map<std::pair<std::string, std::string>, std::set<std::string>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split_ws(line);
    if (f.empty()) continue;
    if (f.size() != 6) {
      fail(path, line_no, "expected 6 fields `qid Q0 docid rank score tag`, got " +
                              std::to_string(f.size()));
    }
    const std::string& qid = f[0];
    const std::string& doc = f[2];
    parse_int(f[3], path, line_no, "rank");
    double score = parse_score(f[4], path, line_no);
    const std::string& tag = f[5];
    if (!seen[{tag, qid}].insert(doc).second) {
      fail(path, line_no, "duplicate document '" + doc + "' for request '" + qid +
                              "' in run '" + tag + "'");
    }
    RankedList& list = runs[tag][qid];
    list.request_id = qid;
    list.items.push_back({doc, score});
  }
  // Descending score; stable keeps file order on ties.
  for (auto& [tag, by_request] : runs) {
    (void)tag;
    for (auto& [qid, list] : by_request) {
      (void)qid;
      std::stable_sort(list.items.begin(), list.items.end(),
                       [](const RankedItem& a, const RankedItem& b) {
                         return a.score > b.score;
                       });
    }
  }
  return runs;
}

Judgments parse_qrels(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  Judgments judg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = split_ws(line);
    if (f.empty()) continue;
    if (f.size() != 4) {
      fail(path, line_no, "expected 4 fields `qid 0 docid grade`, got " +
                              std::to_string(f.size()));
    }
    long grade = parse_int(f[3], path, line_no, "grade");
    if (grade < 0) fail(path, line_no, "negative relevance grade");
    try {
      judg.set(f[0], f[2], static_cast<int>(grade));
    } catch (const ParseError& e) {
      fail(path, line_no, e.what());
    }
  }
  return judg;
}

EvaluationMatrix parse_csv_matrix(const std::string& path) {
  std::ifstream in = open_or_throw(path);
  return parse_csv_matrix(in, path);
}

EvaluationMatrix parse_csv_matrix(std::istream& in, const std::string& name) {
  EvaluationMatrix m;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(name + ": empty file");
  ++line_no;
  {
    std::istringstream header(line);
    std::string cell;
    bool first = true;
    while (std::getline(header, cell, ',')) {
      if (first) {
        if (cell != "request") {
          fail(name, line_no, "first header column must be 'request', got '" + cell + "'");
        }
        first = false;
      } else {
        m.system_ids.push_back(cell);
      }
    }
    if (first) fail(name, line_no, "missing header row");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    if (!std::getline(row, cell, ',')) fail(name, line_no, "missing request id");
    m.request_ids.push_back(cell);
    std::size_t count = 0;
    while (std::getline(row, cell, ',')) {
      m.scores.push_back(parse_score(cell, name, line_no));
      ++count;
    }
    if (count != m.system_ids.size()) {
      fail(name, line_no, "expected " + std::to_string(m.system_ids.size()) +
                              " scores, got " + std::to_string(count));
    }
  }
  m.validate();
  return m;
}

void write_csv_matrix(const EvaluationMatrix& m, std::ostream& out) {
  out << "request";
  for (const auto& sys : m.system_ids) out << ',' << sys;
  out << '\n';
  char buffer[32];
  for (std::size_t r = 0; r < m.n_requests(); ++r) {
    out << m.request_ids[r];
    for (std::size_t s = 0; s < m.n_systems(); ++s) {
      // shortest round-trip representation
      const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), m.at(r, s));
      (void)ec;
      out << ',';
      out.write(buffer, end - buffer);
    }
    out << '\n';
  }
}

Metric metric_from_string(const std::string& s) {
  if (s == "rr") return Metric::rr;
  if (s == "ndcg") return Metric::ndcg;
  throw ParseError("unknown metric '" + s + "' (expected rr or ndcg)");
}

std::string metric_label(Metric metric, int k) {
  return (metric == Metric::rr ? "rr@" : "ndcg@") + std::to_string(k);
}

double reciprocal_rank(const RankedList& list, const Judgments& judg, int k,
                       int rel_threshold) {
  const std::size_t cutoff = std::min<std::size_t>(list.items.size(), k);
  for (std::size_t i = 0; i < cutoff; ++i) {
    if (judg.grade(list.request_id, list.items[i].doc_id) >= rel_threshold) {
      return 1.0 / static_cast<double>(i + 1);
    }
  }
  return 0.0;
}

double ndcg(const RankedList& list, const Judgments& judg, int k) {
  std::vector<int> grades = judg.request_grades(list.request_id);
  std::sort(grades.begin(), grades.end(), std::greater<int>());
  double idcg = 0.0;
  for (std::size_t i = 0; i < grades.size() && i < static_cast<std::size_t>(k); ++i) {
    if (grades[i] <= 0) break;
    idcg += grades[i] / std::log2(static_cast<double>(i) + 2.0);
  }
  if (idcg == 0.0) return 0.0;  // no judged-relevant items for this request
  double dcg = 0.0;
  const std::size_t cutoff = std::min<std::size_t>(list.items.size(), k);
  for (std::size_t i = 0; i < cutoff; ++i) {
    int g = judg.grade(list.request_id, list.items[i].doc_id);
    if (g > 0) dcg += g / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg / idcg;
}

EvaluationMatrix build_matrix(const RunSet& runs, const Judgments& judg,
                              Metric metric, int k, CoveragePolicy policy,
                              int rel_threshold) {
  if (k < 1) throw ParseError("cutoff k must be >= 1");
  if (runs.size() < 2) throw ParseError("matrix needs at least 2 systems");

  std::set<std::string> request_union;
  for (const auto& [sys, by_request] : runs) {
    (void)sys;
    for (const auto& [qid, list] : by_request) {
      (void)list;
      request_union.insert(qid);
    }
  }

  std::vector<std::string> requests;
  if (policy == CoveragePolicy::strict) {
    std::string missing;
    for (const auto& [sys, by_request] : runs) {
      for (const auto& qid : request_union) {
        if (!by_request.count(qid)) missing += " (" + sys + ", " + qid + ")";
      }
    }
    if (!missing.empty()) {
      throw ParseError("systems do not cover the same requests:" + missing);
    }
    requests.assign(request_union.begin(), request_union.end());
  } else {
    for (const auto& qid : request_union) {
      bool everywhere = true;
      for (const auto& [sys, by_request] : runs) {
        (void)sys;
        if (!by_request.count(qid)) {
          everywhere = false;
          break;
        }
      }
      if (everywhere) requests.push_back(qid);
    }
    if (requests.empty()) throw ParseError("no request is covered by every system");
  }

  EvaluationMatrix m;
  m.metric_name = metric_label(metric, k);
  for (const auto& [sys, by_request] : runs) {
    (void)by_request;
    m.system_ids.push_back(sys);
  }
  m.request_ids = requests;
  m.scores.resize(m.n_systems() * m.n_requests());
  for (std::size_t s = 0; s < m.n_systems(); ++s) {
    const auto& by_request = runs.at(m.system_ids[s]);
    for (std::size_t r = 0; r < m.n_requests(); ++r) {
      const RankedList& list = by_request.at(m.request_ids[r]);
      m.at(r, s) = metric == Metric::rr ? reciprocal_rank(list, judg, k, rel_threshold)
                                        : ndcg(list, judg, k);
    }
  }
  m.validate();
  return m;
}

}  // namespace sigscale::eval
