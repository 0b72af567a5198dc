#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wellposed/router.hpp"
#include "wellposed/search.hpp"

namespace wellposed {

struct EmptySetError : std::runtime_error {
  EmptySetError() : std::runtime_error("metric over an empty problem set") {}
};

struct InsufficientPool : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ProblemRecord {
  enum class Type { Well, Missing, Contra };

  std::string id;
  std::string question;
  Type type = Type::Well;
  std::optional<Rational> answer;   // present iff type == Well
  std::optional<std::string> seed_id;

  bool ill_defined() const { return type != Type::Well; }
};

const char* problem_type_name(ProblemRecord::Type t);
std::optional<ProblemRecord::Type> problem_type_from(const std::string& name);

// JSONL dataset: one record per line, {"id", "question", "type", "answer"?}.
std::vector<ProblemRecord> load_jsonl(const std::string& path);
void save_jsonl(const std::vector<ProblemRecord>& records, const std::string& path);
ProblemRecord record_from_json_line(const std::string& line);
std::string record_to_json_line(const ProblemRecord& record);

struct ResultRow {
  ProblemRecord record;
  Decision decision;
  OutcomeKind outcome = OutcomeKind::Error;
  std::string goal;  // goal variable of the final modeling state
  SearchTrace trace;
  Transcript transcript;
};

// |f - g| <= tol * max(1, |g|)
bool answer_matches(const Rational& produced, const Rational& truth, const Rational& tol);

inline Rational default_tolerance() { return Rational(1, 10000); }

// Rejection rate over the ill-defined rows.
Rational r_rate(const std::vector<ResultRow>& rows);
// Mixed-set score: 1 point per rejected ill row and per correctly solved
// well row, 0.5 per rejected well row, over the total count.
Rational r_score(const std::vector<ResultRow>& rows, const Rational& tol = default_tolerance());
// r_score without the 0.5 rejection credit.
Rational r_star(const std::vector<ResultRow>& rows, const Rational& tol = default_tolerance());
// Correctly solved fraction of the well-defined rows; absent when none.
std::optional<Rational> accuracy(const std::vector<ResultRow>& rows,
                                 const Rational& tol = default_tolerance());
// Judge errors / judge invocations. A judge error: the final output was
// wrong while some judged step's non-chosen state classified to the correct
// answer. Absent when no step was judged.
std::optional<Rational> jer(const std::vector<ResultRow>& rows,
                            const Rational& tol = default_tolerance());

struct MetricsReport {
  size_t n_ill = 0, n_well = 0;
  size_t rejected_ill = 0, solved_well = 0, rejected_well = 0;
  size_t judge_instances = 0, judge_errors = 0;
  Rational r_rate_v, r_score_v, r_star_v;
  std::optional<Rational> accuracy_v, jer_v;

  std::string to_json() const;
  static MetricsReport from_json(const std::string& text);
};

MetricsReport compute_metrics(const std::vector<ResultRow>& rows,
                              const Rational& tol = default_tolerance());

// Deterministic mixed sample with |well| : |ill| == alpha, n rows total,
// ill count rounded down (toward the well side). Throws InsufficientPool.
std::vector<ProblemRecord> sample_balanced(const std::vector<ProblemRecord>& well,
                                           const std::vector<ProblemRecord>& ill,
                                           const Rational& alpha, size_t n, uint64_t seed);

using ProblemPipeline = std::function<ResultRow(const ProblemRecord&)>;

struct EvalRun {
  std::vector<MetricsReport> per_repeat;
  std::vector<std::vector<ResultRow>> rows_per_repeat;
  std::map<std::string, std::pair<double, double>> aggregate;  // metric -> (mean, stddev)
};

// Runs the pipeline over every record, `jobs` problems in flight at a time;
// one pipeline failure becomes a Reject(error) row, never an aborted run.
// Repeats k times and aggregates mean and sample standard deviation.
EvalRun run_eval(const std::vector<ProblemRecord>& dataset, const ProblemPipeline& pipeline,
                 int repeats, int jobs, const Rational& tol = default_tolerance());

std::string eval_report_json(const EvalRun& run, const std::string& config_echo);

}  // namespace wellposed
