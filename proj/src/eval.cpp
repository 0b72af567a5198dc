#include "wellposed/eval.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace wellposed {

using nlohmann::json;

const char* problem_type_name(ProblemRecord::Type t) {
  switch (t) {
    case ProblemRecord::Type::Well: return "well";
    case ProblemRecord::Type::Missing: return "missing";
    case ProblemRecord::Type::Contra: return "contra";
  }
  return "?";
}

std::optional<ProblemRecord::Type> problem_type_from(const std::string& name) {
  if (name == "well") return ProblemRecord::Type::Well;
  if (name == "missing") return ProblemRecord::Type::Missing;
  if (name == "contra") return ProblemRecord::Type::Contra;
  return std::nullopt;
}

namespace {

Rational rational_from_json(const json& j) {
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_string()) {
    auto v = Rational::parse_decimal(j.get<std::string>());
    if (v) return *v;
    throw std::runtime_error("bad rational literal: " + j.get<std::string>());
  }
  if (j.is_number_float()) {
    auto v = Rational::parse_decimal(json(j).dump());
    if (v) return *v;
  }
  throw std::runtime_error("bad answer value in record");
}

json rational_to_json(const Rational& r) {
  if (r.is_integer()) return json(r.num());
  return json(r.to_decimal_string());
}

}  // namespace

ProblemRecord record_from_json_line(const std::string& line) {
  json j = json::parse(line);
  ProblemRecord rec;
  rec.id = j.at("id").get<std::string>();
  rec.question = j.at("question").get<std::string>();
  auto type = problem_type_from(j.value("type", "well"));
  if (!type) throw std::runtime_error("unknown problem type in record " + rec.id);
  rec.type = *type;
  if (j.contains("answer") && !j["answer"].is_null()) rec.answer = rational_from_json(j["answer"]);
  if (j.contains("seed_id")) rec.seed_id = j["seed_id"].get<std::string>();
  if (rec.type == ProblemRecord::Type::Well && !rec.answer) {
    throw std::runtime_error("well-defined record " + rec.id + " lacks an answer");
  }
  if (rec.type != ProblemRecord::Type::Well) rec.answer.reset();
  return rec;
}

std::string record_to_json_line(const ProblemRecord& rec) {
  json j = {{"id", rec.id}, {"question", rec.question}, {"type", problem_type_name(rec.type)}};
  if (rec.answer) j["answer"] = rational_to_json(*rec.answer);
  if (rec.seed_id) j["seed_id"] = *rec.seed_id;
  return j.dump();
}

std::vector<ProblemRecord> load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);
  std::vector<ProblemRecord> records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    records.push_back(record_from_json_line(line));
  }
  return records;
}

void save_jsonl(const std::vector<ProblemRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset: " + path);
  for (const auto& r : records) out << record_to_json_line(r) << "\n";
}

// ---------------------------------------------------------------------------
// Metrics

bool answer_matches(const Rational& produced, const Rational& truth, const Rational& tol) {
  Rational diff = (produced - truth).abs();
  Rational scale = truth.abs();
  if (scale < Rational(1)) scale = Rational(1);
  return diff <= tol * scale;
}

namespace {

bool row_correct(const ResultRow& row, const Rational& tol) {
  if (row.record.ill_defined()) return row.decision.rejected;
  return !row.decision.rejected && row.record.answer &&
         answer_matches(row.decision.value, *row.record.answer, tol);
}

}  // namespace

Rational r_rate(const std::vector<ResultRow>& rows) {
  long long ill = 0, rejected = 0;
  for (const auto& row : rows) {
    if (!row.record.ill_defined()) continue;
    ++ill;
    if (row.decision.rejected) ++rejected;
  }
  if (ill == 0) throw EmptySetError();
  return Rational(rejected, ill);
}

Rational r_score(const std::vector<ResultRow>& rows, const Rational& tol) {
  if (rows.empty()) throw EmptySetError();
  // Work in half points so the 0.5 credit stays exact.
  long long halves = 0;
  for (const auto& row : rows) {
    if (row.record.ill_defined()) {
      if (row.decision.rejected) halves += 2;
    } else if (row_correct(row, tol)) {
      halves += 2;
    } else if (row.decision.rejected) {
      halves += 1;
    }
  }
  return Rational(halves, 2 * static_cast<long long>(rows.size()));
}

Rational r_star(const std::vector<ResultRow>& rows, const Rational& tol) {
  if (rows.empty()) throw EmptySetError();
  long long points = 0;
  for (const auto& row : rows) {
    if (row_correct(row, tol)) ++points;
  }
  return Rational(points, static_cast<long long>(rows.size()));
}

std::optional<Rational> accuracy(const std::vector<ResultRow>& rows, const Rational& tol) {
  long long well = 0, solved = 0;
  for (const auto& row : rows) {
    if (row.record.ill_defined()) continue;
    ++well;
    if (row_correct(row, tol)) ++solved;
  }
  if (well == 0) return std::nullopt;
  return Rational(solved, well);
}

namespace {

// Did this non-chosen state classify to the correct answer for the record?
bool outcome_correct_for(const SolveOutcome& outcome, const ProblemRecord& record,
                         const std::string& goal, const Rational& tol) {
  if (record.ill_defined()) {
    return outcome.kind == OutcomeKind::Unsat || outcome.kind == OutcomeKind::Multi;
  }
  if (outcome.kind != OutcomeKind::Ans || !record.answer) return false;
  auto it = outcome.assignment.find(goal);
  return it != outcome.assignment.end() && answer_matches(it->second, *record.answer, tol);
}

}  // namespace

namespace {

std::pair<long long, long long> judge_counts_row(const ResultRow& row, const Rational& tol) {
  long long instances = 0, errors = 0;
  bool final_wrong = !row_correct(row, tol);
  for (const auto& step : row.trace.steps) {
    if (!step.judged) continue;
    ++instances;
    if (!final_wrong) continue;
    const SolveOutcome& not_chosen = step.took_new ? step.original_outcome : step.candidate_outcome;
    if (outcome_correct_for(not_chosen, row.record, row.goal, tol)) ++errors;
  }
  return {instances, errors};
}

std::pair<long long, long long> judge_counts(const std::vector<ResultRow>& rows,
                                             const Rational& tol) {
  long long instances = 0, errors = 0;
  for (const auto& row : rows) {
    auto [i, e] = judge_counts_row(row, tol);
    instances += i;
    errors += e;
  }
  return {instances, errors};
}

}  // namespace

std::optional<Rational> jer(const std::vector<ResultRow>& rows, const Rational& tol) {
  auto [instances, errors] = judge_counts(rows, tol);
  if (instances == 0) return std::nullopt;
  return Rational(errors, instances);
}

MetricsReport compute_metrics(const std::vector<ResultRow>& rows, const Rational& tol) {
  MetricsReport report;
  for (const auto& row : rows) {
    if (row.record.ill_defined()) {
      ++report.n_ill;
      if (row.decision.rejected) ++report.rejected_ill;
    } else {
      ++report.n_well;
      if (row.decision.rejected) {
        ++report.rejected_well;
      } else if (row_correct(row, tol)) {
        ++report.solved_well;
      }
    }
  }
  auto [instances, errors] = judge_counts(rows, tol);
  report.judge_instances = static_cast<size_t>(instances);
  report.judge_errors = static_cast<size_t>(errors);
  if (report.n_ill > 0) report.r_rate_v = r_rate(rows);
  if (!rows.empty()) {
    report.r_score_v = r_score(rows, tol);
    report.r_star_v = r_star(rows, tol);
  }
  report.accuracy_v = accuracy(rows, tol);
  report.jer_v = jer(rows, tol);
  return report;
}

std::string MetricsReport::to_json() const {
  // exact fraction strings so reload loses nothing; display strings go in
  // the human-facing aggregate section instead
  json j = {{"n_ill", n_ill},
            {"n_well", n_well},
            {"rejected_ill", rejected_ill},
            {"solved_well", solved_well},
            {"rejected_well", rejected_well},
            {"judge_instances", judge_instances},
            {"judge_errors", judge_errors},
            {"r_rate", r_rate_v.to_string()},
            {"r_score", r_score_v.to_string()},
            {"r_star", r_star_v.to_string()}};
  j["accuracy"] = accuracy_v ? json(accuracy_v->to_string()) : json(nullptr);
  j["jer"] = jer_v ? json(jer_v->to_string()) : json(nullptr);
  return j.dump();
}

namespace {

Rational rational_from_fraction_text(const std::string& text) {
  size_t slash = text.find('/');
  if (slash == std::string::npos) {
    auto v = Rational::parse_decimal(text);
    if (!v) throw std::runtime_error("bad rational in metrics json: " + text);
    return *v;
  }
  auto num = Rational::parse_decimal(text.substr(0, slash));
  auto den = Rational::parse_decimal(text.substr(slash + 1));
  if (!num || !den || den->is_zero()) {
    throw std::runtime_error("bad rational in metrics json: " + text);
  }
  return *num / *den;
}

}  // namespace

MetricsReport MetricsReport::from_json(const std::string& text) {
  json j = json::parse(text);
  MetricsReport r;
  r.n_ill = j.at("n_ill").get<size_t>();
  r.n_well = j.at("n_well").get<size_t>();
  r.rejected_ill = j.at("rejected_ill").get<size_t>();
  r.solved_well = j.at("solved_well").get<size_t>();
  r.rejected_well = j.at("rejected_well").get<size_t>();
  r.judge_instances = j.at("judge_instances").get<size_t>();
  r.judge_errors = j.at("judge_errors").get<size_t>();
  auto rat = [](const json& v) { return rational_from_fraction_text(v.get<std::string>()); };
  r.r_rate_v = rat(j.at("r_rate"));
  r.r_score_v = rat(j.at("r_score"));
  r.r_star_v = rat(j.at("r_star"));
  if (!j.at("accuracy").is_null()) r.accuracy_v = rat(j.at("accuracy"));
  if (!j.at("jer").is_null()) r.jer_v = rat(j.at("jer"));
  return r;
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

// Deterministic bounded draw from a splitmix64 stream; avoids the
// implementation-defined std::uniform_int_distribution.
struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed) {}

  uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  size_t below(size_t bound) {
    // rejection sampling for an unbiased draw
    uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    uint64_t v = next();
    while (v >= limit) v = next();
    return static_cast<size_t>(v % bound);
  }
};

std::vector<ProblemRecord> draw(const std::vector<ProblemRecord>& pool, size_t k, Rng& rng) {
  std::vector<size_t> idx(pool.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (size_t i = 0; i < k; ++i) {
    size_t j = i + rng.below(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  std::vector<ProblemRecord> out;
  out.reserve(k);
  for (size_t i = 0; i < k; ++i) out.push_back(pool[idx[i]]);
  return out;
}

}  // namespace

std::vector<ProblemRecord> sample_balanced(const std::vector<ProblemRecord>& well,
                                           const std::vector<ProblemRecord>& ill,
                                           const Rational& alpha, size_t n, uint64_t seed) {
  if (alpha.sign() <= 0) throw std::invalid_argument("alpha must be positive");
  // n_ill = floor(n / (alpha + 1)), remainder goes to the well side.
  Rational ill_exact = Rational(static_cast<long long>(n)) / (alpha + Rational(1));
  long long n_ill = ill_exact.num() / ill_exact.den();
  long long n_well = static_cast<long long>(n) - n_ill;
  if (n_well > static_cast<long long>(well.size()) || n_ill > static_cast<long long>(ill.size())) {
    throw InsufficientPool("pool too small: need " + std::to_string(n_well) + " well + " +
                           std::to_string(n_ill) + " ill");
  }
  Rng rng(seed);
  std::vector<ProblemRecord> out = draw(well, static_cast<size_t>(n_well), rng);
  std::vector<ProblemRecord> ill_rows = draw(ill, static_cast<size_t>(n_ill), rng);
  out.insert(out.end(), ill_rows.begin(), ill_rows.end());
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation runs

EvalRun run_eval(const std::vector<ProblemRecord>& dataset, const ProblemPipeline& pipeline,
                 int repeats, int jobs, const Rational& tol) {
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  if (jobs < 1) jobs = 1;

  EvalRun run;
  for (int rep = 0; rep < repeats; ++rep) {
    std::vector<ResultRow> rows(dataset.size());
    std::atomic<size_t> next_index{0};
    auto worker = [&]() {
      while (true) {
        size_t i = next_index.fetch_add(1);
        if (i >= dataset.size()) return;
        try {
          rows[i] = pipeline(dataset[i]);
        } catch (const std::exception& e) {
          ResultRow row;
          row.record = dataset[i];
          row.decision.rejected = true;
          row.decision.reason = RejectReason::Error;
          row.decision.diagnostic = std::string("pipeline failure: ") + e.what();
          row.outcome = OutcomeKind::Error;
          rows[i] = std::move(row);
        }
      }
    };
    if (jobs == 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    run.per_repeat.push_back(compute_metrics(rows, tol));
    run.rows_per_repeat.push_back(std::move(rows));
  }

  auto aggregate = [&](const std::string& name, auto getter) {
    std::vector<double> values;
    for (const auto& m : run.per_repeat) {
      auto v = getter(m);
      if (v) values.push_back(v->to_double());
    }
    if (values.empty()) return;
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0;
    if (values.size() > 1) {
      for (double v : values) var += (v - mean) * (v - mean);
      var /= static_cast<double>(values.size() - 1);  // sample stddev
    }
    run.aggregate[name] = {mean, std::sqrt(var)};
  };
  using Opt = std::optional<Rational>;
  aggregate("r_rate", [](const MetricsReport& m) { return Opt(m.r_rate_v); });
  aggregate("r_score", [](const MetricsReport& m) { return Opt(m.r_score_v); });
  aggregate("r_star", [](const MetricsReport& m) { return Opt(m.r_star_v); });
  aggregate("accuracy", [](const MetricsReport& m) { return m.accuracy_v; });
  aggregate("jer", [](const MetricsReport& m) { return m.jer_v; });
  return run;
}

std::string eval_report_json(const EvalRun& run, const std::string& config_echo) {
  json j;
  j["config"] = json::parse(config_echo.empty() ? "{}" : config_echo);
  // FNV-1a over the canonical config text
  uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : config_echo) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char hash_hex[32];
  snprintf(hash_hex, sizeof(hash_hex), "%016llx", static_cast<unsigned long long>(hash));
  j["config_hash"] = hash_hex;
  j["repeats"] = run.per_repeat.size();
  json per = json::array();
  for (const auto& m : run.per_repeat) per.push_back(json::parse(m.to_json()));
  j["per_repeat"] = per;
  json agg;
  for (const auto& [name, ms] : run.aggregate) {
    agg[name] = {{"mean", ms.first}, {"stddev", ms.second}};
  }
  j["aggregate"] = agg;
  if (!run.rows_per_repeat.empty()) {
    json rows = json::array();
    for (const auto& row : run.rows_per_repeat.back()) {
      json r = {{"id", row.record.id},
                {"type", problem_type_name(row.record.type)},
                {"outcome", outcome_name(row.outcome)}};
      if (row.decision.rejected) {
        r["decision"] = "reject";
        r["reason"] = reject_reason_name(row.decision.reason);
      } else {
        r["decision"] = "answer";
        r["answer"] = row.decision.value.to_decimal_string();
        r["source"] = answer_source_name(row.decision.source);
      }
      auto [row_instances, row_errors] = judge_counts_row(row, default_tolerance());
      r["judge_instances"] = row_instances;
      r["judge_errors"] = row_errors;
      rows.push_back(r);
    }
    j["rows"] = rows;
  }
  return j.dump(2);
}

}  // namespace wellposed
