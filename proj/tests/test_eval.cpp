#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "helpers.hpp"
#include "wellposed/eval.hpp"

using namespace wellposed;
using testutil::Rng;

namespace {

ProblemRecord ill_record(const std::string& id) {
  ProblemRecord r;
  r.id = id;
  r.question = "ill " + id;
  r.type = ProblemRecord::Type::Missing;
  return r;
}

ProblemRecord well_record(const std::string& id, long long answer) {
  ProblemRecord r;
  r.id = id;
  r.question = "well " + id;
  r.type = ProblemRecord::Type::Well;
  r.answer = Rational(answer);
  return r;
}

ResultRow rejected_row(ProblemRecord rec) {
  ResultRow row;
  row.record = std::move(rec);
  row.decision.rejected = true;
  row.decision.reason = RejectReason::Multi;
  row.outcome = OutcomeKind::Multi;
  return row;
}

ResultRow answered_row(ProblemRecord rec, long long value) {
  ResultRow row;
  row.record = std::move(rec);
  row.decision.rejected = false;
  row.decision.value = Rational(value);
  row.outcome = OutcomeKind::Ans;
  row.goal = "g";
  return row;
}

StepRecord judged_step(bool took_new, SolveOutcome not_chosen) {
  StepRecord s;
  s.head = "g";
  s.judged = true;
  s.took_new = took_new;
  if (took_new) {
    s.original_outcome = std::move(not_chosen);
    s.candidate_outcome = SolveOutcome::multi();
  } else {
    s.candidate_outcome = std::move(not_chosen);
    s.original_outcome = SolveOutcome::multi();
  }
  return s;
}

}  // namespace

TEST_CASE("r_rate on the four-problem fixture") {
  std::vector<ResultRow> rows = {rejected_row(ill_record("i1")), rejected_row(ill_record("i2")),
                                 rejected_row(ill_record("i3")), answered_row(ill_record("i4"), 9)};
  CHECK(r_rate(rows) == Rational(3, 4));

  std::vector<ResultRow> none = {answered_row(ill_record("i1"), 1),
                                 answered_row(ill_record("i2"), 2)};
  CHECK(r_rate(none) == Rational(0));
  CHECK_THROWS_AS(r_rate({}), EmptySetError);
  CHECK_THROWS_AS(r_rate({answered_row(well_record("w", 1), 1)}), EmptySetError);
}

TEST_CASE("r_rate equals a direct count on random vectors") {
  Rng rng(5150);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<ResultRow> rows;
    long long expected = 0;
    size_t n = 1 + rng.below(30);
    for (size_t i = 0; i < n; ++i) {
      bool rejected = rng.chance(0.5);
      if (rejected) ++expected;
      ResultRow row = rejected ? rejected_row(ill_record("i")) : answered_row(ill_record("i"), 1);
      rows.push_back(std::move(row));
    }
    CHECK(r_rate(rows) == Rational(expected, static_cast<long long>(n)));
  }
}

TEST_CASE("r_score on the mixed fixture is 0.875") {
  std::vector<ResultRow> rows = {
      rejected_row(ill_record("i1")),
      rejected_row(ill_record("i2")),
      answered_row(well_record("w1", 10), 10),   // solved correctly
      rejected_row(well_record("w2", 20)),       // rejected well: half credit
  };
  CHECK(r_score(rows) == Rational(7, 8));
  CHECK(r_star(rows) == Rational(3, 4));
}

TEST_CASE("perfect runs score 1.0") {
  std::vector<ResultRow> rows = {rejected_row(ill_record("i1")),
                                 answered_row(well_record("w1", 5), 5)};
  CHECK(r_score(rows) == Rational(1));
  CHECK(r_star(rows) == Rational(1));
}

TEST_CASE("reject-everything on a balanced set: half credit shows up in r_score only") {
  std::vector<ResultRow> rows;
  for (int i = 0; i < 6; ++i) rows.push_back(rejected_row(ill_record("i" + std::to_string(i))));
  for (int i = 0; i < 6; ++i) {
    rows.push_back(rejected_row(well_record("w" + std::to_string(i), i + 1)));
  }
  CHECK(r_score(rows) == Rational(3, 4));
  CHECK(r_star(rows) == Rational(1, 2));
}

TEST_CASE("answers match under relative tolerance with an absolute floor") {
  CHECK(answer_matches(Rational(70000), Rational(70000), default_tolerance()));
  CHECK(answer_matches(Rational(70006), Rational(70000), default_tolerance()));   // within 1e-4 rel
  CHECK_FALSE(answer_matches(Rational(70008), Rational(70000), default_tolerance()));
  // the floor makes tiny answers tolerant in absolute terms
  CHECK(answer_matches(Rational(1, 10000), Rational(0), default_tolerance()));
  CHECK_FALSE(answer_matches(Rational(1), Rational(0), default_tolerance()));
}

TEST_CASE("r_star never exceeds r_score and both stay in [0,1]") {
  Rng rng(2323);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<ResultRow> rows;
    size_t n = 1 + rng.below(24);
    for (size_t i = 0; i < n; ++i) {
      bool ill = rng.chance(0.5);
      ProblemRecord rec = ill ? ill_record("i") : well_record("w", 10);
      if (rng.chance(0.4)) {
        rows.push_back(rejected_row(std::move(rec)));
      } else {
        rows.push_back(answered_row(std::move(rec), rng.chance(0.5) ? 10 : 11));
      }
    }
    Rational score = r_score(rows);
    Rational star = r_star(rows);
    CHECK(star <= score);
    CHECK(Rational(0) <= star);
    CHECK(score <= Rational(1));
  }
}

TEST_CASE("r_score degenerates to r_rate on a pure ill set") {
  Rng rng(7878);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ResultRow> rows;
    size_t n = 1 + rng.below(15);
    for (size_t i = 0; i < n; ++i) {
      rows.push_back(rng.chance(0.5) ? rejected_row(ill_record("i"))
                                     : answered_row(ill_record("i"), 1));
    }
    CHECK(r_score(rows) == r_rate(rows));
  }
}

TEST_CASE("metrics are invariant under row permutation") {
  Rng rng(99);
  std::vector<ResultRow> rows;
  for (int i = 0; i < 12; ++i) {
    if (rng.chance(0.5)) {
      rows.push_back(rejected_row(ill_record("i" + std::to_string(i))));
    } else {
      rows.push_back(answered_row(well_record("w" + std::to_string(i), i), i + (i % 3 == 0)));
    }
  }
  Rational score = r_score(rows), star = r_star(rows);
  for (int shuffle = 0; shuffle < 5; ++shuffle) {
    for (size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng.below(i)]);
    CHECK(r_score(rows) == score);
    CHECK(r_star(rows) == star);
  }
}

TEST_CASE("jer counts qualifying judge errors over all invocations") {
  // 10 judge calls across two problems; exactly one qualifies
  ResultRow wrong = answered_row(well_record("w1", 5), 6);  // final output incorrect
  for (int i = 0; i < 3; ++i) {
    wrong.trace.steps.push_back(judged_step(true, SolveOutcome::unsat()));
  }
  // the non-chosen state held the correct answer
  wrong.trace.steps.push_back(judged_step(true, SolveOutcome::ans({{"g", Rational(5)}})));

  ResultRow right = answered_row(well_record("w2", 7), 7);  // final output correct
  for (int i = 0; i < 6; ++i) {
    right.trace.steps.push_back(judged_step(false, SolveOutcome::ans({{"g", Rational(7)}})));
  }

  std::vector<ResultRow> rows = {wrong, right};
  REQUIRE(jer(rows).has_value());
  CHECK(*jer(rows) == Rational(1, 10));

  SUBCASE("correct finals never count as judge errors") {
    std::vector<ResultRow> only_right = {right};
    CHECK(*jer(only_right) == Rational(0));
  }
  SUBCASE("no judged steps means the metric is absent") {
    std::vector<ResultRow> bare = {answered_row(well_record("w", 1), 1)};
    CHECK_FALSE(jer(bare).has_value());
  }
  SUBCASE("ill records count Unsat/Multi non-chosen states as correct") {
    ResultRow ill = answered_row(ill_record("i1"), 3);  // should have rejected: wrong
    ill.trace.steps.push_back(judged_step(true, SolveOutcome::unsat()));
    std::vector<ResultRow> v = {ill};
    CHECK(*jer(v) == Rational(1));
  }
}

TEST_CASE("jer equals an independent scan over synthetic traces") {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ResultRow> rows;
    size_t n = 1 + rng.below(8);
    for (size_t i = 0; i < n; ++i) {
      bool ill = rng.chance(0.4);
      ResultRow row;
      if (ill) {
        row = rng.chance(0.5) ? rejected_row(ill_record("i")) : answered_row(ill_record("i"), 1);
      } else {
        row = rng.chance(0.5) ? answered_row(well_record("w", 5), 5)
                              : answered_row(well_record("w", 5), 8);
      }
      size_t steps = rng.below(5);
      for (size_t s = 0; s < steps; ++s) {
        SolveOutcome other = rng.chance(0.3)   ? SolveOutcome::unsat()
                             : rng.chance(0.4) ? SolveOutcome::ans({{"g", Rational(5)}})
                                               : SolveOutcome::multi();
        row.trace.steps.push_back(judged_step(rng.chance(0.5), std::move(other)));
      }
      rows.push_back(std::move(row));
    }
    // independent scan
    long long inst = 0, errs = 0;
    for (const auto& row : rows) {
      bool correct_final;
      if (row.record.ill_defined()) {
        correct_final = row.decision.rejected;
      } else {
        correct_final = !row.decision.rejected &&
                        answer_matches(row.decision.value, *row.record.answer, default_tolerance());
      }
      for (const auto& s : row.trace.steps) {
        if (!s.judged) continue;
        ++inst;
        if (correct_final) continue;
        const SolveOutcome& other = s.took_new ? s.original_outcome : s.candidate_outcome;
        bool other_correct;
        if (row.record.ill_defined()) {
          other_correct = other.kind == OutcomeKind::Unsat || other.kind == OutcomeKind::Multi;
        } else {
          auto it = other.assignment.find(row.goal);
          other_correct = other.kind == OutcomeKind::Ans && it != other.assignment.end() &&
                          answer_matches(it->second, *row.record.answer, default_tolerance());
        }
        if (other_correct) ++errs;
      }
    }
    auto got = jer(rows);
    if (inst == 0) {
      CHECK_FALSE(got.has_value());
    } else {
      REQUIRE(got.has_value());
      CHECK(*got == Rational(errs, inst));
    }
  }
}

TEST_CASE("balanced sampling hits the ratio exactly and deterministically") {
  std::vector<ProblemRecord> well, ill;
  for (int i = 0; i < 600; ++i) well.push_back(well_record("w" + std::to_string(i), i));
  for (int i = 0; i < 600; ++i) ill.push_back(ill_record("i" + std::to_string(i)));

  SUBCASE("1:1 at n=1000") {
    auto sample = sample_balanced(well, ill, Rational(1), 1000, 42);
    size_t n_well = 0, n_ill = 0;
    for (const auto& r : sample) (r.ill_defined() ? n_ill : n_well)++;
    CHECK(n_well == 500);
    CHECK(n_ill == 500);
  }
  SUBCASE("alpha=2 at n=9 rounds toward the well side") {
    auto sample = sample_balanced(well, ill, Rational(2), 9, 42);
    size_t n_well = 0, n_ill = 0;
    for (const auto& r : sample) (r.ill_defined() ? n_ill : n_well)++;
    CHECK(n_well == 6);
    CHECK(n_ill == 3);
  }
  SUBCASE("the same seed reproduces the same ids") {
    auto a = sample_balanced(well, ill, Rational(1), 100, 7);
    auto b = sample_balanced(well, ill, Rational(1), 100, 7);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) CHECK(a[i].id == b[i].id);
    auto c = sample_balanced(well, ill, Rational(1), 100, 8);
    bool all_same = true;
    for (size_t i = 0; i < a.size(); ++i) all_same = all_same && a[i].id == c[i].id;
    CHECK_FALSE(all_same);
  }
  SUBCASE("insufficient pools throw") {
    std::vector<ProblemRecord> tiny = {well_record("w0", 1)};
    CHECK_THROWS_AS(sample_balanced(tiny, ill, Rational(1), 1000, 1), InsufficientPool);
  }
}

TEST_CASE("records round-trip through jsonl") {
  ProblemRecord well = well_record("gsm-1", 70000);
  ProblemRecord contra = ill_record("gsm-1-c");
  contra.type = ProblemRecord::Type::Contra;
  contra.seed_id = "gsm-1";
  ProblemRecord back_well = record_from_json_line(record_to_json_line(well));
  CHECK(back_well.id == well.id);
  CHECK(back_well.type == ProblemRecord::Type::Well);
  CHECK(*back_well.answer == Rational(70000));
  ProblemRecord back_contra = record_from_json_line(record_to_json_line(contra));
  CHECK(back_contra.type == ProblemRecord::Type::Contra);
  CHECK_FALSE(back_contra.answer.has_value());
  CHECK(*back_contra.seed_id == "gsm-1");
  // well records must carry an answer
  CHECK_THROWS(record_from_json_line(R"({"id":"x","question":"q","type":"well"})"));
  // decimal answers stay exact
  ProblemRecord frac = record_from_json_line(R"({"id":"f","question":"q","type":"well","answer":"0.5"})");
  CHECK(*frac.answer == Rational(1, 2));
}

TEST_CASE("metrics report serialization round-trips") {
  std::vector<ResultRow> rows = {
      rejected_row(ill_record("i1")), answered_row(well_record("w1", 3), 3),
      rejected_row(well_record("w2", 4))};
  rows[1].trace.steps.push_back(judged_step(true, SolveOutcome::unsat()));
  MetricsReport report = compute_metrics(rows);
  MetricsReport back = MetricsReport::from_json(report.to_json());
  CHECK(back.n_ill == report.n_ill);
  CHECK(back.n_well == report.n_well);
  CHECK(back.rejected_ill == report.rejected_ill);
  CHECK(back.solved_well == report.solved_well);
  CHECK(back.rejected_well == report.rejected_well);
  CHECK(back.judge_instances == report.judge_instances);
  CHECK(back.r_score_v == report.r_score_v);
  CHECK(back.r_star_v == report.r_star_v);
  CHECK(back.accuracy_v == report.accuracy_v);
  CHECK(back.jer_v == report.jer_v);
}

TEST_CASE("run_eval matches hand-computed counts on the ten-row fixture") {
  std::vector<ProblemRecord> dataset;
  for (int i = 0; i < 5; ++i) dataset.push_back(ill_record("i" + std::to_string(i)));
  for (int i = 0; i < 5; ++i) dataset.push_back(well_record("w" + std::to_string(i), 100 + i));

  // scripted pipeline: rejects i0..i2, answers i3/i4 wrongly;
  // answers w0/w1 correctly, w2 wrongly, rejects w3/w4
  ProblemPipeline pipeline = [](const ProblemRecord& rec) -> ResultRow {
    if (rec.id == "i0" || rec.id == "i1" || rec.id == "i2") return rejected_row(rec);
    if (rec.id == "i3" || rec.id == "i4") return answered_row(rec, 1);
    if (rec.id == "w0" || rec.id == "w1") return answered_row(rec, rec.answer->num());
    if (rec.id == "w2") return answered_row(rec, 1);
    return rejected_row(rec);
  };

  EvalRun run = run_eval(dataset, pipeline, 1, 1);
  REQUIRE(run.per_repeat.size() == 1);
  const MetricsReport& m = run.per_repeat[0];
  CHECK(m.n_ill == 5);
  CHECK(m.n_well == 5);
  CHECK(m.rejected_ill == 3);
  CHECK(m.solved_well == 2);
  CHECK(m.rejected_well == 2);
  CHECK(m.r_rate_v == Rational(3, 5));
  CHECK(m.r_score_v == Rational(6, 10));
  CHECK(m.r_star_v == Rational(5, 10));
  REQUIRE(m.accuracy_v.has_value());
  CHECK(*m.accuracy_v == Rational(2, 5));
  // k=1: stddev is zero for every aggregated metric
  for (const auto& [name, ms] : run.aggregate) CHECK(ms.second == 0.0);
}

TEST_CASE("one failing problem becomes a reject-error row, not an aborted run") {
  std::vector<ProblemRecord> dataset = {well_record("ok", 5), well_record("boom", 6)};
  ProblemPipeline pipeline = [](const ProblemRecord& rec) -> ResultRow {
    if (rec.id == "boom") throw std::runtime_error("pipeline exploded");
    return answered_row(rec, 5);
  };
  EvalRun run = run_eval(dataset, pipeline, 1, 1);
  const auto& rows = run.rows_per_repeat[0];
  REQUIRE(rows.size() == 2);
  CHECK_FALSE(rows[0].decision.rejected);
  CHECK(rows[1].decision.rejected);
  CHECK(rows[1].decision.reason == RejectReason::Error);
  CHECK(rows[1].decision.diagnostic.find("pipeline exploded") != std::string::npos);
}

TEST_CASE("parallel evaluation reproduces the serial run") {
  std::vector<ProblemRecord> dataset;
  for (int i = 0; i < 40; ++i) {
    if (i % 2 == 0) {
      dataset.push_back(ill_record("i" + std::to_string(i)));
    } else {
      dataset.push_back(well_record("w" + std::to_string(i), i));
    }
  }
  ProblemPipeline pipeline = [](const ProblemRecord& rec) -> ResultRow {
    // deterministic per-record behavior
    size_t h = std::hash<std::string>{}(rec.id);
    if (h % 3 == 0) return rejected_row(rec);
    return answered_row(rec, rec.answer ? rec.answer->num() : 1);
  };
  EvalRun serial = run_eval(dataset, pipeline, 2, 1);
  EvalRun parallel = run_eval(dataset, pipeline, 2, 4);
  REQUIRE(serial.per_repeat.size() == parallel.per_repeat.size());
  for (size_t k = 0; k < serial.per_repeat.size(); ++k) {
    CHECK(serial.per_repeat[k].to_json() == parallel.per_repeat[k].to_json());
  }
  // and repeats of a deterministic pipeline agree with each other
  CHECK(serial.per_repeat[0].to_json() == serial.per_repeat[1].to_json());
}
