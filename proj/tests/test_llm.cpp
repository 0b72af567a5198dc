#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>

#include "helpers.hpp"
#include "wellposed/llm.hpp"
#include "wellposed/subprocess.hpp"

using namespace wellposed;
using testutil::Rng;

namespace {

TemplateSet templates() { return TemplateSet::load(testutil::prompts_dir()); }

Transcript josh_transcript() {
  return Transcript::load(testutil::data_dir() + "/josh_contra_transcript.json");
}

std::string josh_problem() {
  std::ifstream in(testutil::data_dir() + "/josh_contra.txt");
  REQUIRE(in);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

bool have_python() {
  return run_with_input({"python3", "-c", "print(1)"}, "", 5.0).exit_code == 0;
}

}  // namespace

TEST_CASE("template rendering substitutes every occurrence") {
  TemplateSet set;
  set.set(PromptRole::Judge, "{head} vs {head}: {cons1}");
  CHECK(set.render(PromptRole::Judge, {{"head", "x"}, {"cons1", "c"}}) == "x vs x: c");
  CHECK_THROWS(set.render(PromptRole::Explorer, {}));
}

TEST_CASE("shipped templates load and carry their protocol markers") {
  TemplateSet set = templates();
  for (PromptRole role : {PromptRole::Initializer, PromptRole::Explorer, PromptRole::Judge,
                          PromptRole::DownstreamCot, PromptRole::DownstreamPal,
                          PromptRole::DownstreamBasic, PromptRole::MutatorMissing,
                          PromptRole::MutatorContra, PromptRole::Validator}) {
    CHECK_MESSAGE(set.has(role), role_name(role));
  }
  std::string explorer = set.render(PromptRole::Explorer, {{"question", "Q"},
                                                           {"constraint", "C"},
                                                           {"head", "H"},
                                                           {"constrain-head", "CH"}});
  CHECK(explorer.find("<SOS>") != std::string::npos);
  CHECK(explorer.find("Q") != std::string::npos);
  std::string judge = set.render(PromptRole::Judge, {{"question", "Q"},
                                                     {"head", "H"},
                                                     {"cons1", "C1"},
                                                     {"cans1", "A1"},
                                                     {"cons2", "C2"},
                                                     {"cans2", "A2"}});
  CHECK(judge.find("set1 is better") != std::string::npos);
  CHECK(judge.find("set2 is better") != std::string::npos);
  std::string cot = set.render(PromptRole::DownstreamCot, {{"question", "Q"}});
  CHECK(cot.find("The answer is") != std::string::npos);
  CHECK(cot.find("unsolvable") != std::string::npos);
}

TEST_CASE("transcript round-trips through json") {
  Transcript t;
  t.entries.push_back({"explorer", "p1", "r1\nwith newline", 12, 100, 20, ""});
  t.entries.push_back({"judge", "p2", "", 0, 0, 0, "http: timeout"});
  Transcript back = Transcript::from_json(t.to_json());
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[0].role == "explorer");
  CHECK(back.entries[0].response == "r1\nwith newline");
  CHECK(back.entries[0].latency_ms == 12);
  CHECK(back.entries[1].error == "http: timeout");
}

TEST_CASE("replay serves per-role queues and reproduces failures") {
  Transcript t;
  t.entries.push_back({"explorer", "", "first", 0, 0, 0, ""});
  t.entries.push_back({"judge", "", "verdict", 0, 0, 0, ""});
  t.entries.push_back({"explorer", "", "second", 0, 0, 0, ""});
  t.entries.push_back({"explorer", "", "", 0, 0, 0, "http: 500"});
  ReplayTransport replay(t);
  CHECK(replay.complete(PromptRole::Explorer, "ignored") == "first");
  CHECK(replay.complete(PromptRole::Judge, "x") == "verdict");
  CHECK(replay.complete(PromptRole::Explorer, "y") == "second");
  CHECK_THROWS_AS(replay.complete(PromptRole::Explorer, "z"), TransportError);  // recorded failure
  CHECK_THROWS_AS(replay.complete(PromptRole::Explorer, "w"), TransportError);  // exhausted
  CHECK_THROWS_AS(replay.complete(PromptRole::Initializer, "v"), TransportError);
}

TEST_CASE("initializer parses the recorded draft: 7 variables, 7 constraints, goal") {
  Transcript t = josh_transcript();
  ReplayTransport replay(t);
  TemplateSet set = templates();
  LlmSession session(replay, set);
  InitializerModel model = session.call_initializer(josh_problem());
  CHECK(model.variables == std::vector<std::string>{
                               "initial-cost", "repair-cost", "increased-value-percentage",
                               "expected-value", "market-value-after-repairs", "profit",
                               "total-investment"});
  CHECK(model.constraints.size() == 7);
  CHECK(model.goal == "profit");
  CHECK(session.calls() == 1);
  CHECK(session.transcript().entries.size() == 1);
}

TEST_CASE("initializer auto-extends undeclared constraint variables") {
  CallbackTransport transport([](PromptRole, const std::string&) {
    return std::string("Variables:\n\"a\"\nConstraints:\nsolver.add(a == b + 1)\nGoal: a\n");
  });
  TemplateSet set = templates();
  LlmSession session(transport, set);
  InitializerModel model = session.call_initializer("q");
  CHECK(model.variables == std::vector<std::string>{"a", "b"});
  CHECK_FALSE(model.diagnostics.empty());
}

TEST_CASE("initializer retries then reports an empty model") {
  int calls = 0;
  CallbackTransport transport([&](PromptRole, const std::string&) {
    ++calls;
    return std::string("I cannot model this problem at all.");
  });
  TemplateSet set = templates();
  LlmSession session(transport, set, 2);
  CHECK_THROWS_AS(session.call_initializer("q"), EmptyModelError);
  CHECK(calls == 3);  // initial attempt + 2 retries
}

TEST_CASE("initializer output always satisfies vars(constraints) within variables") {
  Rng rng(2025);
  TemplateSet set = templates();
  for (int trial = 0; trial < 60; ++trial) {
    // fuzz a response with a mix of valid lines, junk and partial sections
    std::string response;
    if (rng.chance(0.8)) response += "Variables:\n\"v1\", \"v2\"\n";
    response += "Constraints:\n";
    for (int i = 0; i < 4; ++i) {
      if (rng.chance(0.5)) {
        response += render_constraint(testutil::gen_constraint(rng, 2)) + "\n";
      } else {
        response += "solver.add(v1 >= \n";  // malformed
      }
    }
    if (rng.chance(0.5)) response += "Goal: v1\n";
    CallbackTransport transport([&](PromptRole, const std::string&) { return response; });
    LlmSession session(transport, set, 0);
    try {
      InitializerModel model = session.call_initializer("q");
      for (const auto& v : vars_of(model.constraints)) {
        CHECK(std::find(model.variables.begin(), model.variables.end(), v) !=
              model.variables.end());
      }
      CHECK(std::find(model.variables.begin(), model.variables.end(), model.goal) !=
            model.variables.end());
    } catch (const EmptyModelError&) {
      // acceptable for junk-only responses
    }
  }
}

TEST_CASE("explorer keeps refinements after the final marker") {
  TemplateSet set = templates();

  SUBCASE("constraints all mentioning the head") {
    CallbackTransport transport([](PromptRole, const std::string&) {
      return std::string(
          "Reasoning...\n<SOS>\n"
          "solver.add(expected-value == initial-cost * (1 + increased-value-percentage))\n"
          "solver.add(expected-value >= 0)\n"
          "solver.add(expected-value == market-value-after-repairs)\n");
    });
    LlmSession session(transport, set);
    ExplorerResult r = session.call_explorer(
        "q", "expected-value", {}, {},
        {"expected-value", "initial-cost", "increased-value-percentage",
         "market-value-after-repairs"});
    CHECK(r.marker_found);
    CHECK(r.constraints.size() == 3);
    for (const auto& c : r.constraints) CHECK(vars(c).count("expected-value") == 1);
  }
  SUBCASE("definition of a newly introduced variable survives") {
    CallbackTransport transport([](PromptRole, const std::string&) {
      return std::string(
          "<SOS>\n"
          "solver.add(expected-value == initial-cost * (basic_multiplier + rate))\n"
          "solver.add(basic_multiplier == 1)\n");
    });
    LlmSession session(transport, set);
    ExplorerResult r = session.call_explorer("q", "expected-value", {}, {},
                                             {"expected-value", "initial-cost", "rate"});
    CHECK(r.constraints.size() == 2);
  }
  SUBCASE("constraint over known non-head variables is dropped with a diagnostic") {
    CallbackTransport transport([](PromptRole, const std::string&) {
      return std::string("<SOS>\nsolver.add(expected-value >= 0)\nsolver.add(repair-cost == 50000)\n");
    });
    LlmSession session(transport, set);
    ExplorerResult r =
        session.call_explorer("q", "expected-value", {}, {}, {"expected-value", "repair-cost"});
    CHECK(r.constraints.size() == 1);
    REQUIRE_FALSE(r.diagnostics.empty());
    CHECK(r.diagnostics[0].find("repair-cost") != std::string::npos);
  }
  SUBCASE("no marker means no refinement") {
    CallbackTransport transport(
        [](PromptRole, const std::string&) { return std::string("no marker here"); });
    LlmSession session(transport, set);
    ExplorerResult r = session.call_explorer("q", "x", {}, {}, {"x"});
    CHECK_FALSE(r.marker_found);
    CHECK(r.constraints.empty());
  }
  SUBCASE("the last marker wins") {
    CallbackTransport transport([](PromptRole, const std::string&) {
      return std::string("<SOS>\nsolver.add(x == 1)\nwait, reconsidering\n<SOS>\nsolver.add(x == 2)\n");
    });
    LlmSession session(transport, set);
    ExplorerResult r = session.call_explorer("q", "x", {}, {}, {"x"});
    REQUIRE(r.constraints.size() == 1);
    CHECK(r.constraints[0]->rhs->value == Rational(2));
  }
}

TEST_CASE("judge verdict parsing") {
  CHECK(parse_judge_verdict("I think Constrains set2 is better") == JudgeVerdict::TakeNew);
  CHECK(parse_judge_verdict("I think Constraints set1 is better") == JudgeVerdict::KeepOriginal);
  CHECK(parse_judge_verdict("set1 is better... no wait, actually SET2 IS BETTER") ==
        JudgeVerdict::TakeNew);
  CHECK(parse_judge_verdict("set2 is better? hmm, on reflection set1 is better") ==
        JudgeVerdict::KeepOriginal);
  CHECK(parse_judge_verdict("") == JudgeVerdict::Unparsable);
  CHECK(parse_judge_verdict("both are fine") == JudgeVerdict::Unparsable);
}

TEST_CASE("judge call renders outcomes and parses the verdict") {
  TemplateSet set = templates();
  std::string seen_prompt;
  CallbackTransport transport([&](PromptRole role, const std::string& prompt) {
    CHECK(role == PromptRole::Judge);
    seen_prompt = prompt;
    return std::string("I think Constraints set2 is better");
  });
  LlmSession session(transport, set);
  ModelingState original, candidate;
  original.queue = {"x"};
  original.goal = "x";
  original.pool = parse_constraints("x == 1").constraints;
  candidate = original;
  candidate.pool = parse_constraints("x == 2").constraints;
  SolveOutcome left = SolveOutcome::ans({{"x", Rational(1)}});
  SolveOutcome right = SolveOutcome::make_error("timeout: solver took too long");
  CHECK(session.call_judge("q", "x", original, left, candidate, right) == JudgeVerdict::TakeNew);
  // outcome renderings land in the prompt, error reasons verbatim
  CHECK(seen_prompt.find("x = 1") != std::string::npos);
  CHECK(seen_prompt.find("timeout: solver took too long") != std::string::npos);
  CHECK(seen_prompt.find("solver.add(x == 1)") != std::string::npos);
  CHECK(seen_prompt.find("solver.add(x == 2)") != std::string::npos);
}

TEST_CASE("downstream answer extraction") {
  TemplateSet set = templates();

  SUBCASE("plain final answer") {
    CallbackTransport transport([](PromptRole, const std::string&) {
      return std::string("Step 1... Step 2... The answer is 70000");
    });
    LlmSession session(transport, set);
    DownstreamResult r = session.call_downstream("q", DownstreamMethod::Cot);
    CHECK_FALSE(r.reject);
    CHECK(r.answer == Rational(70000));
  }
  SUBCASE("thousands separators and currency") {
    CallbackTransport transport([](PromptRole, const std::string&) {
      return std::string("So the profit is large. The answer is $70,000.");
    });
    LlmSession session(transport, set);
    DownstreamResult r = session.call_downstream("q", DownstreamMethod::Cot);
    CHECK_FALSE(r.reject);
    CHECK(r.answer == Rational(70000));
  }
  SUBCASE("unsolvable marker rejects") {
    CallbackTransport transport([](PromptRole, const std::string&) {
      return std::string("The repairs cost is unknown, this is unsolvable");
    });
    LlmSession session(transport, set);
    CHECK(session.call_downstream("q", DownstreamMethod::Cot).reject);
  }
  SUBCASE("no pattern rejects with a diagnostic") {
    CallbackTransport transport(
        [](PromptRole, const std::string&) { return std::string("I like this problem."); });
    LlmSession session(transport, set);
    DownstreamResult r = session.call_downstream("q", DownstreamMethod::Basic);
    CHECK(r.reject);
    CHECK_FALSE(r.diagnostic.empty());
  }
  SUBCASE("last occurrence wins") {
    CallbackTransport transport([](PromptRole, const std::string&) {
      return std::string("The answer is 5. No wait. The answer is 7");
    });
    LlmSession session(transport, set);
    CHECK(session.call_downstream("q", DownstreamMethod::Cot).answer == Rational(7));
  }
}

TEST_CASE("pal runs the emitted program in a sandbox") {
  if (!have_python()) return;  // interpreter not installed here
  TemplateSet set = templates();

  SUBCASE("prints a number") {
    CallbackTransport transport([](PromptRole, const std::string&) {
      return std::string("```python\nprofit = 200000 - 130000\nprint(profit)\n```\n");
    });
    LlmSession session(transport, set);
    DownstreamResult r = session.call_downstream("q", DownstreamMethod::Pal);
    CHECK_FALSE(r.reject);
    CHECK(r.answer == Rational(70000));
  }
  SUBCASE("hanging program hits the wall clock") {
    CallbackTransport transport([](PromptRole, const std::string&) {
      return std::string("```python\nwhile True:\n    pass\n```\n");
    });
    PalConfig pal;
    pal.timeout_s = 0.3;
    LlmSession session(transport, set, 0, pal);
    DownstreamResult r = session.call_downstream("q", DownstreamMethod::Pal);
    CHECK(r.reject);
  }
  SUBCASE("no code block rejects") {
    CallbackTransport transport(
        [](PromptRole, const std::string&) { return std::string("cannot write code today"); });
    LlmSession session(transport, set);
    CHECK(session.call_downstream("q", DownstreamMethod::Pal).reject);
  }
}

TEST_CASE("number extraction helper") {
  CHECK(extract_answer_number("The answer is 42", "the answer is") == Rational(42));
  CHECK(extract_answer_number("the ANSWER is -3.5 dollars", "the answer is") == Rational(-7, 2));
  CHECK(extract_answer_number("The answer is 1,234,567", "the answer is") == Rational(1234567));
  CHECK_FALSE(extract_answer_number("The answer is\n42", "the answer is").has_value());
  CHECK_FALSE(extract_answer_number("no marker", "the answer is").has_value());
}

TEST_CASE("sessions record every attempt including failures") {
  int calls = 0;
  CallbackTransport transport([&](PromptRole, const std::string&) -> std::string {
    if (++calls == 1) throw TransportError("http: flaky");
    return "<SOS>\nsolver.add(x == 1)\n";
  });
  TemplateSet set = templates();
  LlmSession session(transport, set, 2);
  ExplorerResult r = session.call_explorer("q", "x", {}, {}, {"x"});
  CHECK(r.constraints.size() == 1);
  REQUIRE(session.transcript().entries.size() == 2);
  CHECK(session.transcript().entries[0].error == "http: flaky");
  CHECK(session.transcript().entries[1].error.empty());
  CHECK(session.calls() == 2);
}

TEST_CASE("parsing is total over fuzzed responses") {
  Rng rng(123);
  TemplateSet set = templates();
  for (int i = 0; i < 100; ++i) {
    std::string junk;
    size_t len = rng.below(200);
    for (size_t k = 0; k < len; ++k) junk += static_cast<char>(rng.below(256));
    CHECK_NOTHROW(parse_judge_verdict(junk));
    CHECK_NOTHROW(extract_answer_number(junk, "the answer is"));
    CallbackTransport transport([&](PromptRole, const std::string&) { return junk; });
    LlmSession session(transport, set, 0);
    CHECK_NOTHROW(session.call_explorer("q", "x", {}, {}, {"x"}));
    CHECK_NOTHROW(session.call_downstream("q", DownstreamMethod::Cot));
  }
}

TEST_CASE("bare constraint lines over goal-like names do not truncate sections") {
  CallbackTransport transport([](PromptRole, const std::string&) {
    return std::string(
        "Variables:\n\"goal-value\", \"other\"\n"
        "Constraints:\n"
        "goal-value == other + 1\n"
        "other == 2\n"
        "Goal: goal-value\n");
  });
  TemplateSet set = templates();
  LlmSession session(transport, set);
  InitializerModel model = session.call_initializer("q");
  CHECK(model.constraints.size() == 2);
  CHECK(model.goal == "goal-value");
}
