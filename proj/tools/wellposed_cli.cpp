// wellposed - detect ill-defined math word problems with an LLM-refined
// constraint model and an SMT solver, evaluate robustness metrics, and
// build mutated benchmark sets.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <json.hpp>

#include "wellposed/eval.hpp"
#include "wellposed/forge.hpp"
#include "wellposed/router.hpp"
#include "wellposed/search.hpp"
#include "wellposed/subprocess.hpp"

using namespace wellposed;
using nlohmann::json;

namespace {

struct AppConfig {
  SolverConfig solver;
  SearchConfig search;
  HttpConfig http;
  PalConfig pal;
  int llm_retries = 2;
  std::string prompts_dir;
};

AppConfig load_config(const std::string& path) {
  AppConfig cfg;
  cfg.prompts_dir = TemplateSet::default_dir();
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  json j = json::parse(in);
  if (j.contains("solver")) {
    const auto& s = j["solver"];
    if (s.contains("command")) cfg.solver.command = split_command(s["command"].get<std::string>());
    cfg.solver.timeout_s = s.value("timeout_s", cfg.solver.timeout_s);
    cfg.solver.logic = s.value("logic", cfg.solver.logic);
    cfg.solver.block_full_assignment =
        s.value("block_full_assignment", cfg.solver.block_full_assignment);
  }
  if (j.contains("search")) {
    const auto& s = j["search"];
    cfg.search.passes = s.value("passes", cfg.search.passes);
    if (s.value("order", "appearance") == std::string("frequency")) {
      cfg.search.order = SearchConfig::Order::Frequency;
    }
    cfg.search.max_queue = s.value("max_queue", cfg.search.max_queue);
    cfg.search.max_llm_calls = s.value("max_llm_calls", cfg.search.max_llm_calls);
    cfg.search.draft_requires_ans = s.value("draft_requires_ans", cfg.search.draft_requires_ans);
  }
  if (j.contains("llm")) {
    const auto& s = j["llm"];
    cfg.http.base_url = s.value("endpoint", cfg.http.base_url);
    cfg.http.path = s.value("path", cfg.http.path);
    cfg.http.model = s.value("model", cfg.http.model);
    cfg.http.api_key_env = s.value("api_key_env", cfg.http.api_key_env);
    cfg.http.temperature = s.value("temperature", cfg.http.temperature);
    cfg.http.timeout_s = s.value("timeout_s", cfg.http.timeout_s);
    cfg.llm_retries = s.value("retries", cfg.llm_retries);
  }
  if (j.contains("pal")) {
    const auto& s = j["pal"];
    if (s.contains("interpreter")) {
      cfg.pal.interpreter = split_command(s["interpreter"].get<std::string>());
    }
    cfg.pal.timeout_s = s.value("timeout_s", cfg.pal.timeout_s);
  }
  if (j.contains("prompts")) cfg.prompts_dir = j["prompts"].get<std::string>();
  return cfg;
}

std::string read_problem(const std::string& arg) {
  std::ifstream in(arg);
  if (in) {
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }
  return arg;  // literal problem text
}

struct ModeSpec {
  bool baseline = false;
  RouteMode route = RouteMode::smt_only();
  DownstreamMethod method = DownstreamMethod::Cot;
};

ModeSpec parse_mode(const std::string& mode) {
  ModeSpec spec;
  auto method_of = [](const std::string& name) {
    if (name == "cot") return DownstreamMethod::Cot;
    if (name == "pal") return DownstreamMethod::Pal;
    if (name == "basic") return DownstreamMethod::Basic;
    throw CLI::ValidationError("unknown downstream method: " + name);
  };
  if (mode == "smt-only") return spec;
  if (mode.rfind("hybrid:", 0) == 0) {
    spec.method = method_of(mode.substr(7));
    spec.route = RouteMode::with(spec.method);
    return spec;
  }
  if (mode.rfind("baseline:", 0) == 0) {
    spec.baseline = true;
    spec.method = method_of(mode.substr(9));
    return spec;
  }
  throw CLI::ValidationError("unknown mode: " + mode);
}

ResultRow run_problem(const ProblemRecord& record, const AppConfig& cfg,
                      const TemplateSet& templates, Transport& transport, const ModeSpec& mode) {
  ResultRow row;
  row.record = record;
  LlmSession session(transport, templates, cfg.llm_retries, cfg.pal);

  if (mode.baseline) {
    DownstreamResult down = session.call_downstream(record.question, mode.method);
    if (down.reject) {
      row.decision.rejected = true;
      row.decision.reason = RejectReason::Unmodelable;
      row.decision.diagnostic = down.diagnostic;
    } else {
      row.decision.value = down.answer;
      row.decision.source = mode.method == DownstreamMethod::Cot   ? AnswerSource::Cot
                            : mode.method == DownstreamMethod::Pal ? AnswerSource::Pal
                                                                   : AnswerSource::Basic;
    }
    row.outcome = OutcomeKind::Error;  // no formal layer involved
    row.transcript = session.transcript();
    return row;
  }

  SmtSolver solver(cfg.solver);
  SearchEngine engine(session, solver, cfg.search);
  SearchResult search = engine.run_search(record.question);
  row.outcome = search.outcome.kind;
  row.goal = search.state.goal;
  row.trace = std::move(search.trace);
  row.decision = route(search.outcome, search.state.goal, mode.route, record.question, &session);
  row.transcript = session.transcript();
  return row;
}

json decision_json(const ResultRow& row) {
  json out;
  out["outcome"] = outcome_name(row.outcome);
  if (row.decision.rejected) {
    out["decision"] = "reject";
    out["reason"] = reject_reason_name(row.decision.reason);
  } else {
    out["decision"] = "answer";
    out["answer"] = row.decision.value.to_decimal_string();
    out["source"] = answer_source_name(row.decision.source);
  }
  if (!row.decision.diagnostic.empty()) out["diagnostic"] = row.decision.diagnostic;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ill-defined math word problem detector"};
  app.require_subcommand(1);

  std::string config_path, prompts_override;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--prompts", prompts_override, "prompt template directory");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "model one problem and classify it");
  std::string problem_arg, replay_path, record_path, solve_mode = "smt-only", trace_path;
  solve_cmd->add_option("--problem", problem_arg, "problem text or a file containing it")
      ->required();
  solve_cmd->add_option("--replay", replay_path, "serve LLM responses from this transcript");
  solve_cmd->add_option("--record", record_path, "write the session transcript here");
  solve_cmd->add_option("--mode", solve_mode, "smt-only | hybrid:cot | hybrid:pal | hybrid:basic");
  solve_cmd->add_option("--trace", trace_path, "write the search trace JSON here");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "run a dataset and report metrics");
  std::string dataset_path, eval_mode = "smt-only", out_path = "report.json";
  std::string alpha_text = "1";
  size_t sample_n = 0;
  int repeats = 1, jobs = 1;
  uint64_t seed = 0;
  std::string replay_dir, record_dir;
  eval_cmd->add_option("--dataset", dataset_path, "JSONL problem records")->required();
  eval_cmd->add_option("--mode", eval_mode,
                       "smt-only | hybrid:cot | hybrid:pal | baseline:cot | baseline:pal | "
                       "baseline:basic");
  eval_cmd->add_option("--alpha", alpha_text, "well:ill sampling ratio (requires --n)");
  eval_cmd->add_option("--n", sample_n, "sample size drawn at ratio alpha");
  eval_cmd->add_option("--repeats", repeats, "repeat count for mean/stddev");
  eval_cmd->add_option("--seed", seed, "sampling seed");
  eval_cmd->add_option("--jobs", jobs, "worker threads");
  eval_cmd->add_option("--out", out_path, "report JSON path");
  eval_cmd->add_option("--replay-dir", replay_dir, "per-problem transcripts <id>.json to replay");
  eval_cmd->add_option("--record-dir", record_dir, "write per-problem transcripts here");

  // mutate
  auto* mutate_cmd = app.add_subcommand("mutate", "derive ill-defined problems from seeds");
  std::string seeds_path, mutate_type = "missing", forge_out = "mutated.jsonl",
              review_out = "review.jsonl", validators_path;
  mutate_cmd->add_option("--seeds", seeds_path, "JSONL of well-defined seed records")->required();
  mutate_cmd->add_option("--type", mutate_type, "missing | contra");
  mutate_cmd->add_option("--validators", validators_path,
                         "JSON list of validator endpoint configs");
  mutate_cmd->add_option("--out", forge_out, "accepted candidates JSONL");
  mutate_cmd->add_option("--review", review_out, "human review queue JSONL");

  CLI11_PARSE(app, argc, argv);

  try {
    AppConfig cfg = load_config(config_path);
    if (!prompts_override.empty()) cfg.prompts_dir = prompts_override;
    TemplateSet templates = TemplateSet::load(cfg.prompts_dir);

    if (solve_cmd->parsed()) {
      ModeSpec mode = parse_mode(solve_mode);
      std::unique_ptr<Transport> transport;
      Transcript recorded;
      if (!replay_path.empty()) {
        recorded = Transcript::load(replay_path);
        transport = std::make_unique<ReplayTransport>(recorded);
      } else {
        if (cfg.http.base_url.empty()) {
          throw std::runtime_error("no LLM endpoint configured (llm.endpoint) and no --replay");
        }
        transport = std::make_unique<HttpTransport>(cfg.http);
      }
      ProblemRecord record;
      record.id = "cli";
      record.question = read_problem(problem_arg);
      ResultRow row = run_problem(record, cfg, templates, *transport, mode);
      if (!record_path.empty()) row.transcript.save(record_path);
      json out = decision_json(row);
      if (!trace_path.empty()) {
        json steps = json::array();
        for (const auto& s : row.trace.steps) {
          steps.push_back({{"head", s.head},
                           {"changed", s.changed},
                           {"judged", s.judged},
                           {"took_new", s.took_new},
                           {"new_vars", s.new_vars}});
        }
        std::ofstream trace_out(trace_path);
        trace_out << json{{"truncated", row.trace.truncated},
                          {"reason", row.trace.truncation_reason},
                          {"llm_calls", row.trace.llm_calls},
                          {"steps", steps}}
                         .dump(2)
                  << "\n";
        out["trace"] = trace_path;
      }
      std::cout << out.dump(2) << "\n";
      return row.decision.rejected && row.decision.reason == RejectReason::Error ? 2 : 0;
    }

    if (eval_cmd->parsed()) {
      ModeSpec mode = parse_mode(eval_mode);
      std::vector<ProblemRecord> dataset = load_jsonl(dataset_path);
      if (sample_n > 0) {
        auto alpha = Rational::parse_decimal(alpha_text);
        if (!alpha) throw std::runtime_error("bad --alpha value: " + alpha_text);
        std::vector<ProblemRecord> well, ill;
        for (auto& r : dataset) (r.ill_defined() ? ill : well).push_back(r);
        dataset = sample_balanced(well, ill, *alpha, sample_n, seed);
      }
      if (!record_dir.empty()) std::filesystem::create_directories(record_dir);

      ProblemPipeline pipeline = [&](const ProblemRecord& record) {
        std::unique_ptr<Transport> transport;
        Transcript recorded;
        if (!replay_dir.empty()) {
          recorded = Transcript::load(replay_dir + "/" + record.id + ".json");
          transport = std::make_unique<ReplayTransport>(recorded);
        } else {
          if (cfg.http.base_url.empty()) {
            throw std::runtime_error("no LLM endpoint configured and no --replay-dir");
          }
          transport = std::make_unique<HttpTransport>(cfg.http);
        }
        ResultRow row = run_problem(record, cfg, templates, *transport, mode);
        if (!record_dir.empty()) row.transcript.save(record_dir + "/" + record.id + ".json");
        return row;
      };

      EvalRun run = run_eval(dataset, pipeline, repeats, jobs);
      json config_echo = {{"mode", eval_mode}, {"dataset", dataset_path},
                          {"alpha", alpha_text}, {"n", sample_n},
                          {"repeats", repeats},  {"seed", seed}};
      std::ofstream out(out_path);
      out << eval_report_json(run, config_echo.dump()) << "\n";
      for (const auto& [name, ms] : run.aggregate) {
        printf("%-10s %.4f +/- %.4f\n", name.c_str(), ms.first, ms.second);
      }
      std::cout << "report written to " << out_path << "\n";
      return 0;
    }

    if (mutate_cmd->parsed()) {
      auto type = problem_type_from(mutate_type);
      if (!type || *type == ProblemRecord::Type::Well) {
        throw std::runtime_error("--type must be missing or contra");
      }
      if (cfg.http.base_url.empty() && validators_path.empty()) {
        throw std::runtime_error("mutate needs an LLM endpoint config");
      }
      std::vector<ProblemRecord> seeds = load_jsonl(seeds_path);

      HttpTransport mutator_transport(cfg.http);
      LlmSession mutator(mutator_transport, templates, cfg.llm_retries, cfg.pal);

      std::vector<std::unique_ptr<Transport>> validator_store;
      std::vector<Transport*> validators;
      if (!validators_path.empty()) {
        std::ifstream in(validators_path);
        if (!in) throw std::runtime_error("cannot open validators config");
        json list = json::parse(in);
        for (const auto& v : list) {
          HttpConfig vc = cfg.http;
          vc.base_url = v.value("endpoint", vc.base_url);
          vc.model = v.value("model", vc.model);
          vc.api_key_env = v.value("api_key_env", vc.api_key_env);
          validator_store.push_back(std::make_unique<HttpTransport>(vc));
          validators.push_back(validator_store.back().get());
        }
      } else {
        // Default panel of three votes; point --validators at distinct
        // endpoints for a heterogeneous panel.
        for (int i = 0; i < 3; ++i) {
          validator_store.push_back(std::make_unique<HttpTransport>(cfg.http));
          validators.push_back(validator_store.back().get());
        }
      }

      Forge forge(mutator, validators, templates);
      ForgeRunStats stats = run_forge(seeds, *type, forge, forge_out, review_out);
      printf("seeds %zu, skipped %zu, failed %zu, accepted %zu, review %zu\n", stats.seeds,
             stats.skipped_existing, stats.extraction_failures, stats.accepted, stats.review);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
