#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "wellposed/smt.hpp"
#include "wellposed/state.hpp"

namespace wellposed {

enum class PromptRole {
  Initializer,
  Explorer,
  Judge,
  DownstreamCot,
  DownstreamPal,
  DownstreamBasic,
  MutatorMissing,
  MutatorContra,
  Validator,
};

const char* role_name(PromptRole role);

enum class DownstreamMethod { Cot, Pal, Basic };
PromptRole downstream_role(DownstreamMethod m);
const char* method_name(DownstreamMethod m);

struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One LLM exchange. `error` is non-empty when the transport failed; replays
// reproduce the failure.
struct TranscriptEntry {
  std::string role;
  std::string prompt;
  std::string response;
  long latency_ms = 0;
  long prompt_tokens = 0;
  long completion_tokens = 0;
  std::string error;
};

struct Transcript {
  std::vector<TranscriptEntry> entries;

  std::string to_json() const;
  static Transcript from_json(const std::string& text);
  void save(const std::string& path) const;
  static Transcript load(const std::string& path);
};

class Transport {
 public:
  virtual ~Transport() = default;
  // Returns the raw completion text; throws TransportError on failure.
  virtual std::string complete(PromptRole role, const std::string& prompt) = 0;
};

struct HttpConfig {
  std::string base_url;  // e.g. http://localhost:8000
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key;                              // literal key, optional
  std::string api_key_env = "WELLPOSED_API_KEY";    // consulted when api_key empty
  double temperature = 0.0;
  double timeout_s = 120.0;
};

// OpenAI-style chat-completion client. A fresh connection per request keeps
// the transport shareable across worker threads.
class HttpTransport : public Transport {
 public:
  explicit HttpTransport(HttpConfig cfg);
  std::string complete(PromptRole role, const std::string& prompt) override;

  // usage counters from the most recent response (0 when absent)
  long last_prompt_tokens() const { return last_prompt_tokens_; }
  long last_completion_tokens() const { return last_completion_tokens_; }

 private:
  HttpConfig cfg_;
  long last_prompt_tokens_ = 0;
  long last_completion_tokens_ = 0;
};

// Serves recorded responses, one FIFO queue per role; no network involved.
class ReplayTransport : public Transport {
 public:
  explicit ReplayTransport(const Transcript& transcript);
  std::string complete(PromptRole role, const std::string& prompt) override;
  size_t remaining() const;

 private:
  std::map<std::string, std::vector<TranscriptEntry>> queues_;
  std::map<std::string, size_t> next_;
};

// Test / scripting hook.
class CallbackTransport : public Transport {
 public:
  using Fn = std::function<std::string(PromptRole, const std::string&)>;
  explicit CallbackTransport(Fn fn) : fn_(std::move(fn)) {}
  std::string complete(PromptRole role, const std::string& prompt) override {
    return fn_(role, prompt);
  }

 private:
  Fn fn_;
};

// Prompt templates are plain text files with {placeholder} fields, one file
// per role, loaded from a directory.
class TemplateSet {
 public:
  static TemplateSet load(const std::string& dir);
  static std::string default_dir();  // $WELLPOSED_PROMPTS or ./prompts

  bool has(PromptRole role) const;
  std::string render(PromptRole role, const std::map<std::string, std::string>& fields) const;
  void set(PromptRole role, std::string text);

 private:
  std::map<std::string, std::string> templates_;
};

struct EmptyModelError : std::runtime_error {
  EmptyModelError() : std::runtime_error("initializer produced no variables") {}
};

struct InitializerModel {
  std::vector<std::string> variables;  // declared order, auto-extended
  std::vector<Constraint> constraints;
  std::string goal;
  std::vector<std::string> diagnostics;
};

struct ExplorerResult {
  std::vector<Constraint> constraints;
  bool marker_found = false;
  std::vector<std::string> diagnostics;
};

enum class JudgeVerdict { KeepOriginal, TakeNew, Unparsable };

struct DownstreamResult {
  bool reject = false;
  Rational answer;
  std::string diagnostic;
};

struct PalConfig {
  std::vector<std::string> interpreter = {"python3", "-I"};
  double timeout_s = 5.0;
};

// Binds a transport to templates and a transcript; every exchange (including
// retries and failures) lands in the transcript, so a recorded session can be
// replayed bit-identically through ReplayTransport.
class LlmSession {
 public:
  LlmSession(Transport& transport, const TemplateSet& templates, int retries = 2,
             PalConfig pal = {});

  // Draft model extraction; retries on transport failure and on responses
  // with no parseable variables, then throws EmptyModelError.
  InitializerModel call_initializer(const std::string& problem);

  // Constraints after the final <SOS> marker. Keeps constraints that mention
  // `head` or introduce a variable absent from `known_vars`; others are
  // dropped with a diagnostic. Missing marker or transport failure -> empty
  // result with marker_found == false.
  ExplorerResult call_explorer(const std::string& problem, const std::string& head,
                               const std::vector<Constraint>& head_constraints,
                               const std::vector<Constraint>& full_pool,
                               const std::vector<std::string>& known_vars);

  // Last occurrence of "set1 is better" / "set2 is better" wins; set1 is the
  // original state, set2 the candidate.
  JudgeVerdict call_judge(const std::string& problem, const std::string& head,
                          const ModelingState& original, const SolveOutcome& original_outcome,
                          const ModelingState& candidate, const SolveOutcome& candidate_outcome);

  // Final-answer extraction ("The answer is X"), the unsolvable marker, or
  // for PAL the sandboxed program's printed result. Failures reject.
  DownstreamResult call_downstream(const std::string& problem, DownstreamMethod method);

  // benchmark-forge roles share the session plumbing
  std::optional<std::string> call_raw(PromptRole role,
                                      const std::map<std::string, std::string>& fields);

  Transcript& transcript() { return transcript_; }
  const Transcript& transcript() const { return transcript_; }
  int calls() const { return calls_; }
  int retries() const { return retries_; }

 private:
  std::optional<std::string> attempt(PromptRole role, const std::string& prompt);

  Transport& transport_;
  TemplateSet templates_;
  Transcript transcript_;
  int retries_;
  int calls_ = 0;
  PalConfig pal_;
};

// Parsing helpers (exposed for tests).
std::vector<std::string> parse_variable_list(const std::string& section);
std::optional<Rational> extract_answer_number(const std::string& text, const std::string& marker);
JudgeVerdict parse_judge_verdict(const std::string& response);

}  // namespace wellposed
