#include "wellposed/llm.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "wellposed/subprocess.hpp"

namespace wellposed {

using nlohmann::json;

const char* role_name(PromptRole role) {
  switch (role) {
    case PromptRole::Initializer: return "initializer";
    case PromptRole::Explorer: return "explorer";
    case PromptRole::Judge: return "judge";
    case PromptRole::DownstreamCot: return "downstream:cot";
    case PromptRole::DownstreamPal: return "downstream:pal";
    case PromptRole::DownstreamBasic: return "downstream:basic";
    case PromptRole::MutatorMissing: return "mutate:missing";
    case PromptRole::MutatorContra: return "mutate:contra";
    case PromptRole::Validator: return "validator";
  }
  return "?";
}

PromptRole downstream_role(DownstreamMethod m) {
  switch (m) {
    case DownstreamMethod::Cot: return PromptRole::DownstreamCot;
    case DownstreamMethod::Pal: return PromptRole::DownstreamPal;
    case DownstreamMethod::Basic: return PromptRole::DownstreamBasic;
  }
  return PromptRole::DownstreamBasic;
}

const char* method_name(DownstreamMethod m) {
  switch (m) {
    case DownstreamMethod::Cot: return "cot";
    case DownstreamMethod::Pal: return "pal";
    case DownstreamMethod::Basic: return "basic";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Transcript

std::string Transcript::to_json() const {
  json entries_json = json::array();
  for (const auto& e : entries) {
    entries_json.push_back({{"role", e.role},
                            {"prompt", e.prompt},
                            {"response", e.response},
                            {"latency_ms", e.latency_ms},
                            {"prompt_tokens", e.prompt_tokens},
                            {"completion_tokens", e.completion_tokens},
                            {"error", e.error}});
  }
  return json{{"entries", entries_json}}.dump(2);
}

Transcript Transcript::from_json(const std::string& text) {
  Transcript t;
  json j = json::parse(text);
  for (const auto& e : j.at("entries")) {
    TranscriptEntry entry;
    entry.role = e.value("role", "");
    entry.prompt = e.value("prompt", "");
    entry.response = e.value("response", "");
    entry.latency_ms = e.value("latency_ms", 0L);
    entry.prompt_tokens = e.value("prompt_tokens", 0L);
    entry.completion_tokens = e.value("completion_tokens", 0L);
    entry.error = e.value("error", "");
    t.entries.push_back(std::move(entry));
  }
  return t;
}

void Transcript::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write transcript: " + path);
  out << to_json() << "\n";
}

Transcript Transcript::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read transcript: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

// ---------------------------------------------------------------------------
// Transports

HttpTransport::HttpTransport(HttpConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.api_key.empty() && !cfg_.api_key_env.empty()) {
    if (const char* k = std::getenv(cfg_.api_key_env.c_str())) cfg_.api_key = k;
  }
}

std::string HttpTransport::complete(PromptRole, const std::string& prompt) {
  httplib::Client client(cfg_.base_url);
  client.set_connection_timeout(static_cast<time_t>(cfg_.timeout_s), 0);
  client.set_read_timeout(static_cast<time_t>(cfg_.timeout_s), 0);

  httplib::Headers headers;
  if (!cfg_.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_key);

  json body = {{"model", cfg_.model},
               {"temperature", cfg_.temperature},
               {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};

  auto res = client.Post(cfg_.path, headers, body.dump(), "application/json");
  if (!res) throw TransportError("http: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw TransportError("http status " + std::to_string(res->status) + ": " + res->body);
  }
  try {
    json j = json::parse(res->body);
    if (j.contains("usage")) {
      last_prompt_tokens_ = j["usage"].value("prompt_tokens", 0L);
      last_completion_tokens_ = j["usage"].value("completion_tokens", 0L);
    } else {
      last_prompt_tokens_ = last_completion_tokens_ = 0;
    }
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw TransportError(std::string("bad completion payload: ") + e.what());
  }
}

ReplayTransport::ReplayTransport(const Transcript& transcript) {
  for (const auto& e : transcript.entries) queues_[e.role].push_back(e);
}

std::string ReplayTransport::complete(PromptRole role, const std::string&) {
  const std::string key = role_name(role);
  auto it = queues_.find(key);
  size_t& idx = next_[key];
  if (it == queues_.end() || idx >= it->second.size()) {
    throw TransportError("replay transcript exhausted for role " + key);
  }
  const TranscriptEntry& entry = it->second[idx++];
  if (!entry.error.empty()) throw TransportError(entry.error);
  return entry.response;
}

size_t ReplayTransport::remaining() const {
  size_t n = 0;
  for (const auto& [role, q] : queues_) {
    auto it = next_.find(role);
    n += q.size() - (it == next_.end() ? 0 : it->second);
  }
  return n;
}

// ---------------------------------------------------------------------------
// Templates

namespace {

const char* template_file(PromptRole role) {
  switch (role) {
    case PromptRole::Initializer: return "initializer.txt";
    case PromptRole::Explorer: return "explorer.txt";
    case PromptRole::Judge: return "judge.txt";
    case PromptRole::DownstreamCot: return "downstream_cot.txt";
    case PromptRole::DownstreamPal: return "downstream_pal.txt";
    case PromptRole::DownstreamBasic: return "downstream_basic.txt";
    case PromptRole::MutatorMissing: return "mutate_missing.txt";
    case PromptRole::MutatorContra: return "mutate_contra.txt";
    case PromptRole::Validator: return "validate.txt";
  }
  return "";
}

constexpr PromptRole kAllRoles[] = {
    PromptRole::Initializer,    PromptRole::Explorer,       PromptRole::Judge,
    PromptRole::DownstreamCot,  PromptRole::DownstreamPal,  PromptRole::DownstreamBasic,
    PromptRole::MutatorMissing, PromptRole::MutatorContra,  PromptRole::Validator,
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(tolower(c)); });
  return s;
}

}  // namespace

std::string TemplateSet::default_dir() {
  if (const char* env = std::getenv("WELLPOSED_PROMPTS"); env && *env) return env;
  std::string exe = executable_dir();
  for (const std::string& dir : {std::string("prompts"), exe + "/../prompts", exe + "/../../prompts"}) {
    std::ifstream probe(dir + "/initializer.txt");
    if (probe) return dir;
  }
  return "prompts";
}

TemplateSet TemplateSet::load(const std::string& dir) {
  TemplateSet set;
  for (PromptRole role : kAllRoles) {
    std::ifstream in(dir + "/" + template_file(role));
    if (!in) continue;
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    set.templates_[role_name(role)] = std::move(text);
  }
  return set;
}

bool TemplateSet::has(PromptRole role) const { return templates_.count(role_name(role)) > 0; }

void TemplateSet::set(PromptRole role, std::string text) {
  templates_[role_name(role)] = std::move(text);
}

std::string TemplateSet::render(PromptRole role,
                                const std::map<std::string, std::string>& fields) const {
  auto it = templates_.find(role_name(role));
  if (it == templates_.end()) {
    throw std::runtime_error(std::string("missing prompt template for role ") + role_name(role));
  }
  std::string out = it->second;
  for (const auto& [key, value] : fields) {
    const std::string needle = "{" + key + "}";
    size_t pos = 0;
    while ((pos = out.find(needle, pos)) != std::string::npos) {
      out.replace(pos, needle.size(), value);
      pos += value.size();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Response parsing helpers

std::vector<std::string> parse_variable_list(const std::string& section) {
  std::vector<std::string> names;
  auto push = [&](std::string tok) {
    // strip whitespace and quotes
    size_t b = tok.find_first_not_of(" \t\r\n\"'");
    size_t e = tok.find_last_not_of(" \t\r\n\"'.,;");
    if (b == std::string::npos || e < b) return;
    tok = tok.substr(b, e - b + 1);
    if (!is_valid_var_name(tok)) return;
    if (std::find(names.begin(), names.end(), tok) == names.end()) names.push_back(tok);
  };
  // Quoted tokens take priority; fall back to comma/newline separation.
  bool any_quote = section.find('"') != std::string::npos;
  if (any_quote) {
    size_t pos = 0;
    while (true) {
      size_t open = section.find('"', pos);
      if (open == std::string::npos) break;
      size_t close = section.find('"', open + 1);
      if (close == std::string::npos) break;
      push(section.substr(open + 1, close - open - 1));
      pos = close + 1;
    }
  } else {
    std::string token;
    std::istringstream in(section);
    while (std::getline(in, token, ',')) push(token);
  }
  return names;
}

JudgeVerdict parse_judge_verdict(const std::string& response) {
  std::string hay = lower(response);
  size_t p1 = hay.rfind("set1 is better");
  size_t p2 = hay.rfind("set2 is better");
  if (p1 == std::string::npos && p2 == std::string::npos) return JudgeVerdict::Unparsable;
  if (p2 == std::string::npos) return JudgeVerdict::KeepOriginal;
  if (p1 == std::string::npos) return JudgeVerdict::TakeNew;
  return p2 > p1 ? JudgeVerdict::TakeNew : JudgeVerdict::KeepOriginal;
}

std::optional<Rational> extract_answer_number(const std::string& text, const std::string& marker) {
  std::string hay = lower(text);
  std::string needle = lower(marker);
  size_t at = hay.rfind(needle);
  if (at == std::string::npos) return std::nullopt;
  size_t pos = at + needle.size();
  // Skip filler until a digit or sign.
  while (pos < text.size()) {
    char c = text[pos];
    if (isdigit(static_cast<unsigned char>(c)) || c == '-') break;
    if (c == '\n') return std::nullopt;  // marker line carried no number
    ++pos;
  }
  std::string num;
  bool seen_digit = false;
  while (pos < text.size()) {
    char c = text[pos];
    if (isdigit(static_cast<unsigned char>(c))) {
      num += c;
      seen_digit = true;
    } else if (c == '-' && num.empty()) {
      num += c;
    } else if (c == ',' && seen_digit && pos + 1 < text.size() &&
               isdigit(static_cast<unsigned char>(text[pos + 1]))) {
      // thousands separator
    } else if (c == '.' && seen_digit && pos + 1 < text.size() &&
               isdigit(static_cast<unsigned char>(text[pos + 1]))) {
      num += c;
    } else {
      break;
    }
    ++pos;
  }
  if (!seen_digit) return std::nullopt;
  return Rational::parse_decimal(num);
}

// ---------------------------------------------------------------------------
// Session

LlmSession::LlmSession(Transport& transport, const TemplateSet& templates, int retries,
                       PalConfig pal)
    : transport_(transport), templates_(templates), retries_(retries), pal_(std::move(pal)) {}


std::optional<std::string> LlmSession::attempt(PromptRole role, const std::string& prompt) {
  for (int tries = 0; tries <= retries_; ++tries) {
    TranscriptEntry entry;
    entry.role = role_name(role);
    entry.prompt = prompt;
    auto start = std::chrono::steady_clock::now();
    ++calls_;
    try {
      entry.response = transport_.complete(role, prompt);
      if (auto* http = dynamic_cast<HttpTransport*>(&transport_)) {
        entry.prompt_tokens = http->last_prompt_tokens();
        entry.completion_tokens = http->last_completion_tokens();
      }
    } catch (const TransportError& e) {
      entry.error = e.what();
    }
    entry.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    transcript_.entries.push_back(entry);
    if (entry.error.empty()) return entry.response;
  }
  return std::nullopt;
}

std::optional<std::string> LlmSession::call_raw(PromptRole role,
                                                const std::map<std::string, std::string>& fields) {
  return attempt(role, templates_.render(role, fields));
}

InitializerModel LlmSession::call_initializer(const std::string& problem) {
  const std::string prompt = templates_.render(PromptRole::Initializer, {{"question", problem}});
  // Retries cover both transport failures and unusable responses.
  for (int tries = 0; tries <= retries_; ++tries) {
    TranscriptEntry entry;
    entry.role = role_name(PromptRole::Initializer);
    entry.prompt = prompt;
    auto start = std::chrono::steady_clock::now();
    ++calls_;
    try {
      entry.response = transport_.complete(PromptRole::Initializer, prompt);
      if (auto* http = dynamic_cast<HttpTransport*>(&transport_)) {
        entry.prompt_tokens = http->last_prompt_tokens();
        entry.completion_tokens = http->last_completion_tokens();
      }
    } catch (const TransportError& e) {
      entry.error = e.what();
    }
    entry.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
    transcript_.entries.push_back(entry);
    if (!entry.error.empty()) continue;

    const std::string& response = entry.response;
    InitializerModel model;

    // Locate the Variables / Constraints / Goal sections.
    std::vector<std::string> lines;
    {
      std::istringstream in(response);
      std::string line;
      while (std::getline(in, line)) lines.push_back(line);
    }
    // A section heading is the keyword alone or followed by ':' — this keeps
    // constraint lines over names like `goal-value` from matching.
    auto section_start = [&](const char* name) -> std::optional<size_t> {
      for (size_t i = 0; i < lines.size(); ++i) {
        std::string l = lower(lines[i]);
        size_t b = l.find_first_not_of(" \t");
        if (b == std::string::npos || l.compare(b, strlen(name), name) != 0) continue;
        size_t after = l.find_first_not_of(" \t", b + strlen(name));
        if (after == std::string::npos || l[after] == ':') return i;
      }
      return std::nullopt;
    };
    auto var_at = section_start("variables");
    auto con_at = section_start("constraints");
    auto goal_at = section_start("goal");

    if (var_at) {
      size_t end = con_at && *con_at > *var_at ? *con_at : lines.size();
      std::string section = lines[*var_at];
      size_t colon = section.find(':');
      section = colon == std::string::npos ? "" : section.substr(colon + 1);
      for (size_t i = *var_at + 1; i < end; ++i) section += "\n" + lines[i];
      model.variables = parse_variable_list(section);
    }

    std::string constraint_text;
    size_t cbegin = con_at ? *con_at + 1 : 0;
    size_t cend = goal_at && (!con_at || *goal_at > *con_at) ? *goal_at : lines.size();
    for (size_t i = cbegin; i < cend && i < lines.size(); ++i) constraint_text += lines[i] + "\n";
    ParseResult parsed = parse_constraints(constraint_text);
    model.constraints = std::move(parsed.constraints);
    for (const auto& d : parsed.diagnostics) {
      model.diagnostics.push_back("line " + std::to_string(d.line_no) + ": " + d.reason);
    }

    if (goal_at) {
      std::string l = lines[*goal_at];
      size_t colon = l.find(':');
      if (colon != std::string::npos) {
        auto names = parse_variable_list(l.substr(colon + 1));
        if (!names.empty()) model.goal = names.front();
      }
    }

    // Auto-extend the declared list with variables used by constraints.
    for (const auto& v : vars_of(model.constraints)) {
      if (std::find(model.variables.begin(), model.variables.end(), v) == model.variables.end()) {
        model.variables.push_back(v);
        model.diagnostics.push_back("auto-added undeclared variable " + v);
      }
    }
    if (model.variables.empty()) continue;  // unusable, retry

    if (model.goal.empty() ||
        std::find(model.variables.begin(), model.variables.end(), model.goal) ==
            model.variables.end()) {
      if (!model.goal.empty()) {
        model.variables.push_back(model.goal);
        model.diagnostics.push_back("auto-added goal variable " + model.goal);
      } else {
        model.goal = model.variables.back();
        model.diagnostics.push_back("no goal designated; defaulting to " + model.goal);
      }
    }
    return model;
  }
  throw EmptyModelError();
}

ExplorerResult LlmSession::call_explorer(const std::string& problem, const std::string& head,
                                         const std::vector<Constraint>& head_constraints,
                                         const std::vector<Constraint>& full_pool,
                                         const std::vector<std::string>& known_vars) {
  ExplorerResult result;
  const std::string prompt = templates_.render(PromptRole::Explorer,
                                               {{"question", problem},
                                                {"constraint", render_pool(full_pool)},
                                                {"head", head},
                                                {"constrain-head", render_pool(head_constraints)}});
  auto response = attempt(PromptRole::Explorer, prompt);
  if (!response) {
    result.diagnostics.push_back("explorer transport failed");
    return result;
  }
  size_t marker = response->rfind("<SOS>");
  if (marker == std::string::npos) {
    result.diagnostics.push_back("no <SOS> marker in explorer response");
    return result;
  }
  result.marker_found = true;
  ParseResult parsed = parse_constraints(response->substr(marker + 5));
  for (const auto& d : parsed.diagnostics) {
    result.diagnostics.push_back("line " + std::to_string(d.line_no) + ": " + d.reason);
  }
  for (auto& c : parsed.constraints) {
    auto cv = vars(c);
    bool mentions_head = cv.count(head) > 0;
    bool introduces_new = std::any_of(cv.begin(), cv.end(), [&](const std::string& v) {
      return std::find(known_vars.begin(), known_vars.end(), v) == known_vars.end();
    });
    if (mentions_head || introduces_new) {
      result.constraints.push_back(std::move(c));
    } else {
      result.diagnostics.push_back("dropped constraint without head variable: " +
                                   render_constraint(c));
    }
  }
  return result;
}

JudgeVerdict LlmSession::call_judge(const std::string& problem, const std::string& head,
                                    const ModelingState& original,
                                    const SolveOutcome& original_outcome,
                                    const ModelingState& candidate,
                                    const SolveOutcome& candidate_outcome) {
  const std::string prompt =
      templates_.render(PromptRole::Judge, {{"question", problem},
                                            {"head", head},
                                            {"cons1", render_pool(original.pool)},
                                            {"cans1", original_outcome.describe(original.goal)},
                                            {"cons2", render_pool(candidate.pool)},
                                            {"cans2", candidate_outcome.describe(candidate.goal)}});
  auto response = attempt(PromptRole::Judge, prompt);
  if (!response) return JudgeVerdict::Unparsable;
  return parse_judge_verdict(*response);
}

DownstreamResult LlmSession::call_downstream(const std::string& problem, DownstreamMethod method) {
  DownstreamResult result;
  PromptRole role = downstream_role(method);
  const std::string prompt = templates_.render(role, {{"question", problem}});
  auto response = attempt(role, prompt);
  if (!response) {
    result.reject = true;
    result.diagnostic = "downstream transport failed";
    return result;
  }
  if (lower(*response).find("unsolvable") != std::string::npos) {
    result.reject = true;
    result.diagnostic = "downstream declared the problem unsolvable";
    return result;
  }

  if (method == DownstreamMethod::Pal) {
    // Extract the fenced program, run it sandboxed, read the printed value.
    std::string code;
    size_t fence = response->find("```");
    if (fence != std::string::npos) {
      size_t body = response->find('\n', fence);
      size_t close = body == std::string::npos ? std::string::npos : response->find("```", body);
      if (body != std::string::npos && close != std::string::npos) {
        code = response->substr(body + 1, close - body - 1);
      }
    } else if (response->find("print(") != std::string::npos) {
      code = *response;
    }
    if (code.empty()) {
      result.reject = true;
      result.diagnostic = "no program in pal response";
      return result;
    }
    std::vector<std::string> argv = pal_.interpreter;
    argv.push_back("-c");
    argv.push_back(code);
    RunResult run = run_with_input(argv, "", pal_.timeout_s);
    if (run.timed_out || run.spawn_failed || run.exit_code != 0) {
      result.reject = true;
      result.diagnostic = "pal execution failed: " + (run.error.empty() ? run.err : run.error);
      return result;
    }
    if (lower(run.out).find("unsolvable") != std::string::npos) {
      result.reject = true;
      result.diagnostic = "pal program declared the problem unsolvable";
      return result;
    }
    // Last numeric token in the program output.
    std::istringstream out(run.out);
    std::string tok;
    std::optional<Rational> value;
    while (out >> tok) {
      while (!tok.empty() && (tok.back() == '.' || tok.back() == ',')) tok.pop_back();
      if (auto v = Rational::parse_decimal(tok)) value = v;
    }
    if (!value) {
      result.reject = true;
      result.diagnostic = "pal program printed no number";
      return result;
    }
    result.answer = *value;
    return result;
  }

  auto value = extract_answer_number(*response, "the answer is");
  if (!value) {
    result.reject = true;
    result.diagnostic = "no final answer pattern in response";
    return result;
  }
  result.answer = *value;
  return result;
}

}  // namespace wellposed
