#include "wellposed/forge.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace wellposed {

using nlohmann::json;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Position just past a section heading like "Step 3:" / "Modified Problem:".
size_t section_after(const std::string& hay_lower, const std::string& marker) {
  size_t at = hay_lower.rfind(marker);
  if (at == std::string::npos) return std::string::npos;
  size_t colon = hay_lower.find(':', at);
  return colon == std::string::npos ? at + marker.size() : colon + 1;
}

}  // namespace

std::optional<std::string> extract_mutated_problem(const std::string& response) {
  std::string hay = lower(response);
  // Most to least explicit: the "Modified Problem:" slot, the echoed step-3
  // label, a bare "Step 3:" heading.
  size_t start = section_after(hay, "modified problem");
  if (start == std::string::npos) {
    size_t at = hay.rfind("final mutated problem");
    if (at != std::string::npos) start = at + strlen("final mutated problem");
  }
  if (start == std::string::npos) start = section_after(hay, "step 3");
  if (start == std::string::npos) return std::nullopt;
  while (start < response.size() &&
         (response[start] == ':' || response[start] == '.' || isspace((unsigned char)response[start]))) {
    ++start;
  }
  std::string text = response.substr(start);
  // Drop a leading bracketed or quoted wrapper line and label remnants.
  text = trim(text);
  if (!text.empty() && text.front() == '[') {
    size_t close = text.find(']');
    if (close != std::string::npos && close + 1 == text.size()) text = text.substr(1, close - 1);
  }
  // When the model writes further labeled sections afterwards, cut at the
  // first blank-line-separated label.
  size_t cut = text.find("\n\n");
  while (cut != std::string::npos) {
    std::string rest = lower(trim(text.substr(cut)));
    if (rest.rfind("step", 0) == 0 || rest.rfind("note", 0) == 0 ||
        rest.rfind("explanation", 0) == 0) {
      text = text.substr(0, cut);
      break;
    }
    cut = text.find("\n\n", cut + 2);
  }
  text = trim(text);
  if (text.empty()) return std::nullopt;
  return text;
}

std::string extract_rationale(const std::string& response) {
  std::string hay = lower(response);
  size_t start = section_after(hay, "step 2");
  if (start == std::string::npos) return "";
  size_t end = hay.find("step 3", start);
  if (end == std::string::npos) end = hay.size();
  return trim(response.substr(start, end - start));
}

bool parse_validator_vote(const std::string& response) {
  std::string hay = lower(response);
  if (hay.find("unsolvable") != std::string::npos) return true;
  if (hay.find("not solvable") != std::string::npos) return true;
  if (hay.find("no unique solution") != std::string::npos) return true;
  return false;  // "solvable", silence and noise all count as solvable votes
}

Forge::Forge(LlmSession& mutator, std::vector<Transport*> validators,
             const TemplateSet& templates, int mutate_retries)
    : mutator_(mutator),
      validators_(std::move(validators)),
      templates_(templates),
      mutate_retries_(mutate_retries) {}

std::optional<MutationCandidate> Forge::mutate(const ProblemRecord& seed,
                                               ProblemRecord::Type type, std::string* diagnostic) {
  if (seed.type != ProblemRecord::Type::Well) {
    if (diagnostic) *diagnostic = "seed " + seed.id + " is not well-defined";
    return std::nullopt;
  }
  PromptRole role = type == ProblemRecord::Type::Missing ? PromptRole::MutatorMissing
                                                         : PromptRole::MutatorContra;
  for (int tries = 0; tries <= mutate_retries_; ++tries) {
    auto response = mutator_.call_raw(role, {{"problem", seed.question}});
    if (!response) continue;
    auto mutated = extract_mutated_problem(*response);
    if (!mutated) {
      if (diagnostic) *diagnostic = "no final mutated problem section in response";
      continue;
    }
    if (trim(*mutated) == trim(seed.question)) {
      if (diagnostic) *diagnostic = "mutation left the problem text unchanged";
      continue;
    }
    MutationCandidate candidate;
    candidate.seed_id = seed.id;
    candidate.question = *mutated;
    candidate.type = type;
    candidate.rationale = extract_rationale(*response);
    return candidate;
  }
  if (diagnostic && diagnostic->empty()) *diagnostic = "mutation transport failed";
  return std::nullopt;
}

ConsensusVerdict Forge::validate(const MutationCandidate& candidate) {
  ConsensusVerdict verdict;
  const std::string prompt =
      templates_.render(PromptRole::Validator, {{"problem", candidate.question}});
  for (Transport* validator : validators_) {
    ValidatorVote vote;
    try {
      std::string response = validator->complete(PromptRole::Validator, prompt);
      vote.unsolvable = parse_validator_vote(response);
      vote.explanation = response;
    } catch (const TransportError& e) {
      vote.unsolvable = false;  // conservative: forces review
      vote.explanation = std::string("validator unreachable: ") + e.what();
    }
    verdict.votes.push_back(std::move(vote));
  }
  verdict.accepted = !verdict.votes.empty() &&
                     std::all_of(verdict.votes.begin(), verdict.votes.end(),
                                 [](const ValidatorVote& v) { return v.unsolvable; });
  return verdict;
}

std::string candidate_id(const std::string& seed_id, ProblemRecord::Type type) {
  return seed_id + (type == ProblemRecord::Type::Missing ? "-m" : "-c");
}

ForgeRunStats run_forge(const std::vector<ProblemRecord>& seeds, ProblemRecord::Type type,
                        Forge& forge, const std::string& out_path,
                        const std::string& review_path) {
  ForgeRunStats stats;
  std::set<std::string> existing;
  {
    std::ifstream in(out_path);
    std::string line;
    while (in && std::getline(in, line)) {
      if (trim(line).empty()) continue;
      existing.insert(record_from_json_line(line).id);
    }
  }
  std::ofstream out(out_path, std::ios::app);
  std::ofstream review(review_path, std::ios::app);
  if (!out || !review) throw std::runtime_error("cannot open forge output files");

  for (const auto& seed : seeds) {
    ++stats.seeds;
    const std::string id = candidate_id(seed.id, type);
    if (existing.count(id)) {
      ++stats.skipped_existing;
      continue;
    }
    std::string diagnostic;
    auto candidate = forge.mutate(seed, type, &diagnostic);
    if (!candidate) {
      ++stats.extraction_failures;
      continue;
    }
    ConsensusVerdict verdict = forge.validate(*candidate);
    if (verdict.accepted) {
      ProblemRecord rec;
      rec.id = id;
      rec.question = candidate->question;
      rec.type = type;
      rec.seed_id = seed.id;
      out << record_to_json_line(rec) << "\n";
      ++stats.accepted;
    } else {
      json votes = json::array();
      for (const auto& v : verdict.votes) {
        votes.push_back({{"unsolvable", v.unsolvable}, {"explanation", v.explanation}});
      }
      json row = {{"id", id},
                  {"seed_id", seed.id},
                  {"type", problem_type_name(type)},
                  {"question", candidate->question},
                  {"rationale", candidate->rationale},
                  {"votes", votes}};
      review << row.dump() << "\n";
      ++stats.review;
    }
  }
  return stats;
}

}  // namespace wellposed
