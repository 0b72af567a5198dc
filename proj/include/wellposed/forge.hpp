#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wellposed/eval.hpp"
#include "wellposed/llm.hpp"

namespace wellposed {

struct MutationCandidate {
  std::string seed_id;
  std::string question;   // mutated text, always != seed text
  ProblemRecord::Type type = ProblemRecord::Type::Missing;
  std::string rationale;  // the model's step-2 explanation
};

struct ValidatorVote {
  bool unsolvable = false;
  std::string explanation;
};

struct ConsensusVerdict {
  std::vector<ValidatorVote> votes;
  bool accepted = false;  // accepted <=> every vote says unsolvable
};

// Rebuilds ill-defined problems out of well-defined seeds: a mutation model
// rewrites one constraint (missing-type) or injects a conflicting one
// (contra-type), then a panel of validators must unanimously call the result
// unsolvable; anything less lands in the human review queue.
class Forge {
 public:
  Forge(LlmSession& mutator, std::vector<Transport*> validators, const TemplateSet& templates,
        int mutate_retries = 2);

  // Renders the construction prompt and extracts the final mutated problem
  // plus the step-2 rationale. nullopt after retries when extraction fails
  // or the mutation does not change the text.
  std::optional<MutationCandidate> mutate(const ProblemRecord& seed, ProblemRecord::Type type,
                                          std::string* diagnostic = nullptr);

  // Prompts every validator independently. A transport failure counts as a
  // solvable vote, which forces human review.
  ConsensusVerdict validate(const MutationCandidate& candidate);

 private:
  LlmSession& mutator_;
  std::vector<Transport*> validators_;
  TemplateSet templates_;
  int mutate_retries_;
};

// Response slicing helpers (exposed for tests).
std::optional<std::string> extract_mutated_problem(const std::string& response);
std::string extract_rationale(const std::string& response);
bool parse_validator_vote(const std::string& response);

struct ForgeRunStats {
  size_t seeds = 0;
  size_t skipped_existing = 0;
  size_t extraction_failures = 0;
  size_t accepted = 0;
  size_t review = 0;
};

// Batch pipeline with resume: seeds already present in out_path (by id) are
// skipped, accepted candidates append to out_path as dataset records carrying
// their seed id, disagreements append to review_path as
// {candidate, votes, explanations} rows.
ForgeRunStats run_forge(const std::vector<ProblemRecord>& seeds, ProblemRecord::Type type,
                        Forge& forge, const std::string& out_path,
                        const std::string& review_path);

std::string candidate_id(const std::string& seed_id, ProblemRecord::Type type);

}  // namespace wellposed
