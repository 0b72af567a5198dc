#include "wellposed/state.hpp"

#include <algorithm>
#include <set>

namespace wellposed {

bool ModelingState::in_queue(const std::string& name) const {
  return std::find(queue.begin(), queue.end(), name) != queue.end();
}

bool ModelingState::append_var(const std::string& name) {
  if (in_queue(name)) return false;
  queue.push_back(name);
  return true;
}

void ModelingState::absorb_pool_vars() {
  for (const auto& v : vars_of(pool)) append_var(v);
}

std::vector<std::string> ModelingState::validate() const {
  std::vector<std::string> problems;
  std::set<std::string> seen;
  for (const auto& v : queue) {
    if (!seen.insert(v).second) problems.push_back("duplicate queue entry: " + v);
    if (!is_valid_var_name(v)) problems.push_back("invalid variable name: " + v);
  }
  for (const auto& v : vars_of(pool)) {
    if (!seen.count(v)) problems.push_back("pool variable missing from queue: " + v);
  }
  if (!goal.empty() && !seen.count(goal)) problems.push_back("goal missing from queue: " + goal);
  if (explored > queue.size()) problems.push_back("explored cursor out of range");
  return problems;
}

bool state_equal(const ModelingState& a, const ModelingState& b) {
  if (a.queue != b.queue || a.explored != b.explored || a.goal != b.goal) return false;
  if (a.pool.size() != b.pool.size()) return false;
  for (size_t i = 0; i < a.pool.size(); ++i) {
    if (!expr_equal(a.pool[i], b.pool[i])) return false;
  }
  return true;
}

std::vector<Constraint> related_constraints(const ModelingState& state, const std::string& v) {
  if (!state.in_queue(v)) throw UnknownVariable(v);
  std::vector<Constraint> out;
  for (const auto& c : state.pool) {
    if (vars(c).count(v)) out.push_back(c);
  }
  return out;
}

std::string render_pool(const std::vector<Constraint>& pool) {
  std::string out;
  for (const auto& c : pool) {
    out += render_constraint(c);
    out += '\n';
  }
  return out;
}

}  // namespace wellposed
