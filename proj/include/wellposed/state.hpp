#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "wellposed/constraint.hpp"

namespace wellposed {

struct UnknownVariable : std::runtime_error {
  explicit UnknownVariable(const std::string& v) : std::runtime_error("unknown variable: " + v) {}
};

// The evolving formalization of one problem: an ordered variable queue with
// an explored-prefix cursor, a constraint pool, and the goal variable the
// question asks for. Invariants: queue entries unique; every variable used
// by a pool constraint is in the queue; goal is in the queue.
struct ModelingState {
  std::vector<std::string> queue;
  size_t explored = 0;
  std::vector<Constraint> pool;
  std::string goal;

  bool in_queue(const std::string& name) const;
  // Appends to the queue tail if absent; returns true when appended.
  bool append_var(const std::string& name);
  // Tail-appends every pool variable missing from the queue.
  void absorb_pool_vars();

  bool has_unexplored() const { return explored < queue.size(); }
  const std::string& head() const { return queue.at(explored); }

  // Returns human-readable invariant violations (empty when valid).
  std::vector<std::string> validate() const;
};

bool state_equal(const ModelingState& a, const ModelingState& b);

// All pool constraints mentioning v, in pool order. Throws UnknownVariable
// when v is not in the queue.
std::vector<Constraint> related_constraints(const ModelingState& state, const std::string& v);

std::string render_pool(const std::vector<Constraint>& pool);

}  // namespace wellposed
