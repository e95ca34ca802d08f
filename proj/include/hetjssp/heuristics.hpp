#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetjssp/env.hpp"
#include "hetjssp/instance.hpp"

namespace hetjssp {

enum class RuleKind { Random, Spt, Lpt };

const char* to_string(RuleKind kind);
RuleKind rule_from_string(const std::string& text);

struct DispatchRule {
  RuleKind kind = RuleKind::Spt;
  std::uint64_t seed = 0;  // RANDOM only
};

struct DispatchResult {
  Time makespan = 0;
  std::vector<int> sequence;
};

/// Runs one episode choosing among eligible ops by the rule. SPT/LPT break
/// ties by lowest job index; RANDOM picks uniformly from its seeded stream.
DispatchResult dispatch(const JsspInstance& inst, const DispatchRule& rule);

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct OptimalResult {
  Time makespan = 0;
  std::vector<int> sequence;
  std::size_t nodes_expanded = 0;
};

/// Depth-first search over eligible-op dispatch sequences through the
/// environment, cutting any branch whose lower bound reaches the incumbent.
/// Throws BudgetExceeded once more than node_budget states are expanded.
OptimalResult brute_force_optimal(const JsspInstance& inst, std::size_t node_budget = 10'000'000);

}  // namespace hetjssp
