#pragma once

#include <optional>
#include <vector>

#include "revmac/game.hpp"
#include "revmac/private_protocol.hpp"

namespace revmac {

// Complexity-constrained design: minimize the efficiency loss over ACK-test
// protocols that deter the fixed deviation and fit the automaton budget.
struct DesignProblem {
  std::vector<double> b_grid;  // candidate margins, each in (0, q_c)
  long ns_budget;              // automaton state budget
  double deviation_prob;       // p_d in (p_c, 1]
  NetworkConfig network;
};

struct DesignResult {
  std::optional<PrivateReviewProtocol> protocol;  // empty when infeasible
  double efficiency_loss;  // of the optimum; +inf when infeasible
  long feasible_count;     // (B, L, M) triples satisfying both constraints
  long l_examined;         // review lengths enumerated across the grid

  bool feasible() const { return protocol.has_value(); }
};

// For each margin, enumerate the review lengths whose smallest automaton
// fits the budget, set M to the smallest feasible value at least M_min, and
// keep the minimum-loss candidate. Ties break toward smaller L, then
// smaller M, then the earlier grid margin.
DesignResult solve_design(const DesignProblem& problem);

}  // namespace revmac
