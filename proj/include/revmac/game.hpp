#pragma once

#include <vector>

namespace revmac {

// N nodes contending for a shared slotted channel. cooperation_prob is the
// symmetric transmission probability prescribed while cooperating; the
// default 1/N maximizes the symmetric system payoff.
struct NetworkConfig {
  int n_nodes;
  double cooperation_prob;

  NetworkConfig(int n, double pc);
  explicit NetworkConfig(int n);

  // True when cooperation_prob is exactly 1/N. Some closed forms (notably
  // the private-signal loss expression) are derived under this assumption.
  bool pc_is_pareto() const { return cooperation_prob == 1.0 / n_nodes; }
};

// One transmission probability per node.
struct MixedProfile {
  std::vector<double> probs;

  int n_nodes() const { return static_cast<int>(probs.size()); }
};

// Success probability of `node`: it transmits and everyone else stays quiet.
double stage_payoff(const MixedProfile& profile, int node);

// Symmetric Pareto-optimal transmission probability, 1/N.
double cooperation_probability(int n_nodes);

// Per-node payoff at the symmetric optimum: (1 - 1/N)^(N-1) / N.
double pareto_payoff(int n_nodes);

}  // namespace revmac
