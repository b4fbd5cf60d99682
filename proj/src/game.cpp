#include "revmac/game.hpp"

#include <cmath>
#include <stdexcept>

namespace revmac {

NetworkConfig::NetworkConfig(int n, double pc) : n_nodes(n), cooperation_prob(pc) {
  if (n < 2) throw std::invalid_argument("NetworkConfig: need at least 2 nodes");
  if (!(pc > 0.0 && pc < 1.0))
    throw std::invalid_argument("NetworkConfig: cooperation_prob must be in (0,1)");
}

NetworkConfig::NetworkConfig(int n) : NetworkConfig(n, 1.0 / n) {}

double stage_payoff(const MixedProfile& profile, int node) {
  const int n = profile.n_nodes();
  if (node < 0 || node >= n) throw std::out_of_range("stage_payoff: node index");
  for (double p : profile.probs) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument("stage_payoff: probabilities must be in [0,1]");
  }
  double value = profile.probs[node];
  for (int j = 0; j < n; ++j) {
    if (j != node) value *= 1.0 - profile.probs[j];
  }
  return value;
}

double cooperation_probability(int n_nodes) {
  if (n_nodes < 2) throw std::invalid_argument("cooperation_probability: need N >= 2");
  return 1.0 / n_nodes;
}

double pareto_payoff(int n_nodes) {
  if (n_nodes < 2) throw std::invalid_argument("pareto_payoff: need N >= 2");
  return std::pow(1.0 - 1.0 / n_nodes, n_nodes - 1) / n_nodes;
}

}  // namespace revmac
