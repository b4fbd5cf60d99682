#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "revmac/game.hpp"
#include "revmac/stats.hpp"

namespace revmac {

// Review strategy with the public ternary signal: L review slots at p_c,
// then M punishment slots only when the common idle ratio test fails. No
// cooperation phase is needed because every node sees the same test result.
struct PublicReviewProtocol {
  NetworkConfig network;
  double margin;     // B
  long review_len;   // L
  long punish_len;   // M

  PublicReviewProtocol(const NetworkConfig& net, double b, long l, long m);

  double idle_rate_compliant() const;
  long fail_threshold() const;
  IdleTestConfig test_config(std::optional<double> pd = std::nullopt) const;
};

struct PublicAnalysis {
  PublicReviewProtocol protocol;
  double deviation_prob;
  ErrorProbabilities errors;  // P~_f and P~_m
  double payoff_compliant;    // L q_c / (L + P~_f M)
  double payoff_deviator;     // L p_d (1-p_c)^(N-1) / (L + (1 - P~_m) M)
  double deviation_gain;
  double margin_g;            // p_c (1 - P~_m) - p_d P~_f
  double m_min;               // (p_d - p_c) L / g~; +inf when g~ <= 0
  double efficiency_loss;     // N P~_f M q_c / (L + P~_f M); nonnegative for any p_c
  bool is_dp;
  bool pc_is_pareto;
};

double public_deterrence_margin(double pf, double pm, double pd,
                                const NetworkConfig& net);
double public_efficiency_loss(double pf, long l, long m,
                              const NetworkConfig& net);

PublicAnalysis analyze_public(const PublicReviewProtocol& proto, double pd);
PublicAnalysis analyze_public_with_errors(const PublicReviewProtocol& proto,
                                          double pd, double pf, double pm);

// Upper bound on any deviator's payoff given the punishment probability
// pf_star its play induces:
//   (L q_c + pf* (1-p_c)^N L + (1-pf*) B L) / (L + pf* M).
// With M/L > N-1 the bound is non-increasing in pf*, so its supremum is the
// pf* = 0 value q_c + B.
double deviation_payoff_upper_bound(const PublicReviewProtocol& proto,
                                    double pf_star);

// Growth schedule tying the margin and punishment length to L:
// B = beta L^(rho-1), M = ceil(mu L); beta > 0, 1/2 < rho < 1, mu > N-1.
struct EpsNeSchedule {
  double beta = 1.0;
  double rho = 0.75;
  double mu = 0.0;
};

struct EpsNeResult {
  PublicReviewProtocol protocol;
  long l_loss;    // smallest L with Chebyshev-bounded loss <= delta
  long l_gap;     // smallest L with Chebyshev-bounded loss <= N eps / 2
  long l_margin;  // ceil((2 beta / eps)^(1/(1-rho)))
  long l_valid;   // smallest L keeping B below the compliant idle rate
};

// Review length L = max of the four lower bounds above, with B and M from
// the schedule. The loss bounds are located by doubling-then-bisection on
// the monotone Chebyshev-bounded loss, not on the exact P~_f.
EpsNeResult construct_eps_ne(double epsilon, double delta,
                             const EpsNeSchedule& sched,
                             const NetworkConfig& net);

// Exact best response of a single deviator against the protocol. Review
// states are (slot, idle count) pairs — L(L+1)/2 of them plus M forced
// punishment states. The per-slot objective and the idle transition are
// affine in the transmission probability, so an optimal policy exists with
// actions in {0,1}; the limit-of-means ratio is solved by Dinkelbach
// iteration (backward-induct reward - v * length, re-evaluate, repeat).
struct BestResponsePolicy {
  long review_len;
  // Transmit decision per review state, indexed slot*(slot-1)/2 + idles
  // with 1-based slot.
  std::vector<std::uint8_t> transmit;
  double value;        // optimal long-run average payoff
  double punish_prob;  // punishment probability under the optimal policy
};

BestResponsePolicy best_response_policy_public(const PublicReviewProtocol& proto,
                                               long l_cap = 400);
// Seam: same computation with an arbitrary failure threshold (counts <=
// threshold trigger punishment; negative disables punishment entirely).
BestResponsePolicy best_response_policy_public_with_threshold(
    const PublicReviewProtocol& proto, long fail_threshold, long l_cap = 400);

double best_response_value_public(const PublicReviewProtocol& proto,
                                  long l_cap = 400);

}  // namespace revmac
