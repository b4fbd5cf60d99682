#pragma once

#include <optional>

#include "revmac/game.hpp"
#include "revmac/stats.hpp"

namespace revmac {

// Review strategy with private ACK signals: L review slots at p_c, then an
// M-slot reciprocation phase spent punishing (transmit with probability 1)
// when the node's own ACK ratio test failed, cooperating (p_c) otherwise.
struct PrivateReviewProtocol {
  NetworkConfig network;
  double margin;     // B
  long review_len;   // L
  long recip_len;    // M

  PrivateReviewProtocol(const NetworkConfig& net, double b, long l, long m);

  double ack_rate_compliant() const;
  long fail_threshold() const;
  AckTestConfig test_config(std::optional<double> pd = std::nullopt) const;
};

struct PrivateAnalysis {
  PrivateReviewProtocol protocol;
  double deviation_prob;
  ErrorProbabilities errors;  // P_f and P_m actually used
  double payoff_compliant;    // long-run average when everyone reviews
  double payoff_deviator;     // long-run average of the constant deviator
  double deviation_gain;      // payoff_deviator - payoff_compliant
  double margin_g;            // per-reciprocation-slot deterrence margin g
  double m_min;               // (p_d - p_c) L / g; +inf when g <= 0
  double efficiency_loss;     // closed form; matches N u_PO - N U when p_c = 1/N
  bool is_dp;                 // g > 0 and M >= m_min
  bool pc_is_pareto;
};

// Closed-form building blocks, shared by analysis and construction. These
// take the error probabilities directly and double as the test seam for
// hypothetical perfect or injected tests.
double private_deterrence_margin(double pf, double pm, double pd,
                                 const NetworkConfig& net);
double private_efficiency_loss(double pf, long l, long m,
                               const NetworkConfig& net);

PrivateAnalysis analyze_private(const PrivateReviewProtocol& proto, double pd);
PrivateAnalysis analyze_private_with_errors(const PrivateReviewProtocol& proto,
                                            double pd, double pf, double pm);

struct AutomatonSize {
  long states;  // k L - k(k-1)/2 + 2M
  int k;        // saturation level: fail_threshold + 2
};
AutomatonSize state_count(const PrivateReviewProtocol& proto);

struct PrivateConstructResult {
  std::optional<PrivateReviewProtocol> protocol;  // empty on cap exhaustion
  double achieved_loss;  // loss of the returned protocol, or best loss seen
  long l_scanned;        // largest L examined

  bool found() const { return protocol.has_value(); }
};

// Smallest L <= l_cap (with M = ceil(M_min)) whose deterrence margin is
// positive and whose loss is at most delta. L is scanned upward from 1;
// the loss curve has floor-induced jumps, so no bisection applies.
PrivateConstructResult construct_near_optimal_private(double pd, double delta,
                                                      double b,
                                                      const NetworkConfig& net,
                                                      long l_cap = 5000);

// Smallest deviation probability that gains at least epsilon per slot
// against an all-p_c profile: p_c + epsilon / (1-p_c)^(N-1).
double robust_p_eps(double epsilon, const NetworkConfig& net);

// Margin used by the robust construction: midpoint of (0, epsilon/(N-1)).
double robust_margin(double epsilon, const NetworkConfig& net);

// Deterrence margin floor over all p_d in [p_eps, 1]: the g expression with
// the miss-detection term replaced by P_m evaluated at p_eps and weighted 1.
double robust_gain_floor(double b, long l, double epsilon,
                         const NetworkConfig& net);

// Largest deviation gain over a p_d grid with the given step on (p_c, 1];
// the endpoint p_d = 1 is always included.
double max_constant_deviation_gain(const PrivateReviewProtocol& proto,
                                   double grid_step = 1e-3);

struct RobustCertification {
  double max_gain;           // over the whole (p_c, 1] grid
  double max_gain_deterred;  // over the [p_eps, 1] section, where the
                             // construction must deter outright
};
RobustCertification certify_robust(const PrivateReviewProtocol& proto,
                                   double epsilon, double grid_step = 1e-3);

// Single protocol limiting the gain of every constant deviation to epsilon
// while losing at most delta: B = robust_margin, M = ceil((1-p_c)L/g_floor),
// L the smallest value <= l_cap with positive floor and admissible loss.
// The returned protocol is certified by a grid check of the deviation gain
// over (p_c, 1]; candidates failing certification are skipped.
PrivateConstructResult construct_robust_eps_dp(double epsilon, double delta,
                                               const NetworkConfig& net,
                                               long l_cap = 5000);

}  // namespace revmac
