#pragma once

#include <optional>

#include "revmac/game.hpp"

namespace revmac {

// Binomial CDF with floor semantics: sums pmf terms m = 0..floor(y).
// Returns 0 when floor(y) < 0 and 1 when floor(y) >= n. Small trial counts
// use log-space pmf accumulation with compensated summation; above 10^4
// trials the regularized incomplete beta identity takes over.
double binom_cdf(double y, long n, double p);

// log pmf of k successes in n trials; -inf where the pmf is zero.
double binom_log_pmf(long k, long n, double p);
double binom_pmf(long k, long n, double p);

struct ErrorProbabilities {
  double false_punishment = 0.0;
  std::optional<double> miss_detection;  // absent without a deviation_prob
};

// ACK ratio test: a node passes when its ACK count over the L review slots
// exceeds L*(q_c - B), i.e. a count k fails iff k <= floor(L*(q_c - B)).
// When L*(q_c - B) is an exact integer the floor keeps the boundary count
// failing.
struct AckTestConfig {
  NetworkConfig network;
  double margin;     // B
  long review_len;   // L
  std::optional<double> deviation_prob;  // p_d, needed for miss detection

  AckTestConfig(const NetworkConfig& net, double b, long l,
                std::optional<double> pd = std::nullopt);

  // Per-slot ACK probability of a compliant node: p_c (1-p_c)^(N-1).
  double ack_rate_compliant() const;
  // Same, with one node transmitting at p_d: p_c (1-p_c)^(N-2) (1-p_d).
  double ack_rate_deviation() const;
  long fail_threshold() const;  // floor(L*(q_c - B))
};

// Idle slot ratio test on the common ternary signal; same floor semantics.
struct IdleTestConfig {
  NetworkConfig network;
  double margin;
  long review_len;
  std::optional<double> deviation_prob;

  IdleTestConfig(const NetworkConfig& net, double b, long l,
                 std::optional<double> pd = std::nullopt);

  // Per-slot idle probability with everyone compliant: (1-p_c)^N.
  double idle_rate_compliant() const;
  // Same, with one node at p_d: (1-p_d)(1-p_c)^(N-1).
  double idle_rate_deviation() const;
  long fail_threshold() const;
};

// False punishment: at least one of the N per-node tests fails although all
// complied (per-node pass probabilities multiplied as if independent).
// Miss detection: none of the N-1 compliant nodes' tests fail despite one
// deviator.
ErrorProbabilities ack_error_probs(const AckTestConfig& cfg);

// Public-signal analogues on the single common test.
ErrorProbabilities idle_error_probs(const IdleTestConfig& cfg);

// Chebyshev upper bound on the idle-test false punishment probability:
// q~_c (1 - q~_c) / (B^2 L). Not clamped; callers may min() with 1.
double chebyshev_pf_bound(double b, long l, const NetworkConfig& net);

}  // namespace revmac
