#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "revmac/game.hpp"
#include "revmac/private_protocol.hpp"
#include "revmac/public_protocol.hpp"

namespace revmac {

enum class SignalMode { kPrivate, kPublic };

enum class AckSignal : std::uint8_t { kFail = 0, kSuccess = 1 };
enum class TernarySignal : std::uint8_t { kIdle = 0, kSuccess = 1, kCollision = 2 };

// Error-free ACK feedback: the unique successful transmitter observes S,
// everyone else F. Actions are 1 = transmit, 0 = wait.
std::vector<AckSignal> step_signals_private(const std::vector<std::uint8_t>& actions);

// Common ternary feedback: 0 on an idle slot, 1 on a success, e on a
// collision.
TernarySignal step_signals_public(const std::vector<std::uint8_t>& actions);

// Phase-aware automaton implementing a review strategy with the saturating
// count representation: during a review the tracked count stops at k-1 =
// fail_threshold + 1, beyond which the test outcome is already decided, so
// the visited states are exactly the ones counted by state_count().
class Automaton {
 public:
  enum class Phase { kReview, kCooperation, kPunishment };

  static Automaton for_private(const PrivateReviewProtocol& proto);
  static Automaton for_public(const PublicReviewProtocol& proto);

  SignalMode mode() const { return mode_; }
  Phase phase() const { return phase_; }
  double prescribed_prob() const;  // p_c in review/cooperation, 1 in punishment
  long review_slot() const { return slot_; }  // 1-based, valid in review
  long saturated_count() const { return count_; }
  bool last_test_failed() const { return last_failed_; }

  void observe_private(AckSignal s);
  void observe_public(TernarySignal s);

  long state_index() const;  // dense in [0, state_space())
  long state_space() const { return state_space_; }

 private:
  Automaton(SignalMode mode, double pc, long l, long m, long threshold);
  void advance(bool counted_signal);

  SignalMode mode_;
  double cooperation_prob_;
  long review_len_;
  long recip_len_;
  long threshold_;    // counts <= threshold_ fail the test
  long saturation_;   // threshold_ + 1
  long state_space_;
  Phase phase_ = Phase::kReview;
  long slot_ = 1;     // 1-based position within the current phase
  long count_ = 0;
  bool last_failed_ = false;
};

struct ConstantDeviant {
  double p_d;
};

// Phase-aware deviator. Private mode: complies in reviews (p_c), defects to
// p_d in its cooperation phases, uses p_r when punishing — the smart
// deviation that motivates public signals. Public mode: p_d in reviews, p_r
// in punishments (the analyzed deviator structure; p_r never affects
// payoffs).
struct PunishAwareDeviant {
  double p_d;
  double p_r = 1.0;
};

// Public mode only: transmission probability as a function of the 1-based
// review slot and the idle count so far.
struct AdaptiveDeviant {
  std::function<double(long slot, long idles)> rule;
};

// Public mode only: plays the exact best-response policy computed from the
// protocol at run start.
struct BestResponseDeviant {};

using DeviantPolicy =
    std::variant<ConstantDeviant, PunishAwareDeviant, AdaptiveDeviant, BestResponseDeviant>;

struct DeviantSpec {
  int node_index;
  DeviantPolicy policy;
};

struct SimConfig {
  std::variant<PrivateReviewProtocol, PublicReviewProtocol> protocol;
  std::vector<DeviantSpec> deviants;
  long epochs = 100000;
  std::uint64_t master_seed = 0;
  // 0 = min(64, epochs). Fixed independently of thread count so results
  // depend only on the seed.
  int replications = 0;
  // 0 = hardware concurrency. Never affects results, only wall time.
  int threads = 0;
};

const NetworkConfig& network_of(const SimConfig& cfg);
SignalMode mode_of(const SimConfig& cfg);

struct NodePayoff {
  double mean;
  double std_error;
};

struct SimReport {
  SignalMode mode;
  long epochs;
  long reviews;  // one review per epoch
  std::int64_t total_slots;
  std::vector<NodePayoff> payoffs;
  // Share of reviews after which at least one protocol-following node
  // punishes (the common test, in public mode). Equals the false punishment
  // rate when nobody deviates.
  double punishment_rate;
  double punishment_rate_std_error;
  // Share of reviews in which no compliant node's test failed; tallied only
  // when exactly one deviant is configured.
  std::optional<double> miss_detection_rate;
  std::optional<double> miss_detection_std_error;
  // [node][count]: per-review ACK counts (private) or the common per-review
  // idle count (public), unsaturated.
  std::vector<std::vector<std::int64_t>> review_count_hist;
};

// Seeded slot-level simulation. Identical master seeds give bit-identical
// reports; replications run on substream splitmix64(seed ^ splitmix64(r))
// and are merged in replication order.
SimReport run(const SimConfig& cfg);

struct ComparisonEntry {
  std::string quantity;
  double empirical;
  double analytic;
  double std_error;
  double z;             // (empirical - analytic) / std_error
  bool flagged;         // |z| > 3
  bool informational;   // private-signal joint quantities: reported, not gated
};

struct Comparison {
  std::vector<ComparisonEntry> entries;
};

// Empirical-vs-closed-form comparison. All-compliant runs compare per-node
// payoffs and the punishment rate; single-constant-deviant runs compare the
// deviator payoff, punishment rate and miss rate. Private-signal entries
// are informational: the closed forms multiply per-node probabilities as if
// independent, but per-slot success is exclusive, so the true joint rates
// differ slightly.
Comparison compare_to_analytic(const SimConfig& cfg, const SimReport& report,
                               const PrivateAnalysis& analysis);
Comparison compare_to_analytic(const SimConfig& cfg, const SimReport& report,
                               const PublicAnalysis& analysis);

}  // namespace revmac
