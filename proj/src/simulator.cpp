#include "revmac/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "revmac/rng.hpp"

namespace revmac {

std::vector<AckSignal> step_signals_private(const std::vector<std::uint8_t>& actions) {
  int transmitters = 0;
  int last = -1;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (actions[i]) {
      ++transmitters;
      last = static_cast<int>(i);
    }
  }
  std::vector<AckSignal> out(actions.size(), AckSignal::kFail);
  if (transmitters == 1) out[last] = AckSignal::kSuccess;
  return out;
}

TernarySignal step_signals_public(const std::vector<std::uint8_t>& actions) {
  int transmitters = 0;
  for (std::uint8_t a : actions) transmitters += a ? 1 : 0;
  if (transmitters == 0) return TernarySignal::kIdle;
  if (transmitters == 1) return TernarySignal::kSuccess;
  return TernarySignal::kCollision;
}

Automaton::Automaton(SignalMode mode, double pc, long l, long m, long threshold)
    : mode_(mode),
      cooperation_prob_(pc),
      review_len_(l),
      recip_len_(m),
      threshold_(threshold),
      saturation_(threshold + 1) {
  const long k = threshold_ + 2;
  const long review_states = k * l - k * (k - 1) / 2;
  state_space_ =
      review_states + (mode == SignalMode::kPrivate ? 2 * m : m);
}

Automaton Automaton::for_private(const PrivateReviewProtocol& proto) {
  return Automaton(SignalMode::kPrivate, proto.network.cooperation_prob,
                   proto.review_len, proto.recip_len, proto.fail_threshold());
}

Automaton Automaton::for_public(const PublicReviewProtocol& proto) {
  return Automaton(SignalMode::kPublic, proto.network.cooperation_prob,
                   proto.review_len, proto.punish_len, proto.fail_threshold());
}

double Automaton::prescribed_prob() const {
  return phase_ == Phase::kPunishment ? 1.0 : cooperation_prob_;
}

void Automaton::advance(bool counted_signal) {
  if (phase_ == Phase::kReview) {
    if (counted_signal) count_ = std::min(count_ + 1, saturation_);
    if (slot_ == review_len_) {
      last_failed_ = count_ <= threshold_;
      if (mode_ == SignalMode::kPrivate) {
        phase_ = last_failed_ ? Phase::kPunishment : Phase::kCooperation;
        slot_ = 1;
      } else if (last_failed_) {
        phase_ = Phase::kPunishment;
        slot_ = 1;
      } else {
        slot_ = 1;  // new review starts immediately
        count_ = 0;
      }
    } else {
      ++slot_;
    }
    return;
  }
  // Reciprocation/punishment slots ignore signals.
  if (slot_ == recip_len_) {
    phase_ = Phase::kReview;
    slot_ = 1;
    count_ = 0;
  } else {
    ++slot_;
  }
}

void Automaton::observe_private(AckSignal s) {
  if (mode_ != SignalMode::kPrivate)
    throw std::logic_error("Automaton: private signal fed to public automaton");
  advance(s == AckSignal::kSuccess);
}

void Automaton::observe_public(TernarySignal s) {
  if (mode_ != SignalMode::kPublic)
    throw std::logic_error("Automaton: public signal fed to private automaton");
  advance(s == TernarySignal::kIdle);
}

long Automaton::state_index() const {
  const long k = threshold_ + 2;
  if (phase_ == Phase::kReview) {
    // Sum of min(t, k) over completed review slots, then the current count.
    const long t = slot_ - 1;
    const long below = std::min(t, k - 1);
    const long base = below * (below + 1) / 2 + std::max(t - (k - 1), 0L) * k;
    return base + count_;
  }
  const long review_states = k * review_len_ - k * (k - 1) / 2;
  const long offset = slot_ - 1;
  if (mode_ == SignalMode::kPrivate && phase_ == Phase::kCooperation)
    return review_states + offset;
  return review_states + (mode_ == SignalMode::kPrivate ? recip_len_ : 0) + offset;
}

const NetworkConfig& network_of(const SimConfig& cfg) {
  if (std::holds_alternative<PrivateReviewProtocol>(cfg.protocol))
    return std::get<PrivateReviewProtocol>(cfg.protocol).network;
  return std::get<PublicReviewProtocol>(cfg.protocol).network;
}

SignalMode mode_of(const SimConfig& cfg) {
  return std::holds_alternative<PrivateReviewProtocol>(cfg.protocol)
             ? SignalMode::kPrivate
             : SignalMode::kPublic;
}

namespace {

struct NodeRole {
  enum class Kind { kCompliant, kConstant, kPunishAware, kAdaptive, kBestResponse };
  Kind kind = Kind::kCompliant;
  double p_d = 0.0;
  double p_r = 1.0;
  const AdaptiveDeviant* adaptive = nullptr;
  const BestResponsePolicy* br = nullptr;
};

// Order-independent mergeable sums; one per replication, reduced in
// replication order.
struct Accum {
  std::vector<double> sum_r;    // per-node per-epoch reward sums
  std::vector<double> sum_r2;
  std::vector<double> sum_rt;
  double sum_t = 0.0;
  double sum_t2 = 0.0;
  long epochs = 0;
  long punished = 0;
  long missed = 0;
  std::int64_t slots = 0;
  std::vector<std::vector<std::int64_t>> hist;

  explicit Accum(int n, long l)
      : sum_r(n, 0.0),
        sum_r2(n, 0.0),
        sum_rt(n, 0.0),
        hist(n, std::vector<std::int64_t>(l + 1, 0)) {}

  void add_epoch(const std::vector<double>& rewards, double len) {
    for (std::size_t i = 0; i < rewards.size(); ++i) {
      sum_r[i] += rewards[i];
      sum_r2[i] += rewards[i] * rewards[i];
      sum_rt[i] += rewards[i] * len;
    }
    sum_t += len;
    sum_t2 += len * len;
    ++epochs;
    slots += static_cast<std::int64_t>(len);
  }
};

std::vector<NodeRole> resolve_roles(const SimConfig& cfg, SignalMode mode,
                                    const BestResponsePolicy* br) {
  const int n = network_of(cfg).n_nodes;
  std::vector<NodeRole> roles(n);
  std::vector<bool> used(n, false);
  for (const DeviantSpec& d : cfg.deviants) {
    if (d.node_index < 0 || d.node_index >= n)
      throw std::invalid_argument("run: deviant node index out of range");
    if (used[d.node_index])
      throw std::invalid_argument("run: duplicate deviant node index");
    used[d.node_index] = true;
    NodeRole& role = roles[d.node_index];
    if (const auto* c = std::get_if<ConstantDeviant>(&d.policy)) {
      if (!(c->p_d >= 0.0 && c->p_d <= 1.0))
        throw std::invalid_argument("run: constant p_d outside [0,1]");
      role.kind = NodeRole::Kind::kConstant;
      role.p_d = c->p_d;
    } else if (const auto* pa = std::get_if<PunishAwareDeviant>(&d.policy)) {
      if (!(pa->p_d >= 0.0 && pa->p_d <= 1.0) || !(pa->p_r >= 0.0 && pa->p_r <= 1.0))
        throw std::invalid_argument("run: punish-aware probabilities outside [0,1]");
      role.kind = NodeRole::Kind::kPunishAware;
      role.p_d = pa->p_d;
      role.p_r = pa->p_r;
    } else if (const auto* a = std::get_if<AdaptiveDeviant>(&d.policy)) {
      if (mode != SignalMode::kPublic)
        throw std::invalid_argument("run: adaptive deviants need public signals");
      role.kind = NodeRole::Kind::kAdaptive;
      role.adaptive = a;
    } else {
      if (mode != SignalMode::kPublic)
        throw std::invalid_argument("run: best-response deviants need public signals");
      role.kind = NodeRole::Kind::kBestResponse;
      role.br = br;
    }
  }
  return roles;
}

void run_private_replication(const PrivateReviewProtocol& proto,
                             const std::vector<NodeRole>& roles, long epochs,
                             bool tally_miss, Rng rng, Accum& acc) {
  const int n = proto.network.n_nodes;
  const long l = proto.review_len;
  const long m = proto.recip_len;

  std::vector<Automaton> automata;
  automata.reserve(n);
  for (int i = 0; i < n; ++i) automata.push_back(Automaton::for_private(proto));

  std::vector<std::uint8_t> actions(n);
  std::vector<long> counts(n);
  std::vector<double> rewards(n);

  const auto draw_slot = [&](auto&& prob_of) -> int {
    int transmitters = 0;
    int last = -1;
    for (int i = 0; i < n; ++i) {
      actions[i] = rng.bernoulli(prob_of(i)) ? 1 : 0;
      if (actions[i]) {
        ++transmitters;
        last = i;
      }
    }
    return transmitters == 1 ? last : -1;
  };

  for (long e = 0; e < epochs; ++e) {
    std::fill(counts.begin(), counts.end(), 0L);
    std::fill(rewards.begin(), rewards.end(), 0.0);

    for (long t = 0; t < l; ++t) {
      const int sole = draw_slot([&](int i) {
        const NodeRole& role = roles[i];
        if (role.kind == NodeRole::Kind::kConstant) return role.p_d;
        return automata[i].prescribed_prob();  // p_c during reviews
      });
      if (sole >= 0) {
        rewards[sole] += 1.0;
        ++counts[sole];
      }
      for (int i = 0; i < n; ++i) {
        if (roles[i].kind == NodeRole::Kind::kConstant) continue;
        automata[i].observe_private(sole == i ? AckSignal::kSuccess
                                              : AckSignal::kFail);
      }
    }

    bool any_failed = false;
    bool any_compliant_failed = false;
    for (int i = 0; i < n; ++i) {
      acc.hist[i][counts[i]] += 1;
      if (roles[i].kind == NodeRole::Kind::kConstant) continue;
      if (automata[i].last_test_failed()) {
        any_failed = true;
        if (roles[i].kind == NodeRole::Kind::kCompliant) any_compliant_failed = true;
      }
    }
    acc.punished += any_failed ? 1 : 0;
    if (tally_miss) acc.missed += any_compliant_failed ? 0 : 1;

    for (long t = 0; t < m; ++t) {
      const int sole = draw_slot([&](int i) {
        const NodeRole& role = roles[i];
        switch (role.kind) {
          case NodeRole::Kind::kConstant:
            return role.p_d;
          case NodeRole::Kind::kPunishAware:
            return automata[i].phase() == Automaton::Phase::kPunishment
                       ? role.p_r
                       : role.p_d;
          default:
            return automata[i].prescribed_prob();
        }
      });
      if (sole >= 0) rewards[sole] += 1.0;
      for (int i = 0; i < n; ++i) {
        if (roles[i].kind == NodeRole::Kind::kConstant) continue;
        automata[i].observe_private(sole == i ? AckSignal::kSuccess
                                              : AckSignal::kFail);
      }
    }

    acc.add_epoch(rewards, static_cast<double>(l + m));
  }
}

void run_public_replication(const PublicReviewProtocol& proto,
                            const std::vector<NodeRole>& roles, long epochs,
                            bool tally_miss, Rng rng, Accum& acc) {
  const int n = proto.network.n_nodes;
  const long l = proto.review_len;
  const long m = proto.punish_len;

  Automaton automaton = Automaton::for_public(proto);
  std::vector<std::uint8_t> actions(n);
  std::vector<double> rewards(n);

  const auto draw_slot = [&](auto&& prob_of) {
    int transmitters = 0;
    int last = -1;
    for (int i = 0; i < n; ++i) {
      actions[i] = rng.bernoulli(prob_of(i)) ? 1 : 0;
      if (actions[i]) {
        ++transmitters;
        last = i;
      }
    }
    if (transmitters == 1) rewards[last] += 1.0;
    return transmitters;
  };

  for (long e = 0; e < epochs; ++e) {
    std::fill(rewards.begin(), rewards.end(), 0.0);
    long idles = 0;

    for (long t = 1; t <= l; ++t) {
      const int transmitters = draw_slot([&](int i) {
        const NodeRole& role = roles[i];
        switch (role.kind) {
          case NodeRole::Kind::kCompliant:
            return automaton.prescribed_prob();
          case NodeRole::Kind::kConstant:
          case NodeRole::Kind::kPunishAware:
            return role.p_d;
          case NodeRole::Kind::kAdaptive:
            return role.adaptive->rule(t, idles);
          default: {
            const long idx = t * (t - 1) / 2 + idles;
            return role.br->transmit[idx] ? 1.0 : 0.0;
          }
        }
      });
      const TernarySignal sig = transmitters == 0   ? TernarySignal::kIdle
                                : transmitters == 1 ? TernarySignal::kSuccess
                                                    : TernarySignal::kCollision;
      idles += sig == TernarySignal::kIdle ? 1 : 0;
      automaton.observe_public(sig);
    }

    for (int i = 0; i < n; ++i) acc.hist[i][idles] += 1;
    const bool failed = automaton.last_test_failed();
    acc.punished += failed ? 1 : 0;
    if (tally_miss) acc.missed += failed ? 0 : 1;

    if (failed) {
      for (long t = 0; t < m; ++t) {
        const int transmitters = draw_slot([&](int i) {
          const NodeRole& role = roles[i];
          switch (role.kind) {
            case NodeRole::Kind::kConstant:
              return role.p_d;
            case NodeRole::Kind::kPunishAware:
              return role.p_r;
            default:
              // Compliant nodes punish at probability 1; adaptive and
              // best-response deviators cannot score here either way.
              return automaton.prescribed_prob();
          }
        });
        automaton.observe_public(transmitters == 0   ? TernarySignal::kIdle
                                 : transmitters == 1 ? TernarySignal::kSuccess
                                                     : TernarySignal::kCollision);
      }
    }

    acc.add_epoch(rewards, static_cast<double>(l + (failed ? m : 0)));
  }
}

double ratio_std_error(double sum_r, double sum_r2, double sum_rt, double sum_t,
                       double sum_t2, long n_epochs, double ratio) {
  if (n_epochs < 2) return 0.0;
  const double n = static_cast<double>(n_epochs);
  const double s_rr = sum_r2 - sum_r * sum_r / n;
  const double s_tt = sum_t2 - sum_t * sum_t / n;
  const double s_rt = sum_rt - sum_r * sum_t / n;
  const double var_num =
      std::max(0.0, s_rr - 2.0 * ratio * s_rt + ratio * ratio * s_tt);
  const double mean_t = sum_t / n;
  return std::sqrt(var_num / (n - 1.0) / n) / mean_t;
}

double rate_std_error(double rate, long trials) {
  if (trials < 1) return 0.0;
  return std::sqrt(std::max(0.0, rate * (1.0 - rate)) /
                   static_cast<double>(trials));
}

}  // namespace

SimReport run(const SimConfig& cfg) {
  if (cfg.epochs < 1) throw std::invalid_argument("run: epochs must be >= 1");
  const SignalMode mode = mode_of(cfg);
  const NetworkConfig& net = network_of(cfg);
  const int n = net.n_nodes;
  const long l = mode == SignalMode::kPrivate
                     ? std::get<PrivateReviewProtocol>(cfg.protocol).review_len
                     : std::get<PublicReviewProtocol>(cfg.protocol).review_len;

  // Best-response policies are deterministic; compute once, share read-only.
  BestResponsePolicy br_policy{0, {}, 0.0, 0.0};
  const bool wants_br =
      std::any_of(cfg.deviants.begin(), cfg.deviants.end(), [](const DeviantSpec& d) {
        return std::holds_alternative<BestResponseDeviant>(d.policy);
      });
  if (wants_br) {
    if (mode != SignalMode::kPublic)
      throw std::invalid_argument("run: best-response deviants need public signals");
    br_policy =
        best_response_policy_public(std::get<PublicReviewProtocol>(cfg.protocol));
  }
  const std::vector<NodeRole> roles = resolve_roles(cfg, mode, &br_policy);
  const bool tally_miss = cfg.deviants.size() == 1;

  const long replications =
      cfg.replications > 0 ? cfg.replications : std::min<long>(64, cfg.epochs);
  if (replications > cfg.epochs)
    throw std::invalid_argument("run: more replications than epochs");

  std::vector<Accum> accs(replications, Accum(n, l));
  std::atomic<long> next{0};
  const auto worker = [&] {
    for (;;) {
      const long r = next.fetch_add(1);
      if (r >= replications) return;
      const long base = cfg.epochs / replications;
      const long extra = r < cfg.epochs % replications ? 1 : 0;
      Rng rng = Rng::substream(cfg.master_seed, static_cast<std::uint64_t>(r));
      if (mode == SignalMode::kPrivate) {
        run_private_replication(std::get<PrivateReviewProtocol>(cfg.protocol),
                                roles, base + extra, tally_miss, rng, accs[r]);
      } else {
        run_public_replication(std::get<PublicReviewProtocol>(cfg.protocol),
                               roles, base + extra, tally_miss, rng, accs[r]);
      }
    }
  };

  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  const long n_threads = std::min<long>(
      replications, cfg.threads > 0 ? cfg.threads : static_cast<long>(hw));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (long t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  // Merge in replication order: results depend only on the seed.
  Accum total(n, l);
  for (const Accum& a : accs) {
    for (int i = 0; i < n; ++i) {
      total.sum_r[i] += a.sum_r[i];
      total.sum_r2[i] += a.sum_r2[i];
      total.sum_rt[i] += a.sum_rt[i];
      for (std::size_t c = 0; c < total.hist[i].size(); ++c)
        total.hist[i][c] += a.hist[i][c];
    }
    total.sum_t += a.sum_t;
    total.sum_t2 += a.sum_t2;
    total.epochs += a.epochs;
    total.punished += a.punished;
    total.missed += a.missed;
    total.slots += a.slots;
  }

  SimReport report;
  report.mode = mode;
  report.epochs = total.epochs;
  report.reviews = total.epochs;
  report.total_slots = total.slots;
  report.payoffs.resize(n);
  for (int i = 0; i < n; ++i) {
    const double ratio = total.sum_r[i] / total.sum_t;
    report.payoffs[i].mean = ratio;
    report.payoffs[i].std_error =
        ratio_std_error(total.sum_r[i], total.sum_r2[i], total.sum_rt[i],
                        total.sum_t, total.sum_t2, total.epochs, ratio);
  }
  report.punishment_rate =
      static_cast<double>(total.punished) / static_cast<double>(total.epochs);
  report.punishment_rate_std_error =
      rate_std_error(report.punishment_rate, total.epochs);
  if (tally_miss) {
    report.miss_detection_rate =
        static_cast<double>(total.missed) / static_cast<double>(total.epochs);
    report.miss_detection_std_error =
        rate_std_error(*report.miss_detection_rate, total.epochs);
  }
  report.review_count_hist = std::move(total.hist);
  return report;
}

namespace {

ComparisonEntry make_entry(std::string quantity, double empirical,
                           double analytic, double std_error,
                           bool informational) {
  ComparisonEntry e;
  e.quantity = std::move(quantity);
  e.empirical = empirical;
  e.analytic = analytic;
  e.std_error = std_error;
  if (std_error > 0.0) {
    e.z = (empirical - analytic) / std_error;
  } else {
    e.z = empirical == analytic ? 0.0
                                : std::numeric_limits<double>::infinity();
  }
  e.flagged = std::abs(e.z) > 3.0;
  e.informational = informational;
  return e;
}

const ConstantDeviant* sole_constant_deviant(const SimConfig& cfg) {
  if (cfg.deviants.size() != 1) return nullptr;
  return std::get_if<ConstantDeviant>(&cfg.deviants.front().policy);
}

template <typename Analysis>
Comparison compare_impl(const SimConfig& cfg, const SimReport& report,
                        const Analysis& analysis, bool informational) {
  const NetworkConfig& net = network_of(cfg);
  if (net.n_nodes != analysis.protocol.network.n_nodes ||
      static_cast<int>(report.payoffs.size()) != net.n_nodes)
    throw std::invalid_argument("compare_to_analytic: node count mismatch");

  Comparison out;
  const double pf = analysis.errors.false_punishment;
  const double pm = analysis.errors.miss_detection.value_or(0.0);

  if (cfg.deviants.empty()) {
    for (int i = 0; i < net.n_nodes; ++i) {
      out.entries.push_back(make_entry(
          "payoff[node " + std::to_string(i) + "]", report.payoffs[i].mean,
          analysis.payoff_compliant, report.payoffs[i].std_error, informational));
    }
    out.entries.push_back(make_entry("punishment_rate", report.punishment_rate,
                                     pf, report.punishment_rate_std_error,
                                     informational));
    return out;
  }

  if (const ConstantDeviant* dev = sole_constant_deviant(cfg)) {
    if (std::abs(dev->p_d - analysis.deviation_prob) > 1e-12)
      throw std::invalid_argument(
          "compare_to_analytic: analysis p_d differs from the deviant's");
    const int idx = cfg.deviants.front().node_index;
    out.entries.push_back(make_entry(
        "payoff[deviant " + std::to_string(idx) + "]", report.payoffs[idx].mean,
        analysis.payoff_deviator, report.payoffs[idx].std_error, informational));
    out.entries.push_back(make_entry("punishment_rate", report.punishment_rate,
                                     1.0 - pm, report.punishment_rate_std_error,
                                     informational));
    if (report.miss_detection_rate) {
      out.entries.push_back(make_entry("miss_detection_rate",
                                       *report.miss_detection_rate, pm,
                                       *report.miss_detection_std_error,
                                       informational));
    }
    return out;
  }

  throw std::invalid_argument(
      "compare_to_analytic: closed forms cover all-compliant runs and a "
      "single constant deviant");
}

}  // namespace

Comparison compare_to_analytic(const SimConfig& cfg, const SimReport& report,
                               const PrivateAnalysis& analysis) {
  if (mode_of(cfg) != SignalMode::kPrivate || report.mode != SignalMode::kPrivate)
    throw std::invalid_argument("compare_to_analytic: signal mode mismatch");
  const auto& proto = std::get<PrivateReviewProtocol>(cfg.protocol);
  if (proto.review_len != analysis.protocol.review_len ||
      proto.recip_len != analysis.protocol.recip_len ||
      proto.margin != analysis.protocol.margin)
    throw std::invalid_argument("compare_to_analytic: protocol mismatch");
  // Private joint error formulas multiply per-node probabilities that are
  // negatively correlated in truth; every entry is informational.
  return compare_impl(cfg, report, analysis, /*informational=*/true);
}

Comparison compare_to_analytic(const SimConfig& cfg, const SimReport& report,
                               const PublicAnalysis& analysis) {
  if (mode_of(cfg) != SignalMode::kPublic || report.mode != SignalMode::kPublic)
    throw std::invalid_argument("compare_to_analytic: signal mode mismatch");
  const auto& proto = std::get<PublicReviewProtocol>(cfg.protocol);
  if (proto.review_len != analysis.protocol.review_len ||
      proto.punish_len != analysis.protocol.punish_len ||
      proto.margin != analysis.protocol.margin)
    throw std::invalid_argument("compare_to_analytic: protocol mismatch");
  return compare_impl(cfg, report, analysis, /*informational=*/false);
}

}  // namespace revmac
