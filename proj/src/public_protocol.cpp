#include "revmac/public_protocol.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace revmac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_pd(double pd, const NetworkConfig& net, const char* what) {
  if (!(pd > net.cooperation_prob && pd <= 1.0))
    throw std::invalid_argument(std::string(what) + ": p_d must lie in (p_c, 1]");
}

void check_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument(std::string(what) + ": probability outside [0,1]");
}

long ceil_to_long(double x) {
  const double c = std::ceil(x);
  if (c > 9.0e18) throw std::overflow_error("ceil_to_long: value too large");
  return static_cast<long>(c);
}

}  // namespace

PublicReviewProtocol::PublicReviewProtocol(const NetworkConfig& net, double b,
                                           long l, long m)
    : network(net), margin(b), review_len(l), punish_len(m) {
  if (m < 1)
    throw std::invalid_argument("PublicReviewProtocol: punish_len must be >= 1");
  IdleTestConfig(net, b, l);
}

double PublicReviewProtocol::idle_rate_compliant() const {
  return test_config().idle_rate_compliant();
}

long PublicReviewProtocol::fail_threshold() const {
  return test_config().fail_threshold();
}

IdleTestConfig PublicReviewProtocol::test_config(std::optional<double> pd) const {
  return IdleTestConfig(network, margin, review_len, pd);
}

double public_deterrence_margin(double pf, double pm, double pd,
                                const NetworkConfig& net) {
  return net.cooperation_prob * (1.0 - pm) - pd * pf;
}

double public_efficiency_loss(double pf, long l, long m,
                              const NetworkConfig& net) {
  const double n = static_cast<double>(net.n_nodes);
  const double pc = net.cooperation_prob;
  const double qc = pc * std::pow(1.0 - pc, net.n_nodes - 1);
  const double ld = static_cast<double>(l);
  const double md = static_cast<double>(m);
  return n * pf * md * qc / (ld + pf * md);
}

PublicAnalysis analyze_public_with_errors(const PublicReviewProtocol& proto,
                                          double pd, double pf, double pm) {
  check_pd(pd, proto.network, "analyze_public");
  check_prob(pf, "analyze_public: P~_f");
  check_prob(pm, "analyze_public: P~_m");

  const double pc = proto.network.cooperation_prob;
  const double quiet = std::pow(1.0 - pc, proto.network.n_nodes - 1);
  const double qc = pc * quiet;
  const double ld = static_cast<double>(proto.review_len);
  const double md = static_cast<double>(proto.punish_len);

  PublicAnalysis out{proto,
                     pd,
                     ErrorProbabilities{pf, pm},
                     0.0,
                     0.0,
                     0.0,
                     0.0,
                     kInf,
                     0.0,
                     false,
                     proto.network.pc_is_pareto()};
  out.payoff_compliant = ld * qc / (ld + pf * md);
  out.payoff_deviator = ld * pd * quiet / (ld + (1.0 - pm) * md);
  out.deviation_gain = out.payoff_deviator - out.payoff_compliant;
  out.margin_g = public_deterrence_margin(pf, pm, pd, proto.network);
  out.m_min = out.margin_g > 0.0 ? (pd - pc) * ld / out.margin_g : kInf;
  out.efficiency_loss =
      public_efficiency_loss(pf, proto.review_len, proto.punish_len, proto.network);
  out.is_dp = out.margin_g > 0.0 && md >= out.m_min;
  return out;
}

PublicAnalysis analyze_public(const PublicReviewProtocol& proto, double pd) {
  check_pd(pd, proto.network, "analyze_public");
  const ErrorProbabilities errs = idle_error_probs(proto.test_config(pd));
  return analyze_public_with_errors(proto, pd, errs.false_punishment,
                                    *errs.miss_detection);
}

double deviation_payoff_upper_bound(const PublicReviewProtocol& proto,
                                    double pf_star) {
  check_prob(pf_star, "deviation_payoff_upper_bound: pf_star");
  const double pc = proto.network.cooperation_prob;
  const int n = proto.network.n_nodes;
  const double qc = pc * std::pow(1.0 - pc, n - 1);
  const double ld = static_cast<double>(proto.review_len);
  const double md = static_cast<double>(proto.punish_len);
  const double numer = ld * qc + pf_star * std::pow(1.0 - pc, n) * ld +
                       (1.0 - pf_star) * proto.margin * ld;
  return numer / (ld + pf_star * md);
}

namespace {

// Smallest L >= 1 satisfying a monotone predicate, by doubling then
// bisection.
long smallest_l_where(const std::function<bool(long)>& ok) {
  if (ok(1)) return 1;
  long lo = 1;
  long hi = 2;
  while (!ok(hi)) {
    lo = hi;
    if (hi > (1L << 60))
      throw std::runtime_error("construct_eps_ne: no finite review length found");
    hi *= 2;
  }
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace

EpsNeResult construct_eps_ne(double epsilon, double delta,
                             const EpsNeSchedule& sched,
                             const NetworkConfig& net) {
  if (!(epsilon > 0.0 && delta > 0.0))
    throw std::invalid_argument("construct_eps_ne: epsilon and delta must be > 0");
  if (!(sched.beta > 0.0))
    throw std::invalid_argument("construct_eps_ne: beta must be > 0");
  if (!(sched.rho > 0.5 && sched.rho < 1.0))
    throw std::invalid_argument("construct_eps_ne: rho must lie in (1/2, 1)");
  if (!(sched.mu > static_cast<double>(net.n_nodes - 1)))
    throw std::invalid_argument("construct_eps_ne: mu must exceed N - 1");

  const double n = static_cast<double>(net.n_nodes);
  const double pc = net.cooperation_prob;
  const double qc = pc * std::pow(1.0 - pc, net.n_nodes - 1);
  const double idle_rate = std::pow(1.0 - pc, net.n_nodes);

  const auto loss_bound = [&](long l) {
    const double pf_bound =
        std::min(1.0, idle_rate * (1.0 - idle_rate) /
                          (sched.beta * sched.beta *
                           std::pow(static_cast<double>(l), 2.0 * sched.rho - 1.0)));
    return n * pf_bound * sched.mu * qc / (1.0 + pf_bound * sched.mu);
  };

  EpsNeResult out{PublicReviewProtocol(net, 0.5 * idle_rate, 1, 1), 0, 0, 0, 0};
  out.l_loss = smallest_l_where([&](long l) { return loss_bound(l) <= delta; });
  out.l_gap =
      smallest_l_where([&](long l) { return loss_bound(l) <= n * epsilon / 2.0; });
  out.l_margin = ceil_to_long(std::pow(2.0 * sched.beta / epsilon,
                                       1.0 / (1.0 - sched.rho)));
  out.l_valid = smallest_l_where([&](long l) {
    return sched.beta * std::pow(static_cast<double>(l), sched.rho - 1.0) <
           idle_rate;
  });

  const long l = std::max(std::max(out.l_loss, out.l_gap),
                          std::max(out.l_margin, out.l_valid));
  const double b = sched.beta * std::pow(static_cast<double>(l), sched.rho - 1.0);
  const long m = ceil_to_long(sched.mu * static_cast<double>(l));
  out.protocol = PublicReviewProtocol(net, b, l, m);
  return out;
}

BestResponsePolicy best_response_policy_public_with_threshold(
    const PublicReviewProtocol& proto, long fail_threshold, long l_cap) {
  const long l = proto.review_len;
  if (l > l_cap)
    throw std::invalid_argument(
        "best_response_policy_public: review length exceeds the state-space cap");

  const double pc = proto.network.cooperation_prob;
  const int n = proto.network.n_nodes;
  const double md = static_cast<double>(proto.punish_len);
  // Success probability when transmitting; also the idle probability when
  // waiting — both need all N-1 compliant nodes quiet.
  const double quiet = std::pow(1.0 - pc, n - 1);

  const auto state_of = [](long slot, long idles) {
    return slot * (slot - 1) / 2 + idles;
  };

  const long n_states = l * (l + 1) / 2;
  BestResponsePolicy out{l, std::vector<std::uint8_t>(n_states, 0), 0.0, 0.0};

  double v = 0.0;
  std::vector<double> next(l + 1);
  std::vector<double> cur(l + 1);
  std::vector<double> dist(l + 1);
  for (int iter = 0; iter < 1000; ++iter) {
    // Backward induction of max E[reward - v * slots] over an epoch.
    for (long i = 0; i <= l; ++i)
      next[i] = i <= fail_threshold ? -v * md : 0.0;
    for (long slot = l; slot >= 1; --slot) {
      for (long idles = 0; idles < slot; ++idles) {
        const double transmit = quiet - v + next[idles];
        const double wait =
            -v + quiet * next[idles + 1] + (1.0 - quiet) * next[idles];
        const bool tx = transmit >= wait;
        out.transmit[state_of(slot, idles)] = tx ? 1 : 0;
        cur[idles] = tx ? transmit : wait;
      }
      std::swap(cur, next);
    }
    // Evaluate the induced policy exactly: reward and punishment probability.
    std::fill(dist.begin(), dist.end(), 0.0);
    dist[0] = 1.0;
    double reward = 0.0;
    for (long slot = 1; slot <= l; ++slot) {
      for (long idles = slot - 1; idles >= 0; --idles) {
        const double pr = dist[idles];
        if (pr == 0.0) continue;
        if (out.transmit[state_of(slot, idles)]) {
          reward += pr * quiet;
        } else {
          dist[idles + 1] += pr * quiet;
          dist[idles] = pr * (1.0 - quiet);
        }
      }
    }
    double pf = 0.0;
    for (long i = 0; i <= std::min(fail_threshold, l); ++i) pf += dist[i];
    const double value = reward / (static_cast<double>(l) + pf * md);
    out.value = value;
    out.punish_prob = pf;
    if (std::abs(value - v) <= 1e-10) break;
    v = value;
  }
  return out;
}

BestResponsePolicy best_response_policy_public(const PublicReviewProtocol& proto,
                                               long l_cap) {
  return best_response_policy_public_with_threshold(proto, proto.fail_threshold(),
                                                    l_cap);
}

double best_response_value_public(const PublicReviewProtocol& proto, long l_cap) {
  return best_response_policy_public(proto, l_cap).value;
}

}  // namespace revmac
