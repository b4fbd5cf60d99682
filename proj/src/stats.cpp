#include "revmac/stats.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace revmac {

namespace {

// Switch point between direct summation and the incomplete beta identity.
constexpr long kBetaPathMinTrials = 10001;

void check_binom_args(long n, double p) {
  if (n < 1) throw std::invalid_argument("binom_cdf: n must be >= 1");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("binom_cdf: p must be in [0,1]");
}

// Log-space pmf terms summed with Kahan compensation. Terms far below the
// peak underflow to zero, which is harmless at double precision.
double direct_cdf(long k, long n, double p) {
  const double log_p = std::log(p);
  const double log_q = std::log1p(-p);
  const double lg_n1 = std::lgamma(static_cast<double>(n) + 1.0);
  double sum = 0.0;
  double comp = 0.0;
  for (long m = 0; m <= k; ++m) {
    const double md = static_cast<double>(m);
    const double log_term = lg_n1 - std::lgamma(md + 1.0) -
                            std::lgamma(static_cast<double>(n - m) + 1.0) +
                            md * log_p + static_cast<double>(n - m) * log_q;
    const double term = std::exp(log_term);
    const double y = term - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return std::min(sum, 1.0);
}

}  // namespace

double binom_cdf(double y, long n, double p) {
  check_binom_args(n, p);
  const double fl = std::floor(y);
  if (fl < 0.0) return 0.0;
  if (fl >= static_cast<double>(n)) return 1.0;
  const long k = static_cast<long>(fl);
  if (p == 0.0) return 1.0;  // all mass at zero successes
  if (p == 1.0) return 0.0;  // all mass at n > k
  if (n >= kBetaPathMinTrials) {
    // F(k; n, p) = I_{1-p}(n-k, k+1) = 1 - I_p(k+1, n-k)
    return boost::math::ibetac(static_cast<double>(k) + 1.0,
                               static_cast<double>(n - k), p);
  }
  return direct_cdf(k, n, p);
}

double binom_log_pmf(long k, long n, double p) {
  check_binom_args(n, p);
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  if (p == 0.0)
    return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (p == 1.0)
    return k == n ? 0.0 : -std::numeric_limits<double>::infinity();
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) -
         std::lgamma(nd - kd + 1.0) + kd * std::log(p) +
         (nd - kd) * std::log1p(-p);
}

double binom_pmf(long k, long n, double p) {
  const double lg = binom_log_pmf(k, n, p);
  return std::isinf(lg) ? 0.0 : std::exp(lg);
}

namespace {

double quiet_power(const NetworkConfig& net, int exponent) {
  return std::pow(1.0 - net.cooperation_prob, exponent);
}

long threshold_of(double rate, double margin, long review_len) {
  return static_cast<long>(
      std::floor(static_cast<double>(review_len) * (rate - margin)));
}

void check_test_config(double margin, double rate, long review_len,
                       const std::optional<double>& pd, double pc,
                       const char* what) {
  if (review_len < 1)
    throw std::invalid_argument(std::string(what) + ": review_len must be >= 1");
  if (!(margin > 0.0 && margin < rate))
    throw std::invalid_argument(std::string(what) +
                                ": margin must lie in (0, compliant rate)");
  if (pd && !(*pd > pc && *pd <= 1.0))
    throw std::invalid_argument(std::string(what) +
                                ": deviation_prob must lie in (p_c, 1]");
}

}  // namespace

AckTestConfig::AckTestConfig(const NetworkConfig& net, double b, long l,
                             std::optional<double> pd)
    : network(net), margin(b), review_len(l), deviation_prob(pd) {
  check_test_config(margin, ack_rate_compliant(), review_len, deviation_prob,
                    net.cooperation_prob, "AckTestConfig");
}

double AckTestConfig::ack_rate_compliant() const {
  return network.cooperation_prob * quiet_power(network, network.n_nodes - 1);
}

double AckTestConfig::ack_rate_deviation() const {
  if (!deviation_prob)
    throw std::logic_error("AckTestConfig: no deviation_prob set");
  return network.cooperation_prob * quiet_power(network, network.n_nodes - 2) *
         (1.0 - *deviation_prob);
}

long AckTestConfig::fail_threshold() const {
  return threshold_of(ack_rate_compliant(), margin, review_len);
}

IdleTestConfig::IdleTestConfig(const NetworkConfig& net, double b, long l,
                               std::optional<double> pd)
    : network(net), margin(b), review_len(l), deviation_prob(pd) {
  check_test_config(margin, idle_rate_compliant(), review_len, deviation_prob,
                    net.cooperation_prob, "IdleTestConfig");
}

double IdleTestConfig::idle_rate_compliant() const {
  return quiet_power(network, network.n_nodes);
}

double IdleTestConfig::idle_rate_deviation() const {
  if (!deviation_prob)
    throw std::logic_error("IdleTestConfig: no deviation_prob set");
  return (1.0 - *deviation_prob) * quiet_power(network, network.n_nodes - 1);
}

long IdleTestConfig::fail_threshold() const {
  return threshold_of(idle_rate_compliant(), margin, review_len);
}

ErrorProbabilities ack_error_probs(const AckTestConfig& cfg) {
  const double thr = static_cast<double>(cfg.fail_threshold());
  const double per_node_fail =
      binom_cdf(thr, cfg.review_len, cfg.ack_rate_compliant());
  ErrorProbabilities out;
  out.false_punishment =
      1.0 - std::pow(1.0 - per_node_fail, cfg.network.n_nodes);
  if (cfg.deviation_prob) {
    const double fail_under_dev =
        binom_cdf(thr, cfg.review_len, cfg.ack_rate_deviation());
    out.miss_detection =
        std::pow(1.0 - fail_under_dev, cfg.network.n_nodes - 1);
  }
  return out;
}

ErrorProbabilities idle_error_probs(const IdleTestConfig& cfg) {
  const double thr = static_cast<double>(cfg.fail_threshold());
  ErrorProbabilities out;
  out.false_punishment =
      binom_cdf(thr, cfg.review_len, cfg.idle_rate_compliant());
  if (cfg.deviation_prob) {
    out.miss_detection =
        1.0 - binom_cdf(thr, cfg.review_len, cfg.idle_rate_deviation());
  }
  return out;
}

double chebyshev_pf_bound(double b, long l, const NetworkConfig& net) {
  if (!(b > 0.0)) throw std::invalid_argument("chebyshev_pf_bound: need B > 0");
  if (l < 1) throw std::invalid_argument("chebyshev_pf_bound: need L >= 1");
  const double rate = quiet_power(net, net.n_nodes);
  return rate * (1.0 - rate) / (b * b * static_cast<double>(l));
}

}  // namespace revmac
