#include "revmac/private_protocol.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace revmac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_pd(double pd, const NetworkConfig& net, const char* what) {
  if (!(pd > net.cooperation_prob && pd <= 1.0))
    throw std::invalid_argument(std::string(what) +
                                ": p_d must lie in (p_c, 1]");
}

void check_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument(std::string(what) +
                                ": probability outside [0,1]");
}

long ceil_to_long(double x) {
  const double c = std::ceil(x);
  if (c > 9.0e18) throw std::overflow_error("ceil_to_long: value too large");
  return static_cast<long>(c);
}

}  // namespace

PrivateReviewProtocol::PrivateReviewProtocol(const NetworkConfig& net, double b,
                                             long l, long m)
    : network(net), margin(b), review_len(l), recip_len(m) {
  if (m < 1)
    throw std::invalid_argument("PrivateReviewProtocol: recip_len must be >= 1");
  // Margin/length validation is shared with the test config.
  AckTestConfig(net, b, l);
}

double PrivateReviewProtocol::ack_rate_compliant() const {
  return test_config().ack_rate_compliant();
}

long PrivateReviewProtocol::fail_threshold() const {
  return test_config().fail_threshold();
}

AckTestConfig PrivateReviewProtocol::test_config(std::optional<double> pd) const {
  return AckTestConfig(network, margin, review_len, pd);
}

double private_deterrence_margin(double pf, double pm, double pd,
                                 const NetworkConfig& net) {
  const double n = static_cast<double>(net.n_nodes);
  const double pass = 1.0 - pf;
  return std::pow(pass, (n - 1.0) / n) - (1.0 - net.cooperation_prob) * pass -
         pd * pm;
}

double private_efficiency_loss(double pf, long l, long m,
                               const NetworkConfig& net) {
  const double n = static_cast<double>(net.n_nodes);
  const double pc = net.cooperation_prob;
  const double quiet = std::pow(1.0 - pc, net.n_nodes - 1);
  const double pass = 1.0 - pf;
  const double md = static_cast<double>(m);
  const double ld = static_cast<double>(l);
  return n * md / (ld + md) * quiet *
         (pc * pf - std::pow(pass, (n - 1.0) / n) + pass);
}

PrivateAnalysis analyze_private_with_errors(const PrivateReviewProtocol& proto,
                                            double pd, double pf, double pm) {
  check_pd(pd, proto.network, "analyze_private");
  check_prob(pf, "analyze_private: P_f");
  check_prob(pm, "analyze_private: P_m");

  const double n = static_cast<double>(proto.network.n_nodes);
  const double pc = proto.network.cooperation_prob;
  const double quiet = std::pow(1.0 - pc, proto.network.n_nodes - 1);
  const double ld = static_cast<double>(proto.review_len);
  const double md = static_cast<double>(proto.recip_len);
  const double pass = 1.0 - pf;

  PrivateAnalysis out{proto,
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

  // Cooperation slots pay p_c; the closed form adds a reciprocation cross
  // term in (1-P_f) whose event semantics it does not spell out. Taken
  // verbatim; the simulator measures the true value.
  const double cross =
      std::pow(pass, (n - 1.0) / n) * (1.0 - std::pow(pass, 1.0 / n));
  out.payoff_compliant =
      quiet / (ld + md) * (pc * ld + pc * pass * md + cross * md);
  out.payoff_deviator = pd * quiet * (ld + pm * md) / (ld + md);
  out.deviation_gain = out.payoff_deviator - out.payoff_compliant;
  out.margin_g = private_deterrence_margin(pf, pm, pd, proto.network);
  out.m_min = out.margin_g > 0.0 ? (pd - pc) * ld / out.margin_g : kInf;
  out.efficiency_loss =
      private_efficiency_loss(pf, proto.review_len, proto.recip_len, proto.network);
  out.is_dp = out.margin_g > 0.0 && md >= out.m_min;
  return out;
}

PrivateAnalysis analyze_private(const PrivateReviewProtocol& proto, double pd) {
  check_pd(pd, proto.network, "analyze_private");
  const ErrorProbabilities errs = ack_error_probs(proto.test_config(pd));
  return analyze_private_with_errors(proto, pd, errs.false_punishment,
                                     *errs.miss_detection);
}

AutomatonSize state_count(const PrivateReviewProtocol& proto) {
  const long k = proto.fail_threshold() + 2;
  const long l = proto.review_len;
  return AutomatonSize{k * l - k * (k - 1) / 2 + 2 * proto.recip_len,
                       static_cast<int>(k)};
}

PrivateConstructResult construct_near_optimal_private(double pd, double delta,
                                                      double b,
                                                      const NetworkConfig& net,
                                                      long l_cap) {
  check_pd(pd, net, "construct_near_optimal_private");
  if (!(delta > 0.0))
    throw std::invalid_argument("construct_near_optimal_private: delta must be > 0");
  if (l_cap < 1)
    throw std::invalid_argument("construct_near_optimal_private: l_cap must be >= 1");

  PrivateConstructResult result{std::nullopt, kInf, 0};
  for (long l = 1; l <= l_cap; ++l) {
    result.l_scanned = l;
    const AckTestConfig test(net, b, l, pd);
    const ErrorProbabilities errs = ack_error_probs(test);
    const double g = private_deterrence_margin(errs.false_punishment,
                                               *errs.miss_detection, pd, net);
    if (g <= 0.0) continue;
    const long m = ceil_to_long((pd - net.cooperation_prob) *
                                static_cast<double>(l) / g);
    const double loss = private_efficiency_loss(errs.false_punishment, l, m, net);
    result.achieved_loss = std::min(result.achieved_loss, loss);
    if (loss <= delta) {
      result.protocol = PrivateReviewProtocol(net, b, l, m);
      result.achieved_loss = loss;
      return result;
    }
  }
  return result;
}

double robust_p_eps(double epsilon, const NetworkConfig& net) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("robust_p_eps: epsilon must be > 0");
  return net.cooperation_prob +
         epsilon / std::pow(1.0 - net.cooperation_prob, net.n_nodes - 1);
}

double robust_margin(double epsilon, const NetworkConfig& net) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("robust_margin: epsilon must be > 0");
  return epsilon / (2.0 * (net.n_nodes - 1));
}

double robust_gain_floor(double b, long l, double epsilon,
                         const NetworkConfig& net) {
  const double p_eps = robust_p_eps(epsilon, net);
  const AckTestConfig test(net, b, l, p_eps);
  const ErrorProbabilities errs = ack_error_probs(test);
  const double n = static_cast<double>(net.n_nodes);
  const double pass = 1.0 - errs.false_punishment;
  // Miss detection enters with weight 1 (not p_d): a floor over the whole
  // range p_d in [p_eps, 1] by monotonicity of P_m in p_d.
  return std::pow(pass, (n - 1.0) / n) -
         (1.0 - net.cooperation_prob) * pass - *errs.miss_detection;
}

double max_constant_deviation_gain(const PrivateReviewProtocol& proto,
                                   double grid_step) {
  return certify_robust(proto, kInf, grid_step).max_gain;
}

RobustCertification certify_robust(const PrivateReviewProtocol& proto,
                                   double epsilon, double grid_step) {
  if (!(grid_step > 0.0))
    throw std::invalid_argument("certify_robust: step must be > 0");
  const double pc = proto.network.cooperation_prob;
  const double p_eps =
      std::isfinite(epsilon) ? robust_p_eps(epsilon, proto.network) : kInf;
  RobustCertification cert{-kInf, -kInf};
  bool saw_one = false;
  for (long i = 1;; ++i) {
    double pd = pc + static_cast<double>(i) * grid_step;
    if (pd >= 1.0) {
      pd = 1.0;
      saw_one = true;
    }
    const double gain = analyze_private(proto, pd).deviation_gain;
    cert.max_gain = std::max(cert.max_gain, gain);
    if (pd >= p_eps) cert.max_gain_deterred = std::max(cert.max_gain_deterred, gain);
    if (saw_one) break;
  }
  return cert;
}

PrivateConstructResult construct_robust_eps_dp(double epsilon, double delta,
                                               const NetworkConfig& net,
                                               long l_cap) {
  if (!(epsilon > 0.0 && delta > 0.0))
    throw std::invalid_argument("construct_robust_eps_dp: epsilon and delta must be > 0");
  const double b = robust_margin(epsilon, net);
  const double p_eps = robust_p_eps(epsilon, net);
  if (p_eps >= 1.0)
    throw std::invalid_argument(
        "construct_robust_eps_dp: epsilon so large every deviation gains less");
  // Validates b against (0, q_c).
  (void)AckTestConfig(net, b, 1);

  PrivateConstructResult result{std::nullopt, kInf, 0};
  for (long l = 1; l <= l_cap; ++l) {
    result.l_scanned = l;
    const ErrorProbabilities base = ack_error_probs(AckTestConfig(net, b, l));
    const double pf = base.false_punishment;
    const double floor_g = robust_gain_floor(b, l, epsilon, net);
    if (floor_g <= 0.0) continue;
    const long m = ceil_to_long((1.0 - net.cooperation_prob) *
                                static_cast<double>(l) / floor_g);
    const double loss = private_efficiency_loss(pf, l, m, net);
    result.achieved_loss = std::min(result.achieved_loss, loss);
    if (loss > delta) continue;
    PrivateReviewProtocol candidate(net, b, l, m);
    // Certify: no grid deviation gains more than epsilon, and every
    // p_d >= p_eps is deterred outright. Guaranteed analytically when
    // p_c = 1/N; checked regardless.
    const RobustCertification cert = certify_robust(candidate, epsilon);
    if (cert.max_gain <= epsilon && cert.max_gain_deterred <= 1e-12) {
      result.protocol = candidate;
      result.achieved_loss = loss;
      return result;
    }
  }
  return result;
}

}  // namespace revmac
