#pragma once

#include <cmath>

#include <json.hpp>

#include "revmac/designer.hpp"
#include "revmac/private_protocol.hpp"
#include "revmac/public_protocol.hpp"
#include "revmac/simulator.hpp"

// JSON views of the analysis and simulation records. Non-finite values
// (m_min with a non-positive deterrence margin) serialize as null.

namespace revmac {

inline nlohmann::json finite_or_null(double x) {
  if (std::isfinite(x)) return x;
  return nullptr;
}

inline void to_json(nlohmann::json& j, const NetworkConfig& net) {
  j = {{"n_nodes", net.n_nodes},
       {"cooperation_prob", net.cooperation_prob},
       {"pc_is_pareto", net.pc_is_pareto()}};
}

inline void to_json(nlohmann::json& j, const ErrorProbabilities& e) {
  j = {{"false_punishment", e.false_punishment}};
  j["miss_detection"] =
      e.miss_detection ? nlohmann::json(*e.miss_detection) : nullptr;
}

inline void to_json(nlohmann::json& j, const PrivateReviewProtocol& p) {
  j = {{"signal", "private"},
       {"network", p.network},
       {"b", p.margin},
       {"l", p.review_len},
       {"m", p.recip_len}};
}

inline void to_json(nlohmann::json& j, const PublicReviewProtocol& p) {
  j = {{"signal", "public"},
       {"network", p.network},
       {"b", p.margin},
       {"l", p.review_len},
       {"m", p.punish_len}};
}

inline void to_json(nlohmann::json& j, const PrivateAnalysis& a) {
  j = {{"protocol", a.protocol},
       {"deviation_prob", a.deviation_prob},
       {"errors", a.errors},
       {"payoff_compliant", a.payoff_compliant},
       {"payoff_deviator", a.payoff_deviator},
       {"deviation_gain", a.deviation_gain},
       {"margin_g", a.margin_g},
       {"m_min", finite_or_null(a.m_min)},
       {"efficiency_loss", a.efficiency_loss},
       {"is_dp", a.is_dp},
       {"pc_is_pareto", a.pc_is_pareto}};
}

inline void to_json(nlohmann::json& j, const PublicAnalysis& a) {
  j = {{"protocol", a.protocol},
       {"deviation_prob", a.deviation_prob},
       {"errors", a.errors},
       {"payoff_compliant", a.payoff_compliant},
       {"payoff_deviator", a.payoff_deviator},
       {"deviation_gain", a.deviation_gain},
       {"margin_g", a.margin_g},
       {"m_min", finite_or_null(a.m_min)},
       {"efficiency_loss", a.efficiency_loss},
       {"is_dp", a.is_dp},
       {"pc_is_pareto", a.pc_is_pareto}};
}

inline void to_json(nlohmann::json& j, const AutomatonSize& s) {
  j = {{"states", s.states}, {"k", s.k}};
}

inline void to_json(nlohmann::json& j, const DesignResult& r) {
  j = {{"feasible", r.feasible()},
       {"feasible_count", r.feasible_count},
       {"l_examined", r.l_examined}};
  if (r.feasible()) {
    j["protocol"] = *r.protocol;
    j["efficiency_loss"] = r.efficiency_loss;
    j["state_count"] = state_count(*r.protocol);
  } else {
    j["protocol"] = nullptr;
    j["efficiency_loss"] = nullptr;
  }
}

inline void to_json(nlohmann::json& j, const PrivateConstructResult& r) {
  j = {{"found", r.found()}, {"l_scanned", r.l_scanned}};
  if (r.found()) {
    j["protocol"] = *r.protocol;
    j["efficiency_loss"] = r.achieved_loss;
  } else {
    j["protocol"] = nullptr;
    j["best_loss_seen"] = finite_or_null(r.achieved_loss);
  }
}

inline void to_json(nlohmann::json& j, const EpsNeResult& r) {
  j = {{"protocol", r.protocol},
       {"l_loss", r.l_loss},
       {"l_gap", r.l_gap},
       {"l_margin", r.l_margin},
       {"l_valid", r.l_valid}};
}

inline void to_json(nlohmann::json& j, const NodePayoff& p) {
  j = {{"mean", p.mean}, {"std_error", p.std_error}};
}

inline void to_json(nlohmann::json& j, const SimReport& r) {
  j = {{"signal", r.mode == SignalMode::kPrivate ? "private" : "public"},
       {"epochs", r.epochs},
       {"reviews", r.reviews},
       {"total_slots", r.total_slots},
       {"payoffs", r.payoffs},
       {"punishment_rate", r.punishment_rate},
       {"punishment_rate_std_error", r.punishment_rate_std_error},
       {"review_count_hist", r.review_count_hist}};
  j["miss_detection_rate"] =
      r.miss_detection_rate ? nlohmann::json(*r.miss_detection_rate) : nullptr;
  j["miss_detection_std_error"] = r.miss_detection_std_error
                                      ? nlohmann::json(*r.miss_detection_std_error)
                                      : nullptr;
}

inline void to_json(nlohmann::json& j, const ComparisonEntry& e) {
  j = {{"quantity", e.quantity},
       {"empirical", e.empirical},
       {"analytic", e.analytic},
       {"std_error", e.std_error},
       {"z", finite_or_null(e.z)},
       {"flagged", e.flagged},
       {"informational", e.informational}};
}

inline void to_json(nlohmann::json& j, const Comparison& c) {
  j = {{"entries", c.entries}};
}

}  // namespace revmac
