#include "revmac/designer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace revmac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

DesignResult solve_design(const DesignProblem& problem) {
  const NetworkConfig& net = problem.network;
  const double pc = net.cooperation_prob;
  const double qc = pc * std::pow(1.0 - pc, net.n_nodes - 1);
  if (problem.b_grid.empty())
    throw std::invalid_argument("solve_design: empty margin grid");
  for (double b : problem.b_grid) {
    if (!(b > 0.0 && b < qc))
      throw std::invalid_argument("solve_design: margin outside (0, q_c)");
  }
  if (problem.ns_budget < 1)
    throw std::invalid_argument("solve_design: state budget must be >= 1");
  if (!(problem.deviation_prob > pc && problem.deviation_prob <= 1.0))
    throw std::invalid_argument("solve_design: p_d must lie in (p_c, 1]");

  DesignResult result{std::nullopt, kInf, 0, 0};
  // Total order on candidates: loss, then L, then M, then grid position.
  std::tuple<double, long, long, std::size_t> best{kInf, 0, 0, 0};

  for (std::size_t bi = 0; bi < problem.b_grid.size(); ++bi) {
    const double b = problem.b_grid[bi];
    for (long l = 1;; ++l) {
      const long k =
          static_cast<long>(std::floor(static_cast<double>(l) * (qc - b))) + 2;
      const long review_states = k * l - k * (k - 1) / 2;
      // Smallest automaton at this L needs review_states + 2 states; the
      // count is non-decreasing in L, so the level exhausts the budget for
      // good once exceeded.
      if (review_states + 2 > problem.ns_budget) break;
      ++result.l_examined;
      const long m_cap = (problem.ns_budget - review_states) / 2;

      const AckTestConfig test(net, b, l, problem.deviation_prob);
      const ErrorProbabilities errs = ack_error_probs(test);
      const double g = private_deterrence_margin(
          errs.false_punishment, *errs.miss_detection, problem.deviation_prob, net);
      if (g <= 0.0) continue;
      const double m_min = (problem.deviation_prob - pc) * static_cast<double>(l) / g;
      const long m = static_cast<long>(std::ceil(m_min));
      if (m > m_cap) continue;

      const double loss = private_efficiency_loss(errs.false_punishment, l, m, net);
      ++result.feasible_count;
      const std::tuple<double, long, long, std::size_t> cand{loss, l, m, bi};
      if (cand < best) {
        best = cand;
        result.protocol = PrivateReviewProtocol(net, b, l, m);
        result.efficiency_loss = loss;
      }
    }
  }
  return result;
}

}  // namespace revmac
