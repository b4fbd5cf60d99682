#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "revmac/designer.hpp"
#include "revmac/private_protocol.hpp"

using revmac::DesignProblem;
using revmac::NetworkConfig;
using revmac::solve_design;

TEST_CASE("reference optimum at p_d = 0.8") {
  NetworkConfig net(5);
  const auto r = solve_design({{0.04}, 256, 0.8, net});
  REQUIRE(r.feasible());
  CHECK(r.protocol->review_len == 23);
  CHECK(r.protocol->recip_len == 90);
  CHECK(std::fabs(r.efficiency_loss - 0.0479) <= 5e-4);
  CHECK(r.feasible_count > 0);

  // Both constraints hold post hoc.
  CHECK(revmac::state_count(*r.protocol).states <= 256);
  CHECK(revmac::analyze_private(*r.protocol, 0.8).is_dp);
}

TEST_CASE("three states cannot deter") {
  NetworkConfig net(5);
  for (double pd : {0.4, 0.7, 1.0}) {
    const auto r = solve_design({{0.04}, 3, pd, net});
    CHECK_FALSE(r.feasible());
    CHECK(r.feasible_count == 0);
  }
}

TEST_CASE("larger budgets never hurt") {
  NetworkConfig net(5);
  double prev = 1e9;
  for (long budget : {64L, 128L, 256L, 512L, 1024L}) {
    const auto r = solve_design({{0.04}, budget, 0.8, net});
    if (!r.feasible()) continue;
    CHECK(r.efficiency_loss <= prev + 1e-15);
    prev = r.efficiency_loss;
  }
}

TEST_CASE("optimum beats every hand-built feasible triple") {
  NetworkConfig net(5);
  const double pd = 0.8;
  const auto r = solve_design({{0.04}, 256, pd, net});
  REQUIRE(r.feasible());
  for (long l = 1; l <= 150; ++l) {
    const auto probe =
        revmac::analyze_private(revmac::PrivateReviewProtocol(net, 0.04, l, 1), pd);
    if (!(probe.margin_g > 0.0)) continue;
    const long m = static_cast<long>(std::ceil(probe.m_min));
    revmac::PrivateReviewProtocol cand(net, 0.04, l, m);
    if (revmac::state_count(cand).states > 256) continue;
    CHECK(r.efficiency_loss <=
          revmac::analyze_private(cand, pd).efficiency_loss + 1e-15);
  }
}

TEST_CASE("grid with several margins picks the best") {
  NetworkConfig net(5);
  const auto single = solve_design({{0.04}, 256, 0.8, net});
  const auto multi = solve_design({{0.02, 0.04, 0.06}, 256, 0.8, net});
  REQUIRE(multi.feasible());
  CHECK(multi.efficiency_loss <= single.efficiency_loss + 1e-15);
  CHECK(multi.feasible_count >= single.feasible_count);
}

TEST_CASE("problem validation") {
  NetworkConfig net(5);
  CHECK_THROWS_AS(solve_design({{}, 256, 0.8, net}), std::invalid_argument);
  CHECK_THROWS_AS(solve_design({{0.09}, 256, 0.8, net}), std::invalid_argument);
  CHECK_THROWS_AS(solve_design({{0.04}, 0, 0.8, net}), std::invalid_argument);
  CHECK_THROWS_AS(solve_design({{0.04}, 256, 0.1, net}), std::invalid_argument);
}
