#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "revmac/game.hpp"
#include "revmac/rng.hpp"

using revmac::MixedProfile;
using revmac::NetworkConfig;
using revmac::pareto_payoff;
using revmac::stage_payoff;

TEST_CASE("stage payoff: sole transmitter always succeeds") {
  MixedProfile p{{1.0, 0.0, 0.0, 0.0, 0.0}};
  CHECK(stage_payoff(p, 0) == 1.0);
  CHECK(stage_payoff(p, 1) == 0.0);
}

TEST_CASE("stage payoff: symmetric profile") {
  MixedProfile p{{0.2, 0.2, 0.2, 0.2, 0.2}};
  for (int i = 0; i < 5; ++i)
    CHECK(stage_payoff(p, i) == doctest::Approx(0.08192).epsilon(1e-12));
}

TEST_CASE("stage payoff: certain collision") {
  MixedProfile p{{1.0, 1.0}};
  CHECK(stage_payoff(p, 0) == 0.0);
  CHECK(stage_payoff(p, 1) == 0.0);
}

TEST_CASE("pareto payoff values") {
  CHECK(pareto_payoff(2) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(pareto_payoff(5) == doctest::Approx(0.08192).epsilon(1e-14));
  CHECK(revmac::cooperation_probability(5) == 0.2);
}

TEST_CASE("pareto payoff equals stage payoff at the all-p_c profile") {
  for (int n = 2; n <= 9; ++n) {
    const double pc = revmac::cooperation_probability(n);
    MixedProfile p{std::vector<double>(n, pc)};
    CHECK(stage_payoff(p, 0) ==
          doctest::Approx(pareto_payoff(n)).epsilon(1e-13));
  }
}

TEST_CASE("stage payoff properties on random profiles") {
  revmac::Rng rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform01() * 6);
    MixedProfile p{std::vector<double>(n)};
    for (double& v : p.probs) v = rng.uniform01();
    const int i = static_cast<int>(rng.uniform01() * n);

    double quiet = 1.0;
    for (int j = 0; j < n; ++j)
      if (j != i) quiet *= 1.0 - p.probs[j];
    const double u = stage_payoff(p, i);

    CHECK(u >= 0.0);
    CHECK(u <= std::min(p.probs[i], quiet) + 1e-15);

    // Linear in the own coordinate: u(p_i) = p_i * quiet.
    MixedProfile half = p;
    half.probs[i] *= 0.5;
    CHECK(stage_payoff(half, i) == doctest::Approx(0.5 * u).epsilon(1e-12));

    // System payoff at the symmetric optimum.
    MixedProfile sym{std::vector<double>(n, 1.0 / n)};
    double total = 0.0;
    for (int j = 0; j < n; ++j) total += stage_payoff(sym, j);
    CHECK(total == doctest::Approx(n * pareto_payoff(n)).epsilon(1e-12));

    // All-ones profile collides for everyone.
    MixedProfile ones{std::vector<double>(n, 1.0)};
    CHECK(stage_payoff(ones, i) == 0.0);
  }
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(stage_payoff(MixedProfile{{0.5, 0.5}}, 2), std::out_of_range);
  CHECK_THROWS_AS(stage_payoff(MixedProfile{{0.5, 1.5}}, 0), std::invalid_argument);
  CHECK_THROWS_AS(pareto_payoff(1), std::invalid_argument);
  CHECK_THROWS_AS(NetworkConfig(1), std::invalid_argument);
  CHECK_THROWS_AS(NetworkConfig(5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(NetworkConfig(5, 1.0), std::invalid_argument);
}

TEST_CASE("default network uses the symmetric optimum") {
  NetworkConfig net(5);
  CHECK(net.cooperation_prob == 0.2);
  CHECK(net.pc_is_pareto());
  CHECK_FALSE(NetworkConfig(5, 0.3).pc_is_pareto());
}
