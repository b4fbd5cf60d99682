// Test-only oracles, independent of the library's computation paths.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace testsupport {

// Direct summation of binomial pmf terms in long double via the term
// recurrence on logs. Independent oracle for revmac::binom_cdf.
inline long double binom_cdf_oracle(long k, long n, long double p) {
  if (k < 0) return 0.0L;
  if (k >= n) return 1.0L;
  if (p == 0.0L) return 1.0L;
  if (p == 1.0L) return 0.0L;
  long double sum = 0.0L;
  for (long m = 0; m <= k; ++m) {
    const long double log_term =
        std::lgamma(static_cast<long double>(n) + 1) -
        std::lgamma(static_cast<long double>(m) + 1) -
        std::lgamma(static_cast<long double>(n - m) + 1) +
        static_cast<long double>(m) * std::log(p) +
        static_cast<long double>(n - m) * std::log1p(-p);
    sum += std::exp(log_term);
  }
  return sum < 1.0L ? sum : 1.0L;
}

// Regularized incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a), via the
// lower series for x < a + 1 and the Lentz continued fraction otherwise.
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    // P(a,x) series; Q = 1 - P.
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - lg);
  }
  // Continued fraction for Q(a,x).
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - lg);
}

inline double chi_square_sf(double x, int df) {
  return gamma_q(static_cast<double>(df) / 2.0, x / 2.0);
}

struct ChiSquareResult {
  double statistic;
  int df;
  double p_value;
};

// Goodness-of-fit against the given expected bin proportions, pooling tail
// bins until every expected count is at least 5.
inline ChiSquareResult chi_square_gof(const std::vector<std::int64_t>& observed,
                                      const std::vector<double>& expected_prop) {
  const std::size_t raw = observed.size();
  if (expected_prop.size() != raw)
    throw std::invalid_argument("chi_square_gof: size mismatch");
  double total = 0.0;
  for (auto c : observed) total += static_cast<double>(c);

  std::vector<double> exp_counts;
  std::vector<double> obs_counts;
  double pool_exp = 0.0, pool_obs = 0.0;
  for (std::size_t i = 0; i < raw; ++i) {
    pool_exp += expected_prop[i] * total;
    pool_obs += static_cast<double>(observed[i]);
    if (pool_exp >= 5.0) {
      exp_counts.push_back(pool_exp);
      obs_counts.push_back(pool_obs);
      pool_exp = pool_obs = 0.0;
    }
  }
  if (pool_exp > 0.0 && !exp_counts.empty()) {
    exp_counts.back() += pool_exp;
    obs_counts.back() += pool_obs;
  }
  if (exp_counts.size() < 2)
    throw std::invalid_argument("chi_square_gof: too few usable bins");

  double stat = 0.0;
  for (std::size_t i = 0; i < exp_counts.size(); ++i) {
    const double diff = obs_counts[i] - exp_counts[i];
    stat += diff * diff / exp_counts[i];
  }
  const int df = static_cast<int>(exp_counts.size()) - 1;
  return ChiSquareResult{stat, df, chi_square_sf(stat, df)};
}

}  // namespace testsupport
