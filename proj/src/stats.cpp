#include "vrconflict/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace vrconflict {

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int max_iter = 400;
  constexpr double eps = 1e-15;
  constexpr double tiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) return h;
  }
  throw std::runtime_error("incomplete beta did not converge");
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0) || !(b > 0)) throw std::invalid_argument("beta parameters must be positive");
  if (std::isnan(x)) throw std::invalid_argument("beta argument is NaN");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  // the continued fraction converges fast only below the distribution mean
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (!(dof > 0)) throw std::invalid_argument("degrees of freedom must be positive");
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

double mean_of(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("mean of empty range");
  double s = 0.0;
  for (double v : xs) s += v;
  return s / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
  const std::size_t n = xs.size();
  if (n < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double v : xs) {
    const double d = v - m;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(n - 1));
}

ComparisonResult paired_ttest(std::span<const double> xs, std::span<const double> ys,
                              std::string label) {
  if (xs.size() != ys.size())
    throw std::invalid_argument("paired_ttest: unequal sample sizes");
  const std::size_t n = xs.size();
  if (n < 2) throw std::invalid_argument("paired_ttest: need at least 2 pairs");

  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = xs[i] - ys[i];

  ComparisonResult r;
  r.label = std::move(label);
  r.n_pairs = n;
  // detect degenerate differences exactly; the computed sd of n identical
  // values can round to a denormal-scale positive number and explode t
  const auto [mn, mx] = std::minmax_element(d.begin(), d.end());
  if (*mn == *mx) {
    if (*mn == 0.0) {
      // identical pairs: no effect, maximal p
      r.t_statistic = 0.0;
      r.p_value = 1.0;
      r.significant = false;
      return r;
    }
    throw std::domain_error("paired_ttest: zero variance around a nonzero mean difference");
  }
  const double m = mean_of(d);
  const double sd = sample_sd(d);
  const double dof = static_cast<double>(n - 1);
  r.t_statistic = m / (sd / std::sqrt(static_cast<double>(n)));
  r.p_value = student_t_two_sided_p(r.t_statistic, dof);
  r.significant = r.p_value < 0.05;
  return r;
}

}  // namespace vrconflict
