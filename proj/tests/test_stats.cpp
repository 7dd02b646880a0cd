#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "vrconflict/rng.hpp"
#include "vrconflict/stats.hpp"

using namespace vrconflict;

namespace {

// two-sided tail mass of Student's t by composite Simpson on the density,
// fully independent of the incomplete-beta route under test
double t_two_sided_by_quadrature(double t, double dof) {
  const double a = std::abs(t);
  if (a == 0.0) return 1.0;
  const double ln_norm = std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0) -
                         0.5 * std::log(dof * std::numbers::pi);
  const auto density = [&](double x) {
    return std::exp(ln_norm - (dof + 1.0) / 2.0 * std::log1p(x * x / dof));
  };
  const int n = 200000;  // even
  const double h = a / n;
  double acc = density(0.0) + density(a);
  for (int i = 1; i < n; ++i) acc += density(i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  const double central = 2.0 * acc * h / 3.0;  // symmetric density
  return 1.0 - central;
}

double perm_p_value(const std::vector<double>& d) {
  const auto n = d.size();
  const auto t_of = [&](unsigned mask) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += (mask >> i & 1u) ? -d[i] : d[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = ((mask >> i & 1u) ? -d[i] : d[i]) - mean;
      ss += v * v;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    return mean / (sd / std::sqrt(static_cast<double>(n)));
  };
  const double t_obs = std::abs(t_of(0));
  unsigned hits = 0;
  const unsigned total = 1u << n;
  for (unsigned mask = 0; mask < total; ++mask)
    if (std::abs(t_of(mask)) >= t_obs - 1e-12) ++hits;
  return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("regularized incomplete beta: closed forms") {
  for (double x : {0.01, 0.2, 0.5, 0.73, 0.99}) {
    CAPTURE(x);
    CHECK(regularized_incomplete_beta(1.0, 1.0, x) == doctest::Approx(x).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(3.5, 1.0, x) ==
          doctest::Approx(std::pow(x, 3.5)).epsilon(1e-12));
    CHECK(regularized_incomplete_beta(1.0, 2.75, x) ==
          doctest::Approx(1.0 - std::pow(1.0 - x, 2.75)).epsilon(1e-12));
    // arcsine distribution
    CHECK(regularized_incomplete_beta(0.5, 0.5, x) ==
          doctest::Approx(2.0 / std::numbers::pi * std::asin(std::sqrt(x))).epsilon(1e-12));
  }
}

TEST_CASE("regularized incomplete beta: symmetry, bounds, monotonicity") {
  const double abs_[] = {0.5, 1.0, 2.0, 4.5, 10.0, 0.25};
  for (double a : abs_) {
    for (double b : abs_) {
      double prev = -1.0;
      for (double x : {0.0, 0.05, 0.3, 0.5, 0.642, 0.9, 1.0}) {
        CAPTURE(a);
        CAPTURE(b);
        CAPTURE(x);
        const double v = regularized_incomplete_beta(a, b, x);
        CHECK(v >= prev);  // nondecreasing in x
        prev = v;
        const double sym = regularized_incomplete_beta(b, a, 1.0 - x);
        CHECK(v + sym == doctest::Approx(1.0).epsilon(1e-12));
      }
    }
  }
  CHECK(regularized_incomplete_beta(2.0, 3.0, -0.5) == 0.0);
  CHECK(regularized_incomplete_beta(2.0, 3.0, 1.5) == 1.0);
  CHECK_THROWS_AS((void)regularized_incomplete_beta(0.0, 1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS((void)regularized_incomplete_beta(1.0, -1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS((void)regularized_incomplete_beta(1.0, 1.0, std::nan("")),
                  std::invalid_argument);
}

TEST_CASE("student t p-value against quadrature and closed forms") {
  for (double t : {0.3, 0.5, 1.0, 2.0, 3.5, 7.0}) {
    CAPTURE(t);
    // Cauchy
    CHECK(student_t_two_sided_p(t, 1.0) ==
          doctest::Approx(1.0 - 2.0 / std::numbers::pi * std::atan(t)).epsilon(1e-12));
    // dof = 2 has an elementary CDF
    CHECK(student_t_two_sided_p(t, 2.0) ==
          doctest::Approx(1.0 - t / std::sqrt(2.0 + t * t)).epsilon(1e-12));
    for (double dof : {3.0, 7.0, 15.0, 29.0, 200.0}) {
      CAPTURE(dof);
      CHECK(student_t_two_sided_p(t, dof) ==
            doctest::Approx(t_two_sided_by_quadrature(t, dof)).epsilon(1e-8));
    }
  }
}

TEST_CASE("student t p-value properties") {
  CHECK(student_t_two_sided_p(0.0, 5.0) == 1.0);
  CHECK(student_t_two_sided_p(-2.5, 9.0) == student_t_two_sided_p(2.5, 9.0));
  CHECK(student_t_two_sided_p(3.0, 9.0) < student_t_two_sided_p(2.0, 9.0));
  CHECK(student_t_two_sided_p(std::numeric_limits<double>::infinity(), 9.0) == 0.0);
  CHECK_THROWS_AS((void)student_t_two_sided_p(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("paired t-test on a hand-worked example") {
  const std::vector<double> xs{2.0, 4.0, 6.0, 8.0};
  const std::vector<double> ys{1.0, 2.0, 3.0, 4.0};
  // differences 1,2,3,4: mean 2.5, sd sqrt(5/3)
  const auto r = paired_ttest(xs, ys, "demo");
  CHECK(r.label == "demo");
  CHECK(r.n_pairs == 4);
  const double expect_t = 2.5 / (std::sqrt(5.0 / 3.0) / 2.0);
  CHECK(r.t_statistic == doctest::Approx(expect_t).epsilon(1e-12));
  CHECK(r.p_value == doctest::Approx(t_two_sided_by_quadrature(expect_t, 3.0)).epsilon(1e-8));
  CHECK(r.significant == (r.p_value < 0.05));

  // swapping the arguments flips the sign, not the p-value
  const auto rev = paired_ttest(ys, xs, "rev");
  CHECK(rev.t_statistic == doctest::Approx(-r.t_statistic).epsilon(1e-12));
  CHECK(rev.p_value == doctest::Approx(r.p_value).epsilon(1e-12));
}

TEST_CASE("paired t-test degenerate inputs") {
  const std::vector<double> same{3.0, 1.0, 4.0, 1.0, 5.0};
  const auto r = paired_ttest(same, same, "identical");
  CHECK(r.t_statistic == 0.0);
  CHECK(r.p_value == 1.0);
  CHECK_FALSE(r.significant);

  std::vector<double> shifted(same);
  for (double& v : shifted) v += 0.25;
  CHECK_THROWS_AS((void)paired_ttest(shifted, same, "const"), std::domain_error);

  CHECK_THROWS_AS((void)paired_ttest(std::vector<double>{1.0, 2.0},
                                     std::vector<double>{1.0}, "len"),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)paired_ttest(std::vector<double>{1.0}, std::vector<double>{2.0}, "n"),
                  std::invalid_argument);
}

TEST_CASE("analytic p tracks the exhaustive sign-flip permutation test") {
  // pinned n = 8 sample, all 256 sign assignments enumerated
  const std::vector<double> d{0.9, 0.2, -0.4, 1.3, 0.6, -0.1, 0.8, 0.35};
  const std::vector<double> zero(8, 0.0);
  const auto r = paired_ttest(d, zero, "perm");
  const double p_perm = perm_p_value(d);
  CHECK(std::abs(r.p_value - p_perm) <= 0.02);

  // across many draws the two tests stay close in distribution; individual
  // skewed samples may disagree more, so bound the spread, not each case
  std::vector<double> devs;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Rng rng(seed);
    std::vector<double> diffs(8);
    for (double& v : diffs) v = rng.normal(0.4, 1.0);
    const auto rt = paired_ttest(diffs, zero, "perm-sweep");
    devs.push_back(std::abs(rt.p_value - perm_p_value(diffs)));
  }
  std::sort(devs.begin(), devs.end());
  CHECK(devs[devs.size() / 2] <= 0.015);  // median
  const auto within = std::count_if(devs.begin(), devs.end(),
                                    [](double v) { return v <= 0.02; });
  CHECK(within >= 30);
}

TEST_CASE("mean and sample sd helpers") {
  const std::vector<double> xs{1.0, 2.0, 3.0, 4.0};
  CHECK(mean_of(xs) == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(sample_sd(xs) == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-13));
  CHECK(sample_sd(std::vector<double>{7.0}) == 0.0);
  CHECK_THROWS_AS((void)mean_of(std::vector<double>{}), std::invalid_argument);
}
