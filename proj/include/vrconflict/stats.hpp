#pragma once

#include <span>
#include <string>

namespace vrconflict {

struct ComparisonResult {
  std::string label;
  double t_statistic = 0.0;
  double p_value = 1.0;
  std::size_t n_pairs = 0;
  bool significant = false;  // p < 0.05, two-tailed
};

// Continued-fraction evaluation (Lentz), |error| < 1e-10 on the open interval.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided tail probability of Student's t with dof degrees of freedom.
double student_t_two_sided_p(double t, double dof);

// Paired two-tailed t-test.  Requires equal lengths and n >= 2.  All-zero
// differences give t = 0, p = 1; zero variance around a nonzero mean is
// degenerate and throws.
ComparisonResult paired_ttest(std::span<const double> xs, std::span<const double> ys,
                              std::string label = {});

double mean_of(std::span<const double> xs);
double sample_sd(std::span<const double> xs);  // n-1 denominator, 0 for n < 2

}  // namespace vrconflict
