#pragma once

#include <vector>

#include "mp_real.hpp"

namespace senserf::detail {

struct FamilyOptions {
  double tol = 1e-17;
  bool relative = true;
  // Multiply every value by e^x.
  bool scaled = true;
  // Minimum number of correct bits left after cancellation in each sum.
  int good_bits = 64;
};

struct ExtGammaFamily {
  mpfr_prec_t precision = 0;
  // values[j] ~ Gamma(a_top - j, x, b), times e^x when scaled.
  std::vector<MpReal> values;
  std::vector<double> truncation_bound;
  std::vector<double> rounding_bound;
  std::vector<int> terms;
};

// Extended incomplete gamma values for a run of orders a_top, a_top-1, ...
// evaluated by the alternating series in multiple precision. Precision and
// term count grow until every member meets the tolerance and keeps
// options.good_bits correct bits. Throws ConvergenceError when kSeriesTermCap
// terms are not enough.
ExtGammaFamily ext_gamma_family(double a_top, int count, double x, double b,
                                const FamilyOptions& options);

}  // namespace senserf::detail
