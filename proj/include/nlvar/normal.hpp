#pragma once

namespace nlvar {

/// Standard normal cdf, computed as erfc(-x/sqrt 2)/2. glibc's erfc is
/// accurate to a few ulp over the whole real line, which keeps the
/// absolute error far below 1e-12 including the tails.
double normal_cdf(double x);

/// Standard normal density.
double normal_pdf(double x);

}  // namespace nlvar
