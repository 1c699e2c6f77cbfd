#include "nlvar/normal.hpp"

#include <cmath>
#include <numbers>

namespace nlvar {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

}  // namespace nlvar
