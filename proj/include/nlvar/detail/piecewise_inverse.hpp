#pragma once

#include "nlvar/errors.hpp"
#include "nlvar/types.hpp"

#include <string>

namespace nlvar::detail {

/// Inverts a continuous piecewise affine map by trying each regime's affine
/// inverse and keeping the first candidate that lies in its own regime up to
/// slack 1e-9 (1 + |z|), then 1e-6 on a second pass. On shared boundaries the
/// candidates coincide, so the smallest regime index is as good as any.
template <class Solve, class Margin>
Vec piecewise_inverse(std::size_t regimes, Solve&& solve, Margin&& margin, const std::string& what) {
  for (double slack : {1e-9, 1e-6}) {
    for (std::size_t l = 0; l < regimes; ++l) {
      const Vec z = solve(l);
      if (margin(l, z) >= -slack * (1.0 + z.norm())) return z;
    }
  }
  throw NoRegimeAccepts("no regime accepts its candidate inverse of " + what);
}

}  // namespace nlvar::detail
