#include "nlvar/errors.hpp"
#include "nlvar/longrun.hpp"
#include "nlvar/normal.hpp"

#include <cmath>
#include <limits>

namespace nlvar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void validate(const TransitoryConfig& c) {
  if (c.alpha_inner.size() != 2 || c.alpha_outer.size() != 2 || c.beta.size() != 2) {
    throw DimensionMismatch("the transitory experiment needs p = 2, r = 1");
  }
  if (c.horizon < 1) throw PreconditionError("horizon must be >= 1");
  if (!(c.tol > 0.0)) throw PreconditionError("tol must be positive");
  for (const Vec* a : {&c.alpha_inner, &c.alpha_outer}) {
    const double eig = 1.0 + c.beta.dot(*a);
    if (std::abs(eig) >= 1.0) throw PreconditionError("1 + beta'alpha must lie inside the unit circle for both loadings");
  }
  for (double m : c.magnitudes) {
    if (!(m >= 0.0)) throw PreconditionError("magnitudes must be nonnegative");
  }
}

struct Bracket {
  double lo;
  double hi;
};

struct Found {
  double angle;
  double g;
  int iterations;
};

Found bisect(const TransitoryConfig& c, double m, double lo, double glo, double hi) {
  const double target = c.tol * (1.0 + m);
  Found f{lo, glo, 0};
  for (int it = 1; it <= 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = transitory_residual(c, m * Vec{{std::cos(mid), std::sin(mid)}});
    f = {mid, gm, it};
    if (std::isnan(gm) || std::abs(gm) <= target || hi - lo < 1e-15) return f;
    if ((gm > 0) == (glo > 0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return f;
}

}  // namespace

Vec transitory_loading(const TransitoryConfig& config, double x) {
  const double lambda = 2.0 * std::abs(normal_cdf(x) - 0.5);
  return (1.0 - lambda) * config.alpha_inner + lambda * config.alpha_outer;
}

double transitory_residual(const TransitoryConfig& config, const Vec& u) {
  const Vec beta_perp = Vec{{-config.beta(1), config.beta(0)}}.normalized();
  Vec z = u;  // z_{tau-1} = 0, so z_tau = u.
  const double stop = config.tol * 1e-3;
  for (int t = 0; t < config.horizon; ++t) {
    const double x = config.beta.dot(z);
    if (std::abs(x) <= stop) return beta_perp.dot(z);
    z += transitory_loading(config, x) * x;
  }
  return kNaN;
}

TransitoryCurve transitory_direction_curve(const TransitoryConfig& config) {
  validate(config);
  const double inner_angle = std::atan2(config.alpha_inner(1), config.alpha_inner(0));
  const double outer_angle = std::atan2(config.alpha_outer(1), config.alpha_outer(0));

  TransitoryCurve curve;
  for (double m : config.magnitudes) {
    curve.magnitudes.push_back(m);
    std::vector<TransitoryRoot> roots;
    int iterations = 0;
    if (m == 0.0) {
      roots.push_back({inner_angle, config.alpha_inner(1) / config.alpha_inner(0), 0});
    } else {
      auto g = [&](double phi) { return transitory_residual(config, m * Vec{{std::cos(phi), std::sin(phi)}}); };
      Bracket b{std::min(inner_angle, outer_angle), std::max(inner_angle, outer_angle)};
      // Scan the bracket for sign changes; widen by 0.2 rad per side while none appear.
      for (int widen = 0; widen <= 5 && roots.empty(); ++widen) {
        if (widen > 0) {
          b.lo -= 0.2;
          b.hi += 0.2;
        }
        constexpr int kScan = 64;
        double prev_phi = b.lo;
        double prev_g = g(prev_phi);
        for (int s = 1; s <= kScan; ++s) {
          const double phi = b.lo + (b.hi - b.lo) * s / kScan;
          const double gp = g(phi);
          if (std::isnan(prev_g) || std::isnan(gp)) {
            prev_phi = phi;
            prev_g = gp;
            continue;
          }
          if (prev_g == 0.0) {
            roots.push_back({prev_phi, std::tan(prev_phi), 0});
          } else if ((prev_g > 0) != (gp > 0) && gp != 0.0) {
            const Found f = bisect(config, m, prev_phi, prev_g, phi);
            iterations += f.iterations;
            if (!std::isnan(f.g) && std::abs(f.g) <= config.tol * (1.0 + m)) {
              roots.push_back({f.angle, std::tan(f.angle), f.iterations});
            }
          }
          prev_phi = phi;
          prev_g = gp;
        }
        if (!std::isnan(prev_g) && prev_g == 0.0) roots.push_back({prev_phi, std::tan(prev_phi), 0});
      }
    }
    curve.converged.push_back(!roots.empty());
    curve.ratios.push_back(roots.empty() ? kNaN : roots.front().ratio);
    curve.iterations.push_back(iterations);
    curve.roots.push_back(std::move(roots));
  }
  return curve;
}

}  // namespace nlvar
