#include "nlvar/longrun.hpp"

#include "nlvar/errors.hpp"
#include "nlvar/linalg.hpp"

#include <string>

namespace nlvar {

namespace {

void require_on_attractor(const ModelSpec& model, const MembershipReport& report, const Vec& z) {
  if (z.size() != model.p()) throw DimensionMismatch("z must have length p");
  const double gap = (chi(model, report, z).theta + report.mu).norm();
  if (gap > 1e-8) {
    throw NotOnAttractor("point is off the attractor: |theta(z) + mu| = " + std::to_string(gap));
  }
}

}  // namespace

AttractorSample attractor_points(const ModelSpec& model, const MembershipReport& report,
                                 const std::vector<Vec>& grid) {
  require_member(report);
  if (report.stationary) throw StationaryModel("r = p: the model has no attractor manifold");
  AttractorSample s;
  for (const Vec& w : grid) {
    if (w.size() != report.q) throw DimensionMismatch("grid values must have length q");
    Vec y(model.p());
    y << w, -report.mu;
    s.grid.push_back(w);
    s.points.push_back(chi_inverse(model, report, y));
  }
  return s;
}

Vec z_infinity(const ModelSpec& model, const MembershipReport& report, const Vec& u, std::span<const Vec> state) {
  require_member(report);
  if (u.size() != model.p()) throw DimensionMismatch("u must have length p");
  Vec y(model.p());
  y << report.alpha_perp.transpose() * (hbar(model, state) + u), -report.mu;
  return chi_inverse(model, report, y);
}

AffineSubspace domain_of_attraction(const ModelSpec& model, const MembershipReport& report, const Vec& z,
                                    std::span<const Vec> state) {
  require_member(report);
  require_on_attractor(model, report, z);
  return {report.alpha, h_eval(model, z) - hbar(model, state)};
}

MultiplierResult longrun_multipliers(const ModelSpec& model, const MembershipReport& report, const Vec& z) {
  require_member(report);
  require_on_attractor(model, report, z);
  const int p = model.p();
  const int q = report.q;

  MultiplierResult res;
  res.z = z;
  Mat x;
  if (model.is_piecewise()) {
    const double band = 1e-7 * (1.0 + z.norm());
    const std::vector<AffineMap> pieces = chi_pieces(model, report);
    int accepting = 0;
    for (RegimeIndex l = 0; l < model.regime_count(); ++l) {
      if (regime_margin(model, l, z) > -band) {
        if (accepting == 0) x = pieces[l].matrix;
        ++accepting;
      }
    }
    if (accepting == 0) x = pieces[regime_of(model, z)].matrix;
    res.differentiable = accepting <= 1;
  } else {
    x = chi_jacobian(model, report, z);
  }

  Mat selector = Mat::Zero(p, p);
  selector.topRows(q) = report.alpha_perp.transpose();
  res.theta_inf = x.completeOrthogonalDecomposition().solve(selector);
  res.rank = static_cast<int>(linalg::numerical_rank(res.theta_inf, 1e-9));
  res.kernel_basis = linalg::null_space(res.theta_inf, 1e-9);
  return res;
}

Mat lr_identify_construct(const MembershipReport& report, int m) {
  if (m < 1 || m > report.r) {
    throw PreconditionError("m must lie in 1..r (r = " + std::to_string(report.r) + ")");
  }
  Mat u(report.p, report.p);
  u << report.alpha, report.alpha_perp;
  return u;
}

IdentificationCheck lr_identify_check(const MembershipReport& report, const Mat& upsilon, int m, double tol) {
  if (upsilon.rows() != report.p || upsilon.cols() != report.p) throw DimensionMismatch("upsilon must be p x p");
  if (m < 1 || m > report.p) throw PreconditionError("m must lie in 1..p");
  if (!linalg::is_orthogonal(upsilon, tol)) throw NotOrthogonal("upsilon is not orthogonal");
  IdentificationCheck c;
  c.residual = report.q == 0 ? 0.0 : linalg::spectral_norm(report.alpha_perp.transpose() * upsilon.leftCols(m));
  c.ok = c.residual <= tol;
  return c;
}

}  // namespace nlvar
