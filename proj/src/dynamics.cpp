#include "nlvar/dynamics.hpp"

#include "nlvar/detail/overloaded.hpp"
#include "nlvar/detail/piecewise_inverse.hpp"
#include "nlvar/errors.hpp"
#include "nlvar/linalg.hpp"

#include <Eigen/Cholesky>

#include <random>
#include <string>

namespace nlvar {

using detail::overloaded;

namespace {

Vec threshold_inverse(const ThresholdFamily& f, const Vec& y) {
  const Mat& phi_first = f.pieces[0][0].matrix;
  const double det_first = phi_first.determinant();
  const Vec b = phi_first.transpose().partialPivLu().solve(f.a);
  const double by = b.dot(y);
  RegimeIndex l = 0;
  for (; l < f.tau.size(); ++l) {
    const AffinePiece& piece = f.pieces[0][l];
    const double nu = piece.matrix.determinant() / det_first * f.tau[l] + b.dot(piece.offset);
    if (by <= nu) break;
  }
  const AffinePiece& piece = f.pieces[0][l];
  return piece.matrix.partialPivLu().solve(y - piece.offset);
}

Vec piecewise_f0_inverse(const ModelSpec& model, const Vec& y) {
  return detail::piecewise_inverse(
      model.regime_count(),
      [&](RegimeIndex l) -> Vec {
        return model.piece_matrix(0, l).partialPivLu().solve(y - model.piece_offset(0, l));
      },
      [&](RegimeIndex l, const Vec& z) { return regime_margin(model, l, z); }, "f_0");
}

void require_vec(const Vec& v, int p, const char* what) {
  if (v.size() != p) throw DimensionMismatch(std::string(what) + " must have length p");
}

}  // namespace

Vec f0_inverse(const ModelSpec& model, const Vec& y) {
  require_vec(y, model.p(), "y");
  return std::visit(overloaded{
                        [&](const LinearFamily& f) -> Vec { return f.phi[0].partialPivLu().solve(y); },
                        [&](const ThresholdFamily& f) -> Vec { return threshold_inverse(f, y); },
                        [&](const ConicFamily&) -> Vec { return piecewise_f0_inverse(model, y); },
                        [&](const SmoothedFamily& f) -> Vec {
                          // Phi_0 is common, so the smoothed f_0 is the affine map of regime 0.
                          const AffinePiece& piece = f.base.pieces[0][0];
                          return piece.matrix.partialPivLu().solve(y - piece.offset);
                        },
                    },
                    model.family());
}

Vec f0_inverse_search(const ModelSpec& model, const Vec& y) {
  require_vec(y, model.p(), "y");
  if (!model.is_piecewise()) return f0_inverse(model, y);
  return piecewise_f0_inverse(model, y);
}

Vec PathResult::z(int t) const {
  if (t >= 1) {
    if (t > T()) throw PreconditionError("period beyond the end of the path");
    return path.row(t - 1).transpose();
  }
  if (-t >= window0.rows()) throw PreconditionError("period before the initial window");
  return window0.row(-t).transpose();
}

std::vector<Vec> PathResult::window(int t, int n) const {
  std::vector<Vec> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(z(t - i));
  return out;
}

Mat gaussian_shocks(const Mat& sigma, int T, std::uint64_t seed) {
  if (sigma.rows() != sigma.cols()) throw DimensionMismatch("sigma must be square");
  if (T < 1) throw PreconditionError("T must be >= 1");
  if ((sigma - sigma.transpose()).norm() > 1e-12 * (1.0 + sigma.norm())) {
    throw NotPositiveDefinite("sigma is not symmetric");
  }
  Eigen::LLT<Mat> llt(sigma);
  if (llt.info() != Eigen::Success) throw NotPositiveDefinite("sigma is not positive definite");
  const Mat chol = llt.matrixL();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto p = sigma.rows();
  Mat out(T, p);
  Vec e(p);
  for (int t = 0; t < T; ++t) {
    for (Eigen::Index j = 0; j < p; ++j) e(j) = normal(rng);
    out.row(t) = (chol * e).transpose();
  }
  return out;
}

PathResult simulate(const ModelSpec& model, const Mat& window0, const ShockPlan& shocks,
                    const std::optional<Mat>& upsilon) {
  const int p = model.p();
  const int k = model.k();
  if (window0.rows() != k || window0.cols() != p) throw DimensionMismatch("initial window must be k x p");
  if (upsilon) {
    if (upsilon->rows() != p || upsilon->cols() != p) throw DimensionMismatch("upsilon must be p x p");
    if (!linalg::is_orthogonal(*upsilon, 1e-10)) throw NotOrthogonal("upsilon is not orthogonal");
  }

  Mat draws = std::visit(overloaded{
                             [&](const GivenShocks& s) -> Mat {
                               if (s.u.cols() != p) throw DimensionMismatch("shocks must have p columns");
                               if (s.u.rows() < 1) throw PreconditionError("need at least one shock");
                               return s.u;
                             },
                             [&](const GaussianShocks& s) -> Mat {
                               if (s.sigma.rows() != p) throw DimensionMismatch("sigma must be p x p");
                               return gaussian_shocks(s.sigma, s.T, s.seed);
                             },
                             [&](const ImpulseThenZero& s) -> Mat {
                               require_vec(s.u, p, "impulse");
                               if (s.T < 1) throw PreconditionError("T must be >= 1");
                               if (s.tau < 1 || s.tau > s.T) throw PreconditionError("impulse period outside 1..T");
                               Mat m = Mat::Zero(s.T, p);
                               m.row(s.tau - 1) = s.u.transpose();
                               return m;
                             },
                         },
                         shocks);
  if (upsilon) draws = draws * upsilon->transpose();

  PathResult res;
  res.window0 = window0;
  res.shocks = draws;
  res.path = Mat::Zero(draws.rows(), p);
  for (int t = 1; t <= res.T(); ++t) {
    Vec y = model.c() + draws.row(t - 1).transpose();
    for (int i = 1; i <= k; ++i) y += eval_f(model, i, res.z(t - i));
    try {
      res.path.row(t - 1) = f0_inverse(model, y).transpose();
    } catch (const NoRegimeAccepts& e) {
      throw NoRegimeAccepts(std::string(e.what()) + " at t = " + std::to_string(t));
    }
  }
  return res;
}

double path_residual(const ModelSpec& model, const PathResult& result) {
  double worst = 0.0;
  for (int t = 1; t <= result.T(); ++t) {
    const Vec zt = result.z(t);
    Vec r = eval_f(model, 0, zt) - model.c() - result.shocks.row(t - 1).transpose();
    for (int i = 1; i <= model.k(); ++i) r -= eval_f(model, i, result.z(t - i));
    worst = std::max(worst, r.norm() / (1.0 + zt.norm()));
  }
  return worst;
}

}  // namespace nlvar
