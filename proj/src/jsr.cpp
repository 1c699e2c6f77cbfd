#include "nlvar/jsr.hpp"

#include "nlvar/errors.hpp"
#include "nlvar/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace nlvar {

namespace {

// Ellipsoidal norm |x|_P = |L'x| with P = L L' approximating an extremal
// norm: P solves P = I + mean_i(A_i' P A_i) / gamma^2, iterated from P = I
// and stopped early if the series diverges. Any positive definite P gives a
// valid induced norm, so this only affects tightness.
class EllipsoidNorm {
 public:
  EllipsoidNorm(std::span<const Mat> mats, double gamma) {
    const auto m = mats.front().rows();
    Mat p = Mat::Identity(m, m);
    const double scale = 1.0 / (static_cast<double>(mats.size()) * gamma * gamma);
    for (int it = 0; it < 200; ++it) {
      Mat next = Mat::Identity(m, m);
      for (const Mat& a : mats) next += scale * (a.transpose() * p * a);
      const double change = (next - p).norm() / next.norm();
      if (!std::isfinite(next.trace()) || next.trace() > 1e10 * static_cast<double>(m)) break;
      p = 0.5 * (next + next.transpose());
      if (change < 1e-13) break;
    }
    Eigen::LLT<Mat> llt(p);
    if (llt.info() != Eigen::Success) {
      lt_ = Mat::Identity(m, m);
      lt_inv_ = lt_;
      return;
    }
    lt_ = llt.matrixL().transpose();
    lt_inv_ = lt_.inverse();
  }

  double operator()(const Mat& b) const { return linalg::spectral_norm(lt_ * b * lt_inv_); }

 private:
  Mat lt_;
  Mat lt_inv_;
};

}  // namespace

JsrBracket jsr_bounds(std::span<const Mat> matrices, const JsrOptions& options) {
  if (matrices.empty()) throw PreconditionError("jsr_bounds needs a nonempty matrix set");
  if (options.depth < 1) throw PreconditionError("jsr depth must be >= 1");
  const auto dim = matrices.front().rows();
  for (const Mat& a : matrices) {
    if (a.rows() != dim || a.cols() != dim) throw DimensionMismatch("jsr matrices must share a square shape");
  }
  JsrBracket out;
  if (dim == 0) return out;

  // The JSR of a single matrix is its spectral radius exactly.
  std::vector<Mat> unique;
  for (const Mat& a : matrices) {
    if (std::none_of(unique.begin(), unique.end(), [&](const Mat& b) { return a == b; })) unique.push_back(a);
  }
  if (unique.size() == 1) {
    out.lower = out.upper = linalg::spectral_radius(unique.front());
    out.depth = 1;
    return out;
  }

  double rho_hat = 0.0;
  double norm_hat = 0.0;
  for (const Mat& a : matrices) {
    rho_hat = std::max(rho_hat, linalg::spectral_radius(a));
    norm_hat = std::max(norm_hat, linalg::spectral_norm(a));
  }
  if (norm_hat == 0.0) {
    out.depth = 1;
    return out;
  }

  std::optional<EllipsoidNorm> ellipsoid;
  if (options.precondition) ellipsoid.emplace(matrices, 1.05 * std::max(rho_hat, 1e-3 * norm_hat));

  const double inf = std::numeric_limits<double>::infinity();
  double lower = 0.0;
  double upper = inf;
  double cut_plain = 0.0;
  double cut_ellipsoid = 0.0;

  std::vector<Mat> level(matrices.begin(), matrices.end());
  for (int t = 1; t <= options.depth; ++t) {
    const double inv_t = 1.0 / t;
    std::vector<double> plain(level.size());
    std::vector<double> ellip(level.size());
    for (std::size_t n = 0; n < level.size(); ++n) {
      lower = std::max(lower, std::pow(linalg::spectral_radius(level[n]), inv_t));
      plain[n] = std::pow(linalg::spectral_norm(level[n]), inv_t);
      ellip[n] = ellipsoid ? std::pow((*ellipsoid)(level[n]), inv_t) : inf;
    }

    std::vector<Mat> live;
    double front_plain = 0.0;
    double front_ellipsoid = 0.0;
    for (std::size_t n = 0; n < level.size(); ++n) {
      const double bound = std::min(plain[n], ellip[n]);
      const bool prune =
          bound <= lower * (1.0 + 1e-12) || (options.target && bound < *options.target);
      if (prune) {
        cut_plain = std::max(cut_plain, plain[n]);
        cut_ellipsoid = std::max(cut_ellipsoid, ellip[n]);
      } else {
        front_plain = std::max(front_plain, plain[n]);
        front_ellipsoid = std::max(front_ellipsoid, ellip[n]);
        live.push_back(std::move(level[n]));
      }
    }
    const double level_upper =
        std::min(std::max(cut_plain, front_plain), std::max(cut_ellipsoid, front_ellipsoid));
    upper = std::min(upper, level_upper);
    out.depth = t;

    if (options.target && (upper < *options.target || lower >= *options.target)) break;
    if (live.empty() || t == options.depth) break;
    if (live.size() * matrices.size() > options.node_budget) {
      out.certified = false;
      break;
    }
    level.clear();
    level.reserve(live.size() * matrices.size());
    for (const Mat& prefix : live) {
      for (const Mat& a : matrices) level.push_back(prefix * a);
    }
  }
  out.lower = lower;
  out.upper = std::max(upper, lower);
  return out;
}

JsrDecision jsr_decision(std::span<const Mat> matrices, double rho_bar, int max_depth) {
  if (!(rho_bar > 0.0 && rho_bar <= 1.0)) throw PreconditionError("rho_bar must lie in (0, 1]");
  JsrOptions opts;
  opts.depth = max_depth;
  opts.target = rho_bar;
  JsrDecision d;
  d.bracket = jsr_bounds(matrices, opts);
  if (d.bracket.upper < rho_bar) {
    d.verdict = JsrVerdict::Below;
  } else if (d.bracket.lower >= rho_bar) {
    d.verdict = JsrVerdict::Above;
  } else {
    d.verdict = JsrVerdict::Inconclusive;
  }
  return d;
}

std::string to_string(JsrVerdict v) {
  switch (v) {
    case JsrVerdict::Below:
      return "Below";
    case JsrVerdict::Above:
      return "Above";
    case JsrVerdict::Inconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

}  // namespace nlvar
