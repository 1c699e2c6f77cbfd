#include "nlvar/model.hpp"

#include "nlvar/detail/overloaded.hpp"
#include "nlvar/errors.hpp"
#include "nlvar/linalg.hpp"
#include "nlvar/normal.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace nlvar {

namespace {

using detail::overloaded;

void require_square(const Mat& m, int p, const std::string& what) {
  if (m.rows() != p || m.cols() != p) {
    std::ostringstream os;
    os << what << " must be " << p << "x" << p << ", got " << m.rows() << "x" << m.cols();
    throw DimensionMismatch(os.str());
  }
}

void require_length(const Vec& v, int p, const std::string& what) {
  if (v.size() != p) {
    std::ostringstream os;
    os << what << " must have length " << p << ", got " << v.size();
    throw DimensionMismatch(os.str());
  }
}

void validate_threshold(const ThresholdFamily& f, int p, int k) {
  require_length(f.a, p, "threshold direction a");
  if (f.a.norm() == 0.0) throw PreconditionError("threshold direction a must be nonzero");
  for (std::size_t j = 1; j < f.tau.size(); ++j) {
    if (!(f.tau[j - 1] < f.tau[j])) throw PreconditionError("thresholds must be strictly increasing");
  }
  for (double t : f.tau) {
    if (!std::isfinite(t)) throw PreconditionError("thresholds must be finite");
  }
  if (f.pieces.size() != static_cast<std::size_t>(k + 1)) {
    throw DimensionMismatch("threshold family needs one piece set per lag 0..k");
  }
  for (int i = 0; i <= k; ++i) {
    if (f.pieces[i].size() != f.regime_count()) {
      throw DimensionMismatch("lag " + std::to_string(i) + " must have one piece per regime");
    }
    for (std::size_t l = 0; l < f.pieces[i].size(); ++l) {
      const std::string where = "lag " + std::to_string(i) + " regime " + std::to_string(l);
      require_length(f.pieces[i][l].offset, p, where + " offset");
      require_square(f.pieces[i][l].matrix, p, where + " matrix");
    }
  }
}

void validate_conic(const ConicFamily& f, int p, int k) {
  require_square(f.basis, p, "cone basis");
  if (p > 20) throw PreconditionError("conic families support p <= 20");
  if (linalg::numerical_rank(f.basis, 1e-12) != p) {
    throw PreconditionError("cone basis must span R^p");
  }
  if (f.regimes == 0) throw PreconditionError("conic family needs at least one regime");
  if (f.regime_of_cone.size() != (std::size_t{1} << p)) {
    throw DimensionMismatch("regime_of_cone must cover all 2^p sign patterns");
  }
  for (RegimeIndex l : f.regime_of_cone) {
    if (l >= f.regimes) throw PreconditionError("regime_of_cone entry out of range");
  }
  if (f.matrices.size() != static_cast<std::size_t>(k + 1)) {
    throw DimensionMismatch("conic family needs one matrix set per lag 0..k");
  }
  for (int i = 0; i <= k; ++i) {
    if (f.matrices[i].size() != f.regimes) {
      throw DimensionMismatch("lag " + std::to_string(i) + " must have one matrix per regime");
    }
    for (const Mat& m : f.matrices[i]) require_square(m, p, "lag " + std::to_string(i) + " matrix");
  }
}

// P(lo < X <= hi) for X standard normal, evaluated on the tail that avoids
// cancellation.
double band_probability(double lo, double hi) {
  if (lo > 0.0) return normal_cdf(-lo) - normal_cdf(-hi);
  return normal_cdf(hi) - normal_cdf(lo);
}

double pdf_or_zero(double x) { return std::isfinite(x) ? normal_pdf(x) : 0.0; }

constexpr double kInf = std::numeric_limits<double>::infinity();

std::pair<double, double> band(const ThresholdFamily& f, RegimeIndex l) {
  const double lo = l == 0 ? -kInf : f.tau[l - 1];
  const double hi = l == f.tau.size() ? kInf : f.tau[l];
  return {lo, hi};
}

RegimeIndex threshold_regime(const ThresholdFamily& f, const Vec& z) {
  const double x = f.a.dot(z);
  // First l with x <= tau_l; the band (tau_{l-1}, tau_l] owns its upper end.
  RegimeIndex l = 0;
  while (l < f.tau.size() && x > f.tau[l]) ++l;
  return l;
}

Vec smoothed_eval(const SmoothedFamily& f, int lag, const Vec& z) {
  const ThresholdFamily& base = f.base;
  const double anorm = base.a.norm();
  const double s = f.sigma * anorm;
  const double x = base.a.dot(z);
  Vec out = Vec::Zero(z.size());
  for (RegimeIndex l = 0; l < base.regime_count(); ++l) {
    auto [lo, hi] = band(base, l);
    const double lo_std = (lo - x) / s;
    const double hi_std = (hi - x) / s;
    const double w = band_probability(lo_std, hi_std);
    const Vec first_moment = base.a * (s * (pdf_or_zero(lo_std) - pdf_or_zero(hi_std)) / (anorm * anorm));
    const AffinePiece& piece = base.pieces[lag][l];
    out += piece.offset * w + piece.matrix * (z * w + first_moment);
  }
  return out;
}

}  // namespace

std::size_t ModelSpec::regime_count() const {
  return std::visit(overloaded{
                        [](const LinearFamily&) -> std::size_t { return 1; },
                        [](const ThresholdFamily& f) { return f.regime_count(); },
                        [](const ConicFamily& f) { return f.regimes; },
                        [](const SmoothedFamily& f) { return f.base.regime_count(); },
                    },
                    family_);
}

Vec ModelSpec::piece_offset(int lag, RegimeIndex l) const {
  return std::visit(overloaded{
                        [&](const LinearFamily&) -> Vec { return Vec::Zero(p_); },
                        [&](const ThresholdFamily& f) -> Vec { return f.pieces[lag][l].offset; },
                        [&](const ConicFamily&) -> Vec { return Vec::Zero(p_); },
                        [&](const SmoothedFamily& f) -> Vec { return f.base.pieces[lag][l].offset; },
                    },
                    family_);
}

const Mat& ModelSpec::piece_matrix(int lag, RegimeIndex l) const {
  return std::visit(overloaded{
                        [&](const LinearFamily& f) -> const Mat& { return f.phi[lag]; },
                        [&](const ThresholdFamily& f) -> const Mat& { return f.pieces[lag][l].matrix; },
                        [&](const ConicFamily& f) -> const Mat& { return f.matrices[lag][l]; },
                        [&](const SmoothedFamily& f) -> const Mat& { return f.base.pieces[lag][l].matrix; },
                    },
                    family_);
}

ModelSpec make_model(int p, int k, Vec c, Family family) {
  if (p < 1) throw PreconditionError("p must be >= 1");
  if (k < 1) throw PreconditionError("k must be >= 1");
  require_length(c, p, "intercept c");
  std::visit(overloaded{
                 [&](const LinearFamily& f) {
                   if (f.phi.size() != static_cast<std::size_t>(k + 1)) {
                     throw DimensionMismatch("linear family needs k+1 matrices Phi_0..Phi_k");
                   }
                   for (std::size_t i = 0; i < f.phi.size(); ++i) {
                     require_square(f.phi[i], p, "Phi_" + std::to_string(i));
                   }
                 },
                 [&](const ThresholdFamily& f) { validate_threshold(f, p, k); },
                 [&](const ConicFamily& f) { validate_conic(f, p, k); },
                 [&](const SmoothedFamily& f) {
                   validate_threshold(f.base, p, k);
                   if (!(f.sigma > 0.0) || !std::isfinite(f.sigma)) {
                     throw PreconditionError("smoothing width sigma must be positive");
                   }
                   const Mat& phi0 = f.base.pieces[0][0].matrix;
                   const double scale = 1e-12 * (1.0 + phi0.cwiseAbs().maxCoeff());
                   for (const AffinePiece& piece : f.base.pieces[0]) {
                     if ((piece.matrix - phi0).cwiseAbs().maxCoeff() > scale) {
                       throw PreconditionError("smoothed family requires a common Phi_0 across regimes");
                     }
                   }
                 },
             },
             family);
  ModelSpec m;
  m.p_ = p;
  m.k_ = k;
  m.c_ = std::move(c);
  m.family_ = std::move(family);
  return m;
}

namespace {

bool same(const Mat& a, const Mat& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

bool same_threshold(const ThresholdFamily& a, const ThresholdFamily& b) {
  if (!same(a.a, b.a) || a.tau != b.tau || a.pieces.size() != b.pieces.size()) return false;
  for (std::size_t i = 0; i < a.pieces.size(); ++i) {
    if (a.pieces[i].size() != b.pieces[i].size()) return false;
    for (std::size_t l = 0; l < a.pieces[i].size(); ++l) {
      if (!same(a.pieces[i][l].offset, b.pieces[i][l].offset) ||
          !same(a.pieces[i][l].matrix, b.pieces[i][l].matrix)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

bool operator==(const ModelSpec& lhs, const ModelSpec& rhs) {
  if (lhs.p() != rhs.p() || lhs.k() != rhs.k() || !same(lhs.c(), rhs.c())) return false;
  if (lhs.family().index() != rhs.family().index()) return false;
  return std::visit(
      overloaded{
          [&](const LinearFamily& a) {
            const auto& b = std::get<LinearFamily>(rhs.family());
            if (a.phi.size() != b.phi.size()) return false;
            for (std::size_t i = 0; i < a.phi.size(); ++i) {
              if (!same(a.phi[i], b.phi[i])) return false;
            }
            return true;
          },
          [&](const ThresholdFamily& a) { return same_threshold(a, std::get<ThresholdFamily>(rhs.family())); },
          [&](const ConicFamily& a) {
            const auto& b = std::get<ConicFamily>(rhs.family());
            if (!same(a.basis, b.basis) || a.regime_of_cone != b.regime_of_cone || a.regimes != b.regimes ||
                a.matrices.size() != b.matrices.size()) {
              return false;
            }
            for (std::size_t i = 0; i < a.matrices.size(); ++i) {
              if (a.matrices[i].size() != b.matrices[i].size()) return false;
              for (std::size_t l = 0; l < a.matrices[i].size(); ++l) {
                if (!same(a.matrices[i][l], b.matrices[i][l])) return false;
              }
            }
            return true;
          },
          [&](const SmoothedFamily& a) {
            const auto& b = std::get<SmoothedFamily>(rhs.family());
            return a.sigma == b.sigma && same_threshold(a.base, b.base);
          },
      },
      lhs.family());
}

unsigned cone_of(const ConicFamily& family, const Vec& z) {
  const Vec proj = family.basis.transpose() * z;
  unsigned mask = 0;
  for (Eigen::Index j = 0; j < proj.size(); ++j) {
    if (proj(j) >= 0.0) mask |= 1u << j;
  }
  return mask;
}

RegimeIndex regime_of(const ModelSpec& model, const Vec& z) {
  require_length(z, model.p(), "z");
  return std::visit(overloaded{
                        [&](const ThresholdFamily& f) { return threshold_regime(f, z); },
                        [&](const ConicFamily& f) { return f.regime_of_cone[cone_of(f, z)]; },
                        [&](const auto&) -> RegimeIndex {
                          throw FamilyMismatch("regime_of requires a threshold or conic family, got " +
                                               family_name(model));
                        },
                    },
                    model.family());
}

double regime_margin(const ThresholdFamily& family, RegimeIndex l, const Vec& z) {
  const double anorm = family.a.norm();
  const double x = family.a.dot(z);
  auto [lo, hi] = band(family, l);
  return std::min((x - lo) / anorm, (hi - x) / anorm);
}

double regime_margin(const ConicFamily& family, RegimeIndex l, const Vec& z) {
  const auto p = family.basis.cols();
  Vec proj = family.basis.transpose() * z;
  for (Eigen::Index j = 0; j < p; ++j) proj(j) /= family.basis.col(j).norm();
  // A regime may be a union of cones; take the best cone.
  double best = -kInf;
  for (unsigned mask = 0; mask < family.regime_of_cone.size(); ++mask) {
    if (family.regime_of_cone[mask] != l) continue;
    double m = kInf;
    for (Eigen::Index j = 0; j < p; ++j) m = std::min(m, (mask >> j) & 1u ? proj(j) : -proj(j));
    best = std::max(best, m);
  }
  return best;
}

double regime_margin(const ModelSpec& model, RegimeIndex l, const Vec& z) {
  require_length(z, model.p(), "z");
  if (l >= model.regime_count()) throw PreconditionError("regime index out of range");
  return std::visit(overloaded{
                        [&](const ThresholdFamily& f) { return regime_margin(f, l, z); },
                        [&](const ConicFamily& f) { return regime_margin(f, l, z); },
                        [&](const SmoothedFamily& f) { return regime_margin(f.base, l, z); },
                        [&](const LinearFamily&) -> double {
                          throw FamilyMismatch("regime_margin requires a piecewise family");
                        },
                    },
                    model.family());
}

namespace {

void threshold_continuity(const ThresholdFamily& f, double tol, std::vector<ContinuityViolation>& out) {
  const double aa = f.a.squaredNorm();
  for (std::size_t i = 0; i < f.pieces.size(); ++i) {
    for (RegimeIndex l = 1; l < f.regime_count(); ++l) {
      const Mat dmat = f.pieces[i][l].matrix - f.pieces[i][l - 1].matrix;
      const Vec n = dmat * f.a / aa;
      const double matrix_defect = linalg::spectral_norm(dmat - n * f.a.transpose());
      const double offset_defect = (f.pieces[i][l].offset - f.pieces[i][l - 1].offset + n * f.tau[l - 1]).norm();
      if (matrix_defect > tol || offset_defect > tol) {
        out.push_back({static_cast<int>(i), l - 1, l - 1, l, matrix_defect, offset_defect});
      }
    }
  }
}

void conic_continuity(const ConicFamily& f, double tol, std::vector<ContinuityViolation>& out) {
  const Eigen::Index p = f.basis.rows();
  const unsigned masks = 1u << p;
  for (std::size_t i = 0; i < f.matrices.size(); ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      const Vec aj = f.basis.col(j);
      const Mat proj = Mat::Identity(p, p) - aj * aj.transpose() / aj.squaredNorm();
      for (unsigned mask = 0; mask < masks; ++mask) {
        if (mask & (1u << j)) continue;  // visit each adjacent pair once
        const RegimeIndex lo = f.regime_of_cone[mask];
        const RegimeIndex hi = f.regime_of_cone[mask | (1u << j)];
        if (lo == hi) continue;
        // Restricted to the facet a_j'z = 0 the two matrices must agree.
        const double defect = linalg::spectral_norm((f.matrices[i][hi] - f.matrices[i][lo]) * proj);
        if (defect > tol) {
          out.push_back({static_cast<int>(i), static_cast<std::size_t>(j), lo, hi, defect, 0.0});
        }
      }
    }
  }
}

}  // namespace

std::vector<ContinuityViolation> validate_continuity(const ModelSpec& model, double tol) {
  std::vector<ContinuityViolation> out;
  std::visit(overloaded{
                 [](const LinearFamily&) {},
                 [&](const ThresholdFamily& f) { threshold_continuity(f, tol, out); },
                 [&](const ConicFamily& f) { conic_continuity(f, tol, out); },
                 [&](const SmoothedFamily& f) { threshold_continuity(f.base, tol, out); },
             },
             model.family());
  return out;
}

Vec eval_f(const ModelSpec& model, int lag, const Vec& z) {
  if (lag < 0 || lag > model.k()) throw PreconditionError("lag index out of range");
  require_length(z, model.p(), "z");
  return std::visit(overloaded{
                        [&](const LinearFamily& f) -> Vec { return f.phi[lag] * z; },
                        [&](const ThresholdFamily& f) -> Vec {
                          const AffinePiece& piece = f.pieces[lag][threshold_regime(f, z)];
                          return piece.offset + piece.matrix * z;
                        },
                        [&](const ConicFamily& f) -> Vec {
                          return f.matrices[lag][f.regime_of_cone[cone_of(f, z)]] * z;
                        },
                        [&](const SmoothedFamily& f) -> Vec { return smoothed_eval(f, lag, z); },
                    },
                    model.family());
}

Vec smoothed_weights(const SmoothedFamily& f, const Vec& z) {
  const double s = f.sigma * f.base.a.norm();
  const double x = f.base.a.dot(z);
  Vec w(f.base.regime_count());
  for (RegimeIndex l = 0; l < f.base.regime_count(); ++l) {
    auto [lo, hi] = band(f.base, l);
    w(l) = band_probability((lo - x) / s, (hi - x) / s);
  }
  return w;
}

Mat jacobian_f(const ModelSpec& model, int lag, const Vec& z) {
  if (lag < 0 || lag > model.k()) throw PreconditionError("lag index out of range");
  require_length(z, model.p(), "z");
  return std::visit(overloaded{
                        [&](const LinearFamily& f) -> Mat { return f.phi[lag]; },
                        [&](const ThresholdFamily& f) -> Mat {
                          return f.pieces[lag][threshold_regime(f, z)].matrix;
                        },
                        [&](const ConicFamily& f) -> Mat {
                          return f.matrices[lag][f.regime_of_cone[cone_of(f, z)]];
                        },
                        [&](const SmoothedFamily& f) -> Mat {
                          const Vec w = smoothed_weights(f, z);
                          Mat out = Mat::Zero(model.p(), model.p());
                          for (RegimeIndex l = 0; l < f.base.regime_count(); ++l) {
                            out += w(l) * f.base.pieces[lag][l].matrix;
                          }
                          return out;
                        },
                    },
                    model.family());
}

std::string family_name(const ModelSpec& model) {
  return std::visit(overloaded{
                        [](const LinearFamily&) { return std::string("linear"); },
                        [](const ThresholdFamily&) { return std::string("threshold"); },
                        [](const ConicFamily&) { return std::string("conic"); },
                        [](const SmoothedFamily&) { return std::string("smoothed"); },
                    },
                    model.family());
}

}  // namespace nlvar
