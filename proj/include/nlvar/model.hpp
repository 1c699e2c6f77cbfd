#pragma once

#include "nlvar/types.hpp"

#include <string>
#include <variant>
#include <vector>

namespace nlvar {

/// f_i(z) = Phi_i z for i = 0..k.
struct LinearFamily {
  std::vector<Mat> phi;
};

struct AffinePiece {
  Vec offset;
  Mat matrix;
};

/// Regimes are the bands {z : a'z in (tau_{l-1}, tau_l]} with tau_0 = -inf and
/// tau_L = +inf. pieces[i][l] is the affine map of lag i in regime l.
struct ThresholdFamily {
  Vec a;
  std::vector<double> tau;
  std::vector<std::vector<AffinePiece>> pieces;

  std::size_t regime_count() const { return tau.size() + 1; }
};

/// Piecewise linear map on the cones C_I = {a_j'z >= 0 for j in I, < 0
/// otherwise}. The cone of z is encoded as the bitmask with bit j set iff
/// a_j'z >= 0; regime_of_cone maps each of the 2^p masks to a regime.
/// matrices[i][l] is Phi_i in regime l. Offsets are zero.
struct ConicFamily {
  Mat basis;  // columns a_1..a_p
  std::vector<RegimeIndex> regime_of_cone;
  std::vector<std::vector<Mat>> matrices;
  std::size_t regimes = 0;
};

/// A threshold-affine family convolved with an isotropic Gaussian kernel of
/// standard deviation sigma per coordinate. Phi_0 must be common to all
/// regimes.
struct SmoothedFamily {
  ThresholdFamily base;
  double sigma = 1.0;
};

using Family = std::variant<LinearFamily, ThresholdFamily, ConicFamily, SmoothedFamily>;

/// Additively time-separable VAR(k): f_0(z_t) = c + sum_i f_i(z_{t-i}) + u_t.
/// Construct through make_model, which validates every invariant; the object
/// is immutable afterwards.
class ModelSpec {
 public:
  int p() const { return p_; }
  int k() const { return k_; }
  const Vec& c() const { return c_; }
  const Family& family() const { return family_; }

  bool is_linear() const { return std::holds_alternative<LinearFamily>(family_); }
  bool is_threshold() const { return std::holds_alternative<ThresholdFamily>(family_); }
  bool is_conic() const { return std::holds_alternative<ConicFamily>(family_); }
  bool is_smoothed() const { return std::holds_alternative<SmoothedFamily>(family_); }
  /// Threshold or conic: regime_of is defined.
  bool is_piecewise() const { return is_threshold() || is_conic(); }

  /// Number of affine regimes underlying the family (1 for Linear; the base
  /// band count for Smoothed).
  std::size_t regime_count() const;
  /// Affine piece of lag i in regime l. For Smoothed these are the pieces of
  /// the unsmoothed base.
  Vec piece_offset(int lag, RegimeIndex l) const;
  const Mat& piece_matrix(int lag, RegimeIndex l) const;

  friend ModelSpec make_model(int p, int k, Vec c, Family family);

 private:
  ModelSpec() = default;
  int p_ = 0;
  int k_ = 0;
  Vec c_;
  Family family_;
};

/// Validates dimensions and structural invariants (increasing thresholds,
/// complete cone map, common smoothed Phi_0, zero-at-origin for linear and
/// conic families). Throws DimensionMismatch, SchemaError or
/// PreconditionError. Continuity is checked separately with
/// validate_continuity.
ModelSpec make_model(int p, int k, Vec c, Family family);

bool operator==(const ModelSpec& lhs, const ModelSpec& rhs);

/// Region containing z; thresholds use half-open bands (tau_{l-1}, tau_l].
/// Throws FamilyMismatch for Linear and Smoothed models.
RegimeIndex regime_of(const ModelSpec& model, const Vec& z);

/// Bitmask of the cone containing z (bit j set iff a_j'z >= 0).
unsigned cone_of(const ConicFamily& family, const Vec& z);

/// How far z sits inside regime l, in units of distance to the regime's
/// bounding hyperplanes: positive in the interior, zero on the boundary,
/// negative outside. Smoothed models use their base bands; Linear throws
/// FamilyMismatch.
double regime_margin(const ModelSpec& model, RegimeIndex l, const Vec& z);
double regime_margin(const ThresholdFamily& family, RegimeIndex l, const Vec& z);
double regime_margin(const ConicFamily& family, RegimeIndex l, const Vec& z);

struct ContinuityViolation {
  int lag = 0;
  /// Threshold families: index of the boundary tau_{boundary}, 0-based.
  /// Conic families: index of the basis vector a_j normal to the facet.
  std::size_t boundary = 0;
  RegimeIndex lower = 0;
  RegimeIndex upper = 0;
  double matrix_defect = 0.0;
  double offset_defect = 0.0;
};

/// Empty when every f_i is continuous across regime boundaries at tol.
std::vector<ContinuityViolation> validate_continuity(const ModelSpec& model, double tol);

/// f_i(z) for lag i in 0..k. Smoothed families use the closed-form Gaussian
/// slab integral.
Vec eval_f(const ModelSpec& model, int lag, const Vec& z);

/// Derivative of f_i at z. For piecewise families this is the matrix of the
/// regime containing z; for Smoothed it is sum_l w_l(z) Phi_i^(l).
Mat jacobian_f(const ModelSpec& model, int lag, const Vec& z);

/// Gaussian slab weights w_l(z) = P(a'(z+u) in (tau_{l-1}, tau_l]) for the
/// smoothed family.
Vec smoothed_weights(const SmoothedFamily& family, const Vec& z);

std::string family_name(const ModelSpec& model);

}  // namespace nlvar
