#pragma once

#include "nlvar/gjrt.hpp"

#include <vector>

namespace nlvar {

/// Points chi^{-1}(w, -mu) of the attractor for each w (length q).
struct AttractorSample {
  std::vector<Vec> grid;
  std::vector<Vec> points;
};

/// Throws StationaryModel when r = p.
AttractorSample attractor_points(const ModelSpec& model, const MembershipReport& report,
                                 const std::vector<Vec>& grid);

/// Deterministic limit after a final shock u from the window `state`
/// (state[0] = z_0, ..., state[k-1] = z_{1-k}):
/// chi^{-1}(alpha_perp' (hbar(state) + u), -mu).
Vec z_infinity(const ModelSpec& model, const MembershipReport& report, const Vec& u, std::span<const Vec> state);

/// The affine set of final shocks whose limit is z: span alpha + offset.
struct AffineSubspace {
  Mat basis;
  Vec offset;
};

/// Throws NotOnAttractor unless |theta(z) + mu| <= 1e-8.
AffineSubspace domain_of_attraction(const ModelSpec& model, const MembershipReport& report, const Vec& z,
                                    std::span<const Vec> state);

struct MultiplierResult {
  Vec z;
  Mat theta_inf;
  int rank = 0;
  /// Orthonormal basis of the kernel of theta_inf (contains span alpha).
  Mat kernel_basis;
  /// False on regime boundaries, where the limit map has no derivative.
  bool differentiable = true;
};

/// Theta_inf(z) = X(z)^{-1} [I_q; 0] alpha_perp' with X the Jacobian of chi
/// at z. Points within 1e-7 (1 + |z|) of a regime boundary are reported as
/// non-differentiable with the one-regime matrix of the lowest accepting
/// regime. A singular Jacobian yields a rank-deficient result, not an error.
/// Throws NotOnAttractor unless |theta(z) + mu| <= 1e-8.
MultiplierResult longrun_multipliers(const ModelSpec& model, const MembershipReport& report, const Vec& z);

/// Orthogonal p x p matrix whose first m columns are the first m columns of
/// alpha, completed to an orthonormal basis. Requires 1 <= m <= r.
Mat lr_identify_construct(const MembershipReport& report, int m);

struct IdentificationCheck {
  bool ok = false;
  double residual = 0.0;
};

/// residual = |alpha_perp' upsilon[:, :m]|; throws NotOrthogonal when
/// upsilon is not orthogonal within tol.
IdentificationCheck lr_identify_check(const MembershipReport& report, const Mat& upsilon, int m, double tol);

/// Smooth-transition model of the CRSC-violation experiment:
/// Delta z_t = a(beta'z_{t-1}) beta'z_{t-1} + u_t, with loadings moving from
/// alpha_inner near beta'z = 0 to alpha_outer as |beta'z| grows, weighted by
/// Lambda(x) = 2 |N(x) - 1/2|.
struct TransitoryConfig {
  Vec alpha_inner;
  Vec alpha_outer;
  Vec beta;
  std::vector<double> magnitudes;
  /// Step cap for the limit simulation.
  int horizon = 100000;
  double tol = 1e-9;
};

struct TransitoryRoot {
  double angle = 0.0;
  double ratio = 0.0;
  int iterations = 0;
};

struct TransitoryCurve {
  std::vector<double> magnitudes;
  /// delta_2 / delta_1 of the first root found (NaN when none).
  std::vector<double> ratios;
  std::vector<int> iterations;
  std::vector<bool> converged;
  /// Every root located for each magnitude.
  std::vector<std::vector<TransitoryRoot>> roots;
};

/// Loading a(x) of the experiment model.
Vec transitory_loading(const TransitoryConfig& config, double x);

/// beta_perp coordinate of the zero-shock limit from z_0 = u; NaN when the
/// limit is not reached within the horizon.
double transitory_residual(const TransitoryConfig& config, const Vec& u);

TransitoryCurve transitory_direction_curve(const TransitoryConfig& config);

}  // namespace nlvar
