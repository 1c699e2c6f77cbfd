#pragma once

#include "nlvar/dynamics.hpp"
#include "nlvar/membership.hpp"

#include <vector>

namespace nlvar {

/// psi(z) = alpha_perp' h(z) (common trend coordinate), theta(z) = alpha' pi(z)
/// (equilibrium error), with h(z) = f_0(z) - sum_{i=1}^{k-1} gamma_i(z).
struct ChiValue {
  Vec psi;
  Vec theta;

  /// (psi, theta) stacked.
  Vec stacked() const;
};

/// h(z) = f_0(z) - sum_{i=1}^{k-1} gamma_i(z).
Vec h_eval(const ModelSpec& model, const Vec& z);

/// Every chi operation requires a Member report and throws NotMember
/// otherwise.
ChiValue chi(const ModelSpec& model, const MembershipReport& report, const Vec& z);
Vec chi_vec(const ModelSpec& model, const MembershipReport& report, const Vec& z);
Mat chi_jacobian(const ModelSpec& model, const MembershipReport& report, const Vec& z);

/// chi restricted to affine regime l: offset + matrix z, with
/// matrix = [alpha_perp' H^(l); beta^(l)'] and offset = [alpha_perp' hbar^(l); mu_bar^(l)].
struct AffineMap {
  Vec offset;
  Mat matrix;
};
std::vector<AffineMap> chi_pieces(const ModelSpec& model, const MembershipReport& report);

/// Linear: solves the stacked linear system. Piecewise: per-regime candidate
/// accepted when it lies in its regime. Smoothed: damped Newton started from
/// the inverse of the unsmoothed base, stopping at |chi(z) - y| <=
/// 1e-10 (1 + |y|). Throws NoRegimeAccepts or NewtonDivergence.
Vec chi_inverse(const ModelSpec& model, const MembershipReport& report, const Vec& y);

/// Closed-form inverse for linear members:
/// z = bp (ap' H bp)^{-1} y1 + (I - bp (ap' H bp)^{-1} ap' H) beta (beta' beta)^{-1} y2.
Vec linear_chi_inverse(const ModelSpec& model, const MembershipReport& report, const Vec& y);

/// The p x (p(k-1)+r) selector [[0, -ap', ..., -ap'], [I_r, 0, ..., 0]].
Mat chi_selector(const MembershipReport& report);

/// hbar of the window z_s, z_{s-1}, ..., z_{s-k+1}:
/// f_0(z_s) - sum_{i=1}^{k-1} gamma_i(z_{s-i}).
Vec hbar(const ModelSpec& model, std::span<const Vec> window);

struct GjrtDecomposition {
  /// alpha_perp' hbar(window0).
  Vec init_term;
  /// Row t-1: alpha_perp' sum_{s<=t} u_s.
  Mat trend;
  /// Row t-1: chi(z_t) as (psi, theta).
  Mat chi_values;
  /// Row t-1: bold xi_t = (mu + theta(z_t), Delta zeta_t).
  Mat xi;
  Mat selector;
  /// Reconstruction defect per period.
  Vec residual;
  /// Least-squares defect of the xi recursion with the best convex
  /// combination of the regime bold-betas, per period.
  Vec recursion_residual;

  double max_relative_residual(const PathResult& path) const;
};

/// Every field is computed from its definition; the xi recursion is only a
/// cross-check.
GjrtDecomposition decompose(const ModelSpec& model, const MembershipReport& report, const PathResult& path);

/// A convex combination sum_l w_l beta^(l) realizing one xi step.
struct RecursionCertificate {
  Vec weights;
  double residual = 0.0;
};

/// Minimizes |d - sum_l w_l G_l| over the simplex, where d = Delta xi_t and
/// G_l = boldBeta^(l)' (boldAlpha xi_{t-1} + u_t).
RecursionCertificate recursion_certificate(std::span<const Mat> bold_beta_t, const Vec& step_input,
                                           const Vec& delta_xi);

struct StabilityFit {
  double rho_hat = 0.0;
  bool ok = false;
  /// |xi_T| / |xi_tau| (0 when xi_tau = 0).
  double terminal_ratio = 0.0;
};

/// Simulates an impulse u at period 1 followed by T-1 zero shocks, fits
/// log |xi_t| against t over the post-impulse periods still above round-off,
/// and reports ok when rho_hat <= jsr upper + 0.05 and the terminal ratio is
/// below 1e-8.
StabilityFit verify_exponential_stability(const ModelSpec& model, const MembershipReport& report,
                                          const Mat& window0, const Vec& u, int T);

}  // namespace nlvar
