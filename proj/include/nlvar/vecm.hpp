#pragma once

#include "nlvar/model.hpp"

#include <span>
#include <vector>

namespace nlvar {

/// VECM quantities of one affine regime.
struct RegimeVecm {
  /// gamma_offsets[j-1], gammas[j-1] for j = 1..k-1:
  /// gamma_j = -sum_{i=j+1}^k (offset_i, Phi_i).
  std::vector<Vec> gamma_offsets;
  std::vector<Mat> gammas;
  Vec pi_offset;  // -(phi_0 - sum_i phi_i)
  Mat pi;         // -(Phi_0 - sum_i Phi_i)
};

/// Nonlinear VECM of a model together with the fixed matrices of the stacked
/// state representation. D is p(k-1) x p(k-1) with -I_p on the diagonal and
/// I_p on the superdiagonal (empty for k = 1, -I_p for k = 2); D1 is its first
/// p rows; E = [I_p; 0] is p(k-1) x p.
struct VecmForm {
  int p = 0;
  int k = 0;
  std::vector<RegimeVecm> regimes;
  Mat D;
  Mat D1;
  Mat E;
};

VecmForm derive_vecm(const ModelSpec& model);

/// gamma_j(z) = -sum_{i=j+1}^k f_i(z) for j in 0..k-1 (zero for j >= k).
Vec gamma_eval(const ModelSpec& model, int j, const Vec& z);

/// pi(z) = -f_0(z) + sum_{i=1}^k f_i(z).
Vec pi_eval(const ModelSpec& model, const Vec& z);

/// Stacked state (z_t, zeta_{t-1}) from the window z_t, ..., z_{t-k+1}.
/// zeta stacks zeta_{j,t} = sum_{i=j}^{k-1} gamma_i(z_{t-i+j}) over j = 1..k-1.
struct BoldState {
  Vec z;
  Vec zeta;
};

/// zeta_t from the window z_t, z_{t-1}, ..., z_{t-k+2} (at least k-1 rows).
Vec zeta_at(const ModelSpec& model, std::span<const Vec> window);

/// window[0] = z_t, ..., window[k-1] = z_{t-k+1}. Note that the returned
/// zeta is zeta_t built from z_t..z_{t-k+2}; the bold state at t+1 pairs
/// z_{t+1} with it.
BoldState build_state(const ModelSpec& model, std::span<const Vec> window);

/// Both sides of the stacked VECM
///   [Delta f_0(z_t); Delta zeta_{t-1}] = c + pi(z_{t-1}) + D z_{t-1} + u_t
/// evaluated from raw f_i. window[0] = z_t, ..., window[k] = z_{t-k}.
/// Returns the norm of the discrepancy.
double step_identity_check(const ModelSpec& model, std::span<const Vec> window, const Vec& u);

/// Stacked matrices of the equilibrium-error recursion for a given alpha
/// (p x r). boldBetaT holds bold-beta transposed, one per regime.
struct BoldMatrices {
  Mat boldAlpha;      // pk x (p(k-1)+r)
  Mat boldAlphaPerp;  // pk x q
  std::vector<Mat> boldBetaT;  // (p(k-1)+r) x pk
  Mat boldD0;         // (p(k-1)+r) x pk
};

/// betas[l] is beta^(l) (p x r); phi0_inverse[l] the inverse of Phi_0^(l).
BoldMatrices build_bold_matrices(const VecmForm& vecm, const Mat& alpha, const Mat& alpha_perp,
                                 std::span<const Mat> betas, std::span<const Mat> phi0_inverse);

/// The block upper-triangular all-identity matrix equal to -D^{-1}.
Mat neg_d_inverse(int p, int k);

}  // namespace nlvar
