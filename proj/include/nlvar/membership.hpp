#pragma once

#include "nlvar/jsr.hpp"
#include "nlvar/model.hpp"
#include "nlvar/vecm.hpp"

#include <complex>
#include <string>
#include <vector>

namespace nlvar {

/// Common row space factorization pi^(l)(z) = alpha (mu_bar^(l) + beta^(l)' z),
/// c = alpha mu.
struct CrscFactors {
  int r = 0;
  Mat alpha;       // p x r, orthonormal, first nonzero entry of each column positive
  Mat alpha_perp;  // p x q, same convention
  std::vector<Mat> betas;    // per regime, p x r
  Vec mu;
  std::vector<Vec> mu_bars;  // per regime
};

/// Default relative rank tolerance 1e-9 * max(p, L).
double default_rank_tol(int p, std::size_t regimes);

/// r is the numerical rank of [Pi^(1..L) pi_bar^(1..L) c]; each Pi^(l) must have
/// rank r. Throws CrscViolation otherwise. tol <= 0 selects the default.
CrscFactors factorize_crsc(const VecmForm& vecm, const Vec& c, double tol = 0.0);

struct HomeoCheck {
  bool ok = false;
  /// det Phi_0^(l) per regime (a single entry for Linear and Smoothed).
  std::vector<double> determinants;
  std::string reason;
};

/// f_0 is a homeomorphism when every det Phi_0^(l) is nonzero with a common
/// sign. Singularity is judged by sigma_min <= 1e-12 sigma_max.
HomeoCheck check_homeomorphism(const ModelSpec& model);

enum class Verdict { Member, NotMember, Inconclusive };

std::string to_string(Verdict v);

struct MembershipReport {
  int p = 0;
  int k = 0;
  int r = 0;
  int q = 0;
  Mat alpha;
  Mat alpha_perp;
  Vec mu;
  std::vector<Mat> betas;
  std::vector<Vec> mu_bars;
  /// max_l of the spectral norm of bold-beta^(l).
  double b_bar = 0.0;
  JsrBracket jsr;
  /// The matrices I + boldBeta^(l)' boldAlpha whose JSR was bounded.
  std::vector<Mat> jsr_set;
  bool homeo_ok = false;
  std::vector<double> phi0_determinants;
  /// r == p: no common trends.
  bool stationary = false;
  Verdict verdict = Verdict::Inconclusive;
  std::string reason;

  bool member() const { return verdict == Verdict::Member; }
};

/// Runs the CRSC factorization, the homeomorphism check and the JSR decision
/// on {I + boldBeta^(l)' boldAlpha}. Never throws for domain failures; the
/// verdict carries the reason.
MembershipReport check_membership(const ModelSpec& model, double rho_bar = 1.0, int depth = 12);

/// Throws NotMember unless the report says Member.
void require_member(const MembershipReport& report);

struct LinearDiagnostics {
  /// Eigenvalues of the companion matrix of Phi_0^{-1} Phi(lambda).
  std::vector<std::complex<double>> companion_eigenvalues;
  /// Finite roots of det Phi(lambda): reciprocals of nonzero eigenvalues.
  std::vector<std::complex<double>> roots;
  int unit_roots = 0;
  /// H = Phi_0 - sum_i Gamma_i.
  Mat H;
};

/// Linear family only; throws FamilyMismatch otherwise and DomainError for a
/// singular Phi_0. Unit roots are eigenvalues within unit_tol of 1.
LinearDiagnostics linear_diagnostics(const ModelSpec& model, double unit_tol = 1e-6);

/// Phi_0^(l) - sum_i Gamma_i^(l), the slope of h in regime l.
Mat h_matrix(const ModelSpec& model, const VecmForm& vecm, RegimeIndex l);
/// phi_0^(l) - sum_i gamma_i^(l), the offset of h in regime l.
Vec h_offset(const ModelSpec& model, const VecmForm& vecm, RegimeIndex l);

}  // namespace nlvar
