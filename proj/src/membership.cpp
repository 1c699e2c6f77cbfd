#include "nlvar/membership.hpp"

#include "nlvar/errors.hpp"
#include "nlvar/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nlvar {

namespace {

bool nearly_singular(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const Vec& s = svd.singularValues();
  if (s.size() == 0) return false;
  return s(0) == 0.0 || s(s.size() - 1) <= 1e-12 * s(0);
}

}  // namespace

double default_rank_tol(int p, std::size_t regimes) {
  return 1e-9 * static_cast<double>(std::max<std::size_t>(static_cast<std::size_t>(p), regimes));
}

CrscFactors factorize_crsc(const VecmForm& vecm, const Vec& c, double tol) {
  const int p = vecm.p;
  const auto L = vecm.regimes.size();
  if (c.size() != p) throw DimensionMismatch("intercept must have length p");
  if (tol <= 0.0) tol = default_rank_tol(p, L);

  Mat big(p, static_cast<Eigen::Index>(L) * p + static_cast<Eigen::Index>(L) + 1);
  for (std::size_t l = 0; l < L; ++l) {
    big.middleCols(static_cast<Eigen::Index>(l) * p, p) = vecm.regimes[l].pi;
    big.col(static_cast<Eigen::Index>(L) * p + static_cast<Eigen::Index>(l)) = vecm.regimes[l].pi_offset;
  }
  big.col(big.cols() - 1) = c;

  Eigen::JacobiSVD<Mat> svd(big, Eigen::ComputeFullU);
  const Vec& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  const double cutoff = tol * smax;
  int r = 0;
  if (smax > 0.0) {
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      if (s(i) > cutoff) ++r;
    }
  }

  CrscFactors f;
  f.r = r;
  f.alpha = svd.matrixU().leftCols(r);
  linalg::canonicalize_signs(f.alpha);
  f.alpha_perp = linalg::orthogonal_complement(f.alpha);

  const Mat proj_out = Mat::Identity(p, p) - f.alpha * f.alpha.transpose();
  for (std::size_t l = 0; l < L; ++l) {
    const Mat& pi = vecm.regimes[l].pi;
    const double scale = 1.0 + linalg::spectral_norm(pi);
    const double residual = linalg::spectral_norm(proj_out * pi);
    if (residual > tol * scale) {
      std::ostringstream msg;
      msg << "CRSC violated: Pi of regime " << l << " leaves the common span (residual " << residual << ")";
      throw CrscViolation(static_cast<long>(l), residual, msg.str());
    }
    Eigen::JacobiSVD<Mat> sl(pi);
    int rank_l = 0;
    for (Eigen::Index i = 0; i < sl.singularValues().size(); ++i) {
      if (sl.singularValues()(i) > cutoff) ++rank_l;
    }
    if (rank_l != r) {
      const double gap = r > 0 && r <= sl.singularValues().size() ? sl.singularValues()(r - 1) : 0.0;
      std::ostringstream msg;
      msg << "CRSC violated: Pi of regime " << l << " has rank " << rank_l << " but the common span has dimension " << r;
      throw CrscViolation(static_cast<long>(l), gap, msg.str());
    }
    f.betas.push_back(pi.transpose() * f.alpha);
    f.mu_bars.push_back(f.alpha.transpose() * vecm.regimes[l].pi_offset);
  }
  f.mu = f.alpha.transpose() * c;
  const double c_residual = (c - f.alpha * f.mu).norm();
  if (c_residual > tol * (1.0 + c.norm())) {
    throw CrscViolation(-1, c_residual, "CRSC violated: intercept leaves the common span");
  }
  return f;
}

HomeoCheck check_homeomorphism(const ModelSpec& model) {
  HomeoCheck h;
  const std::size_t n = model.is_linear() || model.is_smoothed() ? 1 : model.regime_count();
  for (RegimeIndex l = 0; l < n; ++l) {
    const Mat& phi0 = model.piece_matrix(0, l);
    h.determinants.push_back(phi0.determinant());
    if (nearly_singular(phi0)) {
      h.reason = "Phi_0 of regime " + std::to_string(l) + " is singular";
      return h;
    }
  }
  for (std::size_t l = 1; l < h.determinants.size(); ++l) {
    if ((h.determinants[l] > 0) != (h.determinants[0] > 0)) {
      h.reason = "det Phi_0 changes sign between regime 0 and regime " + std::to_string(l);
      return h;
    }
  }
  h.ok = true;
  return h;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Member:
      return "Member";
    case Verdict::NotMember:
      return "NotMember";
    case Verdict::Inconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

MembershipReport check_membership(const ModelSpec& model, double rho_bar, int depth) {
  MembershipReport rep;
  rep.p = model.p();
  rep.k = model.k();

  const HomeoCheck homeo = check_homeomorphism(model);
  rep.homeo_ok = homeo.ok;
  rep.phi0_determinants = homeo.determinants;

  const VecmForm vecm = derive_vecm(model);
  CrscFactors f;
  try {
    f = factorize_crsc(vecm, model.c());
  } catch (const CrscViolation& e) {
    rep.verdict = Verdict::NotMember;
    rep.reason = e.what();
    return rep;
  }
  rep.r = f.r;
  rep.q = model.p() - f.r;
  rep.alpha = f.alpha;
  rep.alpha_perp = f.alpha_perp;
  rep.mu = f.mu;
  rep.betas = f.betas;
  rep.mu_bars = f.mu_bars;
  rep.stationary = f.r == model.p();

  if (!homeo.ok) {
    rep.verdict = Verdict::NotMember;
    rep.reason = homeo.reason;
    return rep;
  }

  std::vector<Mat> phi0_inv;
  for (RegimeIndex l = 0; l < model.regime_count(); ++l) phi0_inv.push_back(model.piece_matrix(0, l).inverse());
  const BoldMatrices bold = build_bold_matrices(vecm, f.alpha, f.alpha_perp, f.betas, phi0_inv);
  const auto m = bold.boldAlpha.cols();
  for (const Mat& bt : bold.boldBetaT) {
    rep.b_bar = std::max(rep.b_bar, linalg::spectral_norm(bt));
    rep.jsr_set.push_back(Mat::Identity(m, m) + bt * bold.boldAlpha);
  }

  const JsrDecision d = jsr_decision(rep.jsr_set, rho_bar, depth);
  rep.jsr = d.bracket;
  std::ostringstream msg;
  switch (d.verdict) {
    case JsrVerdict::Below:
      rep.verdict = Verdict::Member;
      if (rep.stationary) rep.reason = "stationary: r = p, no common trends";
      break;
    case JsrVerdict::Above:
      rep.verdict = Verdict::NotMember;
      msg << "joint spectral radius lower bound " << d.bracket.lower << " >= " << rho_bar;
      rep.reason = msg.str();
      break;
    case JsrVerdict::Inconclusive:
      rep.verdict = Verdict::Inconclusive;
      msg << "joint spectral radius bracket [" << d.bracket.lower << ", " << d.bracket.upper
          << "] straddles " << rho_bar;
      rep.reason = msg.str();
      break;
  }
  return rep;
}

void require_member(const MembershipReport& report) {
  if (!report.member()) {
    throw NotMember("model is not a member (" + to_string(report.verdict) +
                    (report.reason.empty() ? "" : ": " + report.reason) + ")");
  }
}

Mat h_matrix(const ModelSpec& model, const VecmForm& vecm, RegimeIndex l) {
  Mat h = model.piece_matrix(0, l);
  for (const Mat& g : vecm.regimes[l].gammas) h -= g;
  return h;
}

Vec h_offset(const ModelSpec& model, const VecmForm& vecm, RegimeIndex l) {
  Vec h = model.piece_offset(0, l);
  for (const Vec& g : vecm.regimes[l].gamma_offsets) h -= g;
  return h;
}

LinearDiagnostics linear_diagnostics(const ModelSpec& model, double unit_tol) {
  if (!model.is_linear()) throw FamilyMismatch("linear_diagnostics needs a linear model");
  const int p = model.p();
  const int k = model.k();
  const Mat& phi0 = model.piece_matrix(0, 0);
  if (nearly_singular(phi0)) throw DomainError("Phi_0 is singular");
  const Mat phi0_inv = phi0.inverse();

  Mat comp = Mat::Zero(p * k, p * k);
  for (int i = 1; i <= k; ++i) comp.block(0, (i - 1) * p, p, p) = phi0_inv * model.piece_matrix(i, 0);
  if (k > 1) comp.bottomLeftCorner(p * (k - 1), p * (k - 1)) = Mat::Identity(p * (k - 1), p * (k - 1));

  LinearDiagnostics d;
  Eigen::EigenSolver<Mat> es(comp, false);
  const auto& ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    d.companion_eigenvalues.push_back(ev(i));
    if (std::abs(ev(i) - 1.0) <= unit_tol) ++d.unit_roots;
    if (std::abs(ev(i)) > 1e-12) d.roots.push_back(1.0 / ev(i));
  }
  d.H = h_matrix(model, derive_vecm(model), 0);
  return d;
}

}  // namespace nlvar
