#include "nlvar/gjrt.hpp"

#include "nlvar/detail/piecewise_inverse.hpp"
#include "nlvar/errors.hpp"
#include "nlvar/linalg.hpp"
#include "nlvar/vecm.hpp"

#include <cmath>
#include <limits>

namespace nlvar {

namespace {

void require_length(const Vec& v, int p, const char* what) {
  if (v.size() != p) throw DimensionMismatch(std::string(what) + " must have length p");
}

Vec piecewise_chi_inverse(const ModelSpec& model, const std::vector<AffineMap>& pieces, const Vec& y) {
  return detail::piecewise_inverse(
      pieces.size(),
      [&](RegimeIndex l) -> Vec { return pieces[l].matrix.partialPivLu().solve(y - pieces[l].offset); },
      [&](RegimeIndex l, const Vec& z) { return regime_margin(model, l, z); }, "chi");
}

Vec smoothed_chi_inverse(const ModelSpec& model, const MembershipReport& report, const Vec& y) {
  Vec z = piecewise_chi_inverse(model, chi_pieces(model, report), y);
  const double target = 1e-10 * (1.0 + y.norm());
  Vec r = chi_vec(model, report, z) - y;
  double rn = r.norm();
  for (int it = 0; it < 200; ++it) {
    if (rn <= target) return z;
    const Vec step = chi_jacobian(model, report, z).partialPivLu().solve(r);
    double lambda = 1.0;
    bool improved = false;
    for (int halvings = 0; halvings < 60; ++halvings, lambda *= 0.5) {
      const Vec trial = z - lambda * step;
      const Vec rt = chi_vec(model, report, trial) - y;
      if (rt.norm() < rn) {
        z = trial;
        r = rt;
        rn = rt.norm();
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  if (rn <= target) return z;
  throw NewtonDivergence("Newton iteration for the smoothed chi inverse did not converge (residual " +
                         std::to_string(rn) + ")");
}

}  // namespace

Vec ChiValue::stacked() const {
  Vec out(psi.size() + theta.size());
  out << psi, theta;
  return out;
}

Vec h_eval(const ModelSpec& model, const Vec& z) {
  Vec h = eval_f(model, 0, z);
  for (int i = 1; i <= model.k() - 1; ++i) h -= gamma_eval(model, i, z);
  return h;
}

ChiValue chi(const ModelSpec& model, const MembershipReport& report, const Vec& z) {
  require_member(report);
  require_length(z, model.p(), "z");
  return {report.alpha_perp.transpose() * h_eval(model, z), report.alpha.transpose() * pi_eval(model, z)};
}

Vec chi_vec(const ModelSpec& model, const MembershipReport& report, const Vec& z) {
  return chi(model, report, z).stacked();
}

Mat chi_jacobian(const ModelSpec& model, const MembershipReport& report, const Vec& z) {
  require_member(report);
  require_length(z, model.p(), "z");
  const int k = model.k();
  std::vector<Mat> jf;
  for (int i = 0; i <= k; ++i) jf.push_back(jacobian_f(model, i, z));
  // gamma_j' = -sum_{i>j} f_i', so sum_{j=1}^{k-1} gamma_j' = -sum_{i=2}^k (i-1) f_i'.
  Mat jh = jf[0];
  for (int i = 2; i <= k; ++i) jh += (i - 1) * jf[i];
  Mat jpi = -jf[0];
  for (int i = 1; i <= k; ++i) jpi += jf[i];
  Mat out(model.p(), model.p());
  out << report.alpha_perp.transpose() * jh, report.alpha.transpose() * jpi;
  return out;
}

std::vector<AffineMap> chi_pieces(const ModelSpec& model, const MembershipReport& report) {
  require_member(report);
  const VecmForm vecm = derive_vecm(model);
  std::vector<AffineMap> out;
  for (RegimeIndex l = 0; l < model.regime_count(); ++l) {
    AffineMap m;
    m.offset.resize(model.p());
    m.offset << report.alpha_perp.transpose() * h_offset(model, vecm, l), report.mu_bars[l];
    m.matrix.resize(model.p(), model.p());
    m.matrix << report.alpha_perp.transpose() * h_matrix(model, vecm, l), report.betas[l].transpose();
    out.push_back(std::move(m));
  }
  return out;
}

Vec chi_inverse(const ModelSpec& model, const MembershipReport& report, const Vec& y) {
  require_member(report);
  require_length(y, model.p(), "y");
  if (model.is_smoothed()) return smoothed_chi_inverse(model, report, y);
  const std::vector<AffineMap> pieces = chi_pieces(model, report);
  if (model.is_linear()) return pieces[0].matrix.partialPivLu().solve(y - pieces[0].offset);
  return piecewise_chi_inverse(model, pieces, y);
}

Vec linear_chi_inverse(const ModelSpec& model, const MembershipReport& report, const Vec& y) {
  require_member(report);
  if (!model.is_linear()) throw FamilyMismatch("linear_chi_inverse needs a linear model");
  require_length(y, model.p(), "y");
  const int p = model.p();
  const int q = report.q;
  const Mat& beta = report.betas[0];
  const Mat& ap = report.alpha_perp;
  const Mat h = h_matrix(model, derive_vecm(model), 0);
  const Vec y1 = y.head(q);
  const Vec y2 = y.tail(report.r);

  Vec z = Vec::Zero(p);
  Mat proj = Mat::Identity(p, p);
  if (q > 0) {
    const Mat bp = linalg::orthogonal_complement(beta.householderQr().householderQ() * Mat::Identity(p, report.r));
    const Mat core = (ap.transpose() * h * bp).inverse();
    z += bp * core * y1;
    proj -= bp * core * ap.transpose() * h;
  }
  if (report.r > 0) z += proj * beta * (beta.transpose() * beta).ldlt().solve(y2);
  return z;
}

Mat chi_selector(const MembershipReport& report) {
  const int p = report.p;
  const int k = report.k;
  const int r = report.r;
  const int q = report.q;
  Mat s = Mat::Zero(p, p * (k - 1) + r);
  for (int j = 0; j < k - 1; ++j) s.block(0, r + j * p, q, p) = -report.alpha_perp.transpose();
  s.block(q, 0, r, r) = Mat::Identity(r, r);
  return s;
}

Vec hbar(const ModelSpec& model, std::span<const Vec> window) {
  if (static_cast<int>(window.size()) != model.k()) throw DimensionMismatch("window must hold k vectors");
  for (const Vec& z : window) require_length(z, model.p(), "window vector");
  Vec out = eval_f(model, 0, window[0]);
  for (int i = 1; i <= model.k() - 1; ++i) out -= gamma_eval(model, i, window[i]);
  return out;
}

RecursionCertificate recursion_certificate(std::span<const Mat> bold_beta_t, const Vec& step_input,
                                           const Vec& delta_xi) {
  const auto L = bold_beta_t.size();
  Mat g(delta_xi.size(), static_cast<Eigen::Index>(L));
  for (std::size_t l = 0; l < L; ++l) g.col(static_cast<Eigen::Index>(l)) = bold_beta_t[l] * step_input;

  RecursionCertificate best;
  best.residual = std::numeric_limits<double>::infinity();
  auto consider = [&](const Vec& w) {
    const double res = (delta_xi - g * w).norm();
    if (res < best.residual) {
      best.residual = res;
      best.weights = w;
    }
  };
  for (std::size_t l = 0; l < L; ++l) consider(Vec::Unit(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(l)));
  if (L > 16) return best;

  // Equality-constrained least squares on every face of the simplex.
  for (unsigned mask = 1; mask < (1u << L); ++mask) {
    std::vector<Eigen::Index> idx;
    for (std::size_t l = 0; l < L; ++l) {
      if ((mask >> l) & 1u) idx.push_back(static_cast<Eigen::Index>(l));
    }
    if (idx.size() < 2) continue;
    const auto s = static_cast<Eigen::Index>(idx.size());
    Mat gs(g.rows(), s);
    for (Eigen::Index j = 0; j < s; ++j) gs.col(j) = g.col(idx[j]);
    Mat kkt = Mat::Zero(s + 1, s + 1);
    kkt.topLeftCorner(s, s) = gs.transpose() * gs;
    kkt.topRightCorner(s, 1).setOnes();
    kkt.bottomLeftCorner(1, s).setOnes();
    Vec rhs(s + 1);
    rhs << gs.transpose() * delta_xi, 1.0;
    const Vec sol = kkt.completeOrthogonalDecomposition().solve(rhs);
    const Vec ws = sol.head(s);
    if (ws.minCoeff() < -1e-12 || std::abs(ws.sum() - 1.0) > 1e-9) continue;
    Vec w = Vec::Zero(static_cast<Eigen::Index>(L));
    for (Eigen::Index j = 0; j < s; ++j) w(idx[j]) = std::max(0.0, ws(j));
    consider(w);
  }
  return best;
}

double GjrtDecomposition::max_relative_residual(const PathResult& path) const {
  double worst = 0.0;
  for (Eigen::Index t = 0; t < residual.size(); ++t) {
    worst = std::max(worst, residual(t) / (1.0 + path.path.row(t).norm()));
  }
  return worst;
}

GjrtDecomposition decompose(const ModelSpec& model, const MembershipReport& report, const PathResult& path) {
  require_member(report);
  const int p = model.p();
  const int k = model.k();
  const int r = report.r;
  const int q = report.q;
  const int T = path.T();
  const int n = p * (k - 1);
  if (path.path.cols() != p || path.window0.rows() != k) throw DimensionMismatch("path does not match the model");

  GjrtDecomposition d;
  d.selector = chi_selector(report);
  d.init_term = report.alpha_perp.transpose() * hbar(model, path.window(0, k));
  d.trend = Mat::Zero(T, q);
  d.chi_values = Mat::Zero(T, p);
  d.xi = Mat::Zero(T, n + r);
  d.residual = Vec::Zero(T);
  d.recursion_residual = Vec::Zero(T);

  const VecmForm vecm = derive_vecm(model);
  std::vector<Mat> phi0_inv;
  for (RegimeIndex l = 0; l < model.regime_count(); ++l) phi0_inv.push_back(model.piece_matrix(0, l).inverse());
  const BoldMatrices bold = build_bold_matrices(vecm, report.alpha, report.alpha_perp, report.betas, phi0_inv);

  auto zeta = [&](int t) { return zeta_at(model, path.window(t, k - 1)); };
  auto xi_at = [&](int t) {
    Vec x(n + r);
    x.head(r) = report.mu + report.alpha.transpose() * pi_eval(model, path.z(t));
    if (k > 1) x.tail(n) = zeta(t) - zeta(t - 1);
    return x;
  };

  Vec cum = Vec::Zero(p);
  Vec xi_prev = xi_at(0);
  for (int t = 1; t <= T; ++t) {
    const Vec zt = path.z(t);
    cum += path.shocks.row(t - 1).transpose();
    d.trend.row(t - 1) = (report.alpha_perp.transpose() * cum).transpose();
    const Vec x = xi_at(t);
    d.xi.row(t - 1) = x.transpose();

    const Vec c = chi_vec(model, report, zt);
    d.chi_values.row(t - 1) = c.transpose();
    Vec rebuilt(p);
    rebuilt << d.init_term + d.trend.row(t - 1).transpose(), -report.mu;
    rebuilt += d.selector * x;
    d.residual(t - 1) = (c - rebuilt).norm();

    Vec dz(p * k);
    dz.head(p) = eval_f(model, 0, zt) - eval_f(model, 0, path.z(t - 1));
    if (k > 1) dz.tail(n) = zeta(t - 1) - zeta(t - 2);
    d.recursion_residual(t - 1) = recursion_certificate(bold.boldBetaT, dz, x - xi_prev).residual;
    xi_prev = x;
  }
  return d;
}

StabilityFit verify_exponential_stability(const ModelSpec& model, const MembershipReport& report,
                                          const Mat& window0, const Vec& u, int T) {
  require_member(report);
  if (T < 2) throw PreconditionError("T must be >= 2");
  const PathResult path = simulate(model, window0, ImpulseThenZero{u, 1, T});
  const GjrtDecomposition d = decompose(model, report, path);

  StabilityFit fit;
  const double first = d.xi.row(0).norm();
  if (first == 0.0) {
    fit.ok = d.xi.norm() == 0.0;
    return fit;
  }
  fit.terminal_ratio = d.xi.row(T - 1).norm() / first;

  // Least-squares slope of log |xi_t| over the periods still above round-off.
  double st = 0, sy = 0, stt = 0, sty = 0;
  int count = 0;
  for (int t = 1; t <= T; ++t) {
    const double norm = d.xi.row(t - 1).norm();
    if (norm <= 1e-12 * first) break;
    const double y = std::log(norm);
    st += t;
    sy += y;
    stt += static_cast<double>(t) * t;
    sty += t * y;
    ++count;
  }
  if (count >= 2) {
    const double slope = (count * sty - st * sy) / (count * stt - st * st);
    fit.rho_hat = std::exp(slope);
  }
  fit.ok = fit.rho_hat <= report.jsr.upper + 0.05 && fit.terminal_ratio <= 1e-8;
  return fit;
}

}  // namespace nlvar
