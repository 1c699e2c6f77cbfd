#include "nlvar/vecm.hpp"

#include "nlvar/errors.hpp"

namespace nlvar {

namespace {

Mat make_d(int p, int k) {
  const int n = p * (k - 1);
  Mat d = Mat::Zero(n, n);
  for (int b = 0; b < k - 1; ++b) {
    d.block(b * p, b * p, p, p) = -Mat::Identity(p, p);
    if (b + 1 < k - 1) d.block(b * p, (b + 1) * p, p, p) = Mat::Identity(p, p);
  }
  return d;
}

}  // namespace

Mat neg_d_inverse(int p, int k) {
  const int n = p * (k - 1);
  Mat out = Mat::Zero(n, n);
  for (int b = 0; b < k - 1; ++b) {
    for (int c = b; c < k - 1; ++c) out.block(b * p, c * p, p, p) = Mat::Identity(p, p);
  }
  return out;
}

VecmForm derive_vecm(const ModelSpec& model) {
  const int p = model.p();
  const int k = model.k();
  VecmForm v;
  v.p = p;
  v.k = k;
  v.D = make_d(p, k);
  v.D1 = v.D.topRows(k >= 2 ? p : 0);
  v.E = Mat::Zero(p * (k - 1), p);
  if (k >= 2) v.E.topRows(p) = Mat::Identity(p, p);

  for (RegimeIndex l = 0; l < model.regime_count(); ++l) {
    RegimeVecm r;
    for (int j = 1; j <= k - 1; ++j) {
      Vec off = Vec::Zero(p);
      Mat g = Mat::Zero(p, p);
      for (int i = j + 1; i <= k; ++i) {
        off -= model.piece_offset(i, l);
        g -= model.piece_matrix(i, l);
      }
      r.gamma_offsets.push_back(off);
      r.gammas.push_back(g);
    }
    r.pi_offset = -model.piece_offset(0, l);
    r.pi = -model.piece_matrix(0, l);
    for (int i = 1; i <= k; ++i) {
      r.pi_offset += model.piece_offset(i, l);
      r.pi += model.piece_matrix(i, l);
    }
    v.regimes.push_back(std::move(r));
  }
  return v;
}

Vec gamma_eval(const ModelSpec& model, int j, const Vec& z) {
  Vec out = Vec::Zero(model.p());
  for (int i = j + 1; i <= model.k(); ++i) out -= eval_f(model, i, z);
  return out;
}

Vec pi_eval(const ModelSpec& model, const Vec& z) {
  Vec out = -eval_f(model, 0, z);
  for (int i = 1; i <= model.k(); ++i) out += eval_f(model, i, z);
  return out;
}

Vec zeta_at(const ModelSpec& model, std::span<const Vec> window) {
  const int p = model.p();
  const int k = model.k();
  if (static_cast<int>(window.size()) < k - 1) throw DimensionMismatch("zeta needs k-1 window rows");
  Vec zeta = Vec::Zero(p * (k - 1));
  for (int j = 1; j <= k - 1; ++j) {
    for (int i = j; i <= k - 1; ++i) {
      // z_{t-i+j} sits at window offset i - j.
      zeta.segment((j - 1) * p, p) += gamma_eval(model, i, window[i - j]);
    }
  }
  return zeta;
}

BoldState build_state(const ModelSpec& model, std::span<const Vec> window) {
  if (static_cast<int>(window.size()) != model.k()) throw DimensionMismatch("window must hold k vectors");
  for (const Vec& z : window) {
    if (z.size() != model.p()) throw DimensionMismatch("window vectors must have length p");
  }
  return {window[0], zeta_at(model, window)};
}

double step_identity_check(const ModelSpec& model, std::span<const Vec> window, const Vec& u) {
  const int p = model.p();
  const int k = model.k();
  if (static_cast<int>(window.size()) != k + 1) throw DimensionMismatch("window must hold k+1 vectors");
  const VecmForm v = derive_vecm(model);
  const Vec& zt = window[0];
  const Vec& zt1 = window[1];
  const Vec zeta_t1 = zeta_at(model, window.subspan(1));  // zeta_{t-1}
  const Vec zeta_t2 = zeta_at(model, window.subspan(2));  // zeta_{t-2}

  const int m = p * k;
  Vec lhs(m);
  lhs.head(p) = eval_f(model, 0, zt) - eval_f(model, 0, zt1);
  lhs.tail(m - p) = zeta_t1 - zeta_t2;

  Vec rhs = Vec::Zero(m);
  rhs.head(p) = model.c() + pi_eval(model, zt1) + gamma_eval(model, 1, zt1) + u;
  for (int j = 1; j <= k - 1; ++j) rhs.segment(j * p, p) = gamma_eval(model, j, zt1);
  if (k >= 2) {
    rhs.head(p) += v.D1 * zeta_t2;
    rhs.tail(m - p) += v.D * zeta_t2;
  }
  return (lhs - rhs).norm();
}

BoldMatrices build_bold_matrices(const VecmForm& vecm, const Mat& alpha, const Mat& alpha_perp,
                                 std::span<const Mat> betas, std::span<const Mat> phi0_inverse) {
  const int p = vecm.p;
  const int k = vecm.k;
  const auto r = alpha.cols();
  const auto q = alpha_perp.cols();
  const int n = p * (k - 1);
  const auto m = n + r;

  BoldMatrices b;
  b.boldAlpha = Mat::Zero(p * k, m);
  b.boldAlpha.topLeftCorner(p, r) = alpha;
  if (k >= 2) {
    b.boldAlpha.topRightCorner(p, n) = vecm.E.transpose();
    b.boldAlpha.bottomRightCorner(n, n) = Mat::Identity(n, n);
  }

  b.boldAlphaPerp = Mat::Zero(p * k, q);
  b.boldAlphaPerp.topRows(p) = alpha_perp;
  if (k >= 2) b.boldAlphaPerp.bottomRows(n) = -vecm.E * alpha_perp;

  b.boldD0 = Mat::Zero(m, p * k);
  if (k >= 2) b.boldD0.bottomRightCorner(n, n) = vecm.D;

  for (std::size_t l = 0; l < betas.size(); ++l) {
    Mat bt = Mat::Zero(m, p * k);
    bt.topLeftCorner(r, p) = betas[l].transpose() * phi0_inverse[l];
    if (k >= 2) {
      Mat gamma_stack(n, p);
      for (int j = 0; j < k - 1; ++j) gamma_stack.middleRows(j * p, p) = vecm.regimes[l].gammas[j];
      bt.bottomLeftCorner(n, p) = gamma_stack * phi0_inverse[l];
      bt.bottomRightCorner(n, n) = vecm.D;
    }
    b.boldBetaT.push_back(std::move(bt));
  }
  return b;
}

}  // namespace nlvar
