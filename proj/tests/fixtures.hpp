#pragma once

// Shared test models. EX-L is the bivariate linear model with one common
// trend; EX-T is a two-regime threshold version of it with the same loading.
// The random generators build models that satisfy the common row space
// condition and continuity by construction, then keep drawing until the
// membership check certifies them.

#include "nlvar/membership.hpp"
#include "nlvar/model.hpp"
#include "nlvar/vecm.hpp"

#include <random>
#include <stdexcept>
#include <vector>

namespace fixtures {

using nlvar::Mat;
using nlvar::Vec;

inline Vec v2(double a, double b) { return Vec{{a, b}}; }

inline nlvar::ModelSpec ex_l(const Vec& alpha = v2(-0.5, 0.0), const Vec& beta = v2(1.0, -1.0)) {
  nlvar::LinearFamily f;
  f.phi = {Mat::Identity(2, 2), Mat::Identity(2, 2) + alpha * beta.transpose()};
  return nlvar::make_model(2, 1, Vec::Zero(2), f);
}

inline nlvar::ThresholdFamily ex_t_family() {
  const Vec alpha = v2(-0.5, 0.0);
  const Vec b1 = v2(1.0, -1.0);
  const Vec b2 = v2(1.0, -0.5);
  nlvar::ThresholdFamily f;
  f.a = v2(0.0, 1.0);
  f.tau = {1.0};
  const Mat phi1_lo = Mat::Identity(2, 2) + alpha * b1.transpose();
  const Mat phi1_hi = Mat::Identity(2, 2) + alpha * b2.transpose();
  // Continuity at a'z = tau: offset_hi = offset_lo - n tau with n = dPhi a / |a|^2.
  const Vec n = (phi1_hi - phi1_lo) * f.a / f.a.squaredNorm();
  f.pieces = {
      {{Vec::Zero(2), Mat::Identity(2, 2)}, {Vec::Zero(2), Mat::Identity(2, 2)}},
      {{Vec::Zero(2), phi1_lo}, {-n * f.tau[0], phi1_hi}},
  };
  return f;
}

inline nlvar::ModelSpec ex_t() { return nlvar::make_model(2, 1, Vec::Zero(2), ex_t_family()); }

inline Mat random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = n(rng);
  return m;
}

inline Vec random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  return random_matrix(rng, n, 1, scale).col(0);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Lag matrices from (Phi_0, Gamma_1..Gamma_{k-1}, Pi):
// Phi_1 = Pi + Phi_0 + Gamma_1, Phi_j = Gamma_j - Gamma_{j-1}, Gamma_k = 0.
inline std::vector<Mat> lags_from_vecm(const Mat& phi0, const std::vector<Mat>& gammas, const Mat& pi, int k) {
  const auto p = phi0.rows();
  std::vector<Mat> phi(k + 1);
  phi[0] = phi0;
  auto gamma = [&](int j) -> Mat { return j >= 1 && j <= k - 1 ? gammas[j - 1] : Mat::Zero(p, p); };
  phi[1] = pi + phi0 + gamma(1);
  for (int j = 2; j <= k; ++j) phi[j] = gamma(j) - gamma(j - 1);
  return phi;
}

// Regime building block: Phi_0, Gammas, alpha, beta. The loading alpha is
// shared across regimes.
struct Pieces {
  Mat phi0;
  std::vector<Mat> gammas;
  Mat beta;
};

inline Pieces random_pieces(std::mt19937_64& rng, int p, int k, const Mat& alpha) {
  Pieces pc;
  pc.phi0 = Mat::Identity(p, p) + random_matrix(rng, p, p, 0.15);
  for (int j = 1; j < k; ++j) pc.gammas.push_back(random_matrix(rng, p, p, 0.15));
  // beta' Phi_0^{-1} alpha close to -s I keeps the equilibrium error contracting.
  const Mat m = pc.phi0.inverse() * alpha;
  const double s = std::uniform_real_distribution<double>(0.3, 0.8)(rng);
  pc.beta = (-s * m * (m.transpose() * m).inverse()) + random_matrix(rng, p, alpha.cols(), 0.05);
  return pc;
}

// Shifts every regime quantity by a rank-one term along a'.
inline Pieces shifted(std::mt19937_64& rng, const Pieces& base, const Vec& a, double scale) {
  Pieces pc = base;
  const auto p = base.phi0.rows();
  pc.phi0 += random_vector(rng, p, scale) * a.transpose();
  for (Mat& g : pc.gammas) g += random_vector(rng, p, scale) * a.transpose();
  pc.beta += a * random_matrix(rng, 1, base.beta.cols(), scale);
  return pc;
}

inline Mat orthonormal_alpha(std::mt19937_64& rng, int p, int r) {
  Eigen::HouseholderQR<Mat> qr(random_matrix(rng, p, r));
  return qr.householderQ() * Mat::Identity(p, r);
}

template <class Build>
nlvar::ModelSpec first_member(Build build, int tries = 2000) {
  for (int i = 0; i < tries; ++i) {
    nlvar::ModelSpec m = build();
    if (nlvar::check_membership(m, 1.0, 10).member()) return m;
  }
  throw std::runtime_error("no member model found");
}

inline nlvar::ModelSpec random_linear_member(std::mt19937_64& rng, int p, int k, int r) {
  return first_member([&] {
    const Mat alpha = orthonormal_alpha(rng, p, r) * std::uniform_real_distribution<double>(0.5, 2.0)(rng);
    const Pieces pc = random_pieces(rng, p, k, alpha);
    nlvar::LinearFamily f;
    f.phi = lags_from_vecm(pc.phi0, pc.gammas, alpha * pc.beta.transpose(), k);
    return nlvar::make_model(p, k, alpha * random_vector(rng, r, 0.5), f);
  });
}

inline nlvar::ThresholdFamily threshold_from_pieces(const Mat& alpha, const std::vector<Pieces>& regimes, const Vec& a,
                                                    const std::vector<double>& tau, int k) {
  const auto p = alpha.rows();
  nlvar::ThresholdFamily f;
  f.a = a;
  f.tau = tau;
  f.pieces.assign(k + 1, {});
  std::vector<std::vector<Mat>> lags;
  for (const Pieces& pc : regimes) lags.push_back(lags_from_vecm(pc.phi0, pc.gammas, alpha * pc.beta.transpose(), k));
  for (int i = 0; i <= k; ++i) {
    Vec offset = Vec::Zero(p);
    for (std::size_t l = 0; l < regimes.size(); ++l) {
      if (l > 0) offset -= (lags[l][i] - lags[l - 1][i]) * a / a.squaredNorm() * tau[l - 1];
      f.pieces[i].push_back({offset, lags[l][i]});
    }
  }
  return f;
}

inline nlvar::ModelSpec random_threshold_member(std::mt19937_64& rng, int p, int k, int r, int regimes,
                                                bool common_phi0 = false) {
  return first_member([&] {
    const Mat alpha = orthonormal_alpha(rng, p, r);
    const Vec a = random_vector(rng, p).normalized();
    std::vector<Pieces> pcs{random_pieces(rng, p, k, alpha)};
    std::vector<double> tau;
    double t = std::normal_distribution<double>(0.0, 0.5)(rng);
    for (int l = 1; l < regimes; ++l) {
      Pieces next = shifted(rng, pcs.back(), a, 0.2);
      if (common_phi0) next.phi0 = pcs.back().phi0;
      pcs.push_back(next);
      tau.push_back(t);
      t += std::uniform_real_distribution<double>(0.3, 1.5)(rng);
    }
    return nlvar::make_model(p, k, alpha * random_vector(rng, r, 0.5), threshold_from_pieces(alpha, pcs, a, tau, k));
  });
}

inline nlvar::ModelSpec random_smoothed_member(std::mt19937_64& rng, int p, int k, int r, int regimes, double sigma) {
  return first_member([&] {
    const nlvar::ModelSpec base = random_threshold_member(rng, p, k, r, regimes, true);
    nlvar::SmoothedFamily f{std::get<nlvar::ThresholdFamily>(base.family()), sigma};
    return nlvar::make_model(p, k, base.c(), f);
  });
}

// Conic model: each of the 2^p cones is its own regime and the lag matrices
// shift by N_j a_j' when bit j is set, which keeps every f_i continuous.
inline nlvar::ModelSpec random_conic_member(std::mt19937_64& rng, int p, int k, int r) {
  return first_member([&] {
    const Mat alpha = orthonormal_alpha(rng, p, r);
    Mat basis = random_matrix(rng, p, p);
    while (std::abs(basis.determinant()) < 0.3) basis = random_matrix(rng, p, p);
    const Pieces base = random_pieces(rng, p, k, alpha);
    std::vector<Pieces> deltas;
    for (int j = 0; j < p; ++j) {
      Pieces d = shifted(rng, base, basis.col(j), 0.15);
      d.phi0 -= base.phi0;
      for (int g = 0; g < k - 1; ++g) d.gammas[g] -= base.gammas[g];
      d.beta -= base.beta;
      deltas.push_back(d);
    }
    nlvar::ConicFamily f;
    f.basis = basis;
    f.regimes = std::size_t{1} << p;
    f.matrices.assign(k + 1, {});
    for (unsigned mask = 0; mask < f.regimes; ++mask) {
      f.regime_of_cone.push_back(mask);
      Pieces pc = base;
      for (int j = 0; j < p; ++j) {
        if (!((mask >> j) & 1u)) continue;
        pc.phi0 += deltas[j].phi0;
        for (int g = 0; g < k - 1; ++g) pc.gammas[g] += deltas[j].gammas[g];
        pc.beta += deltas[j].beta;
      }
      const std::vector<Mat> lags = lags_from_vecm(pc.phi0, pc.gammas, alpha * pc.beta.transpose(), k);
      for (int i = 0; i <= k; ++i) f.matrices[i].push_back(lags[i]);
    }
    return nlvar::make_model(p, k, Vec::Zero(p), f);
  });
}

inline Mat zero_window(int k, int p) { return Mat::Zero(k, p); }

inline std::vector<Vec> rows_of(const Mat& m) {
  std::vector<Vec> out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(m.row(i).transpose());
  return out;
}

}  // namespace fixtures
