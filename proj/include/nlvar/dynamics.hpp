#pragma once

#include "nlvar/model.hpp"

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace nlvar {

/// f_0^{-1}(y). Threshold families use the closed form that locates the
/// regime from b'y with b' = a' (Phi_0^(0))^{-1}; conic families try each
/// regime; Linear and Smoothed solve the (affine) f_0 directly.
/// Throws NoRegimeAccepts when no regime candidate is consistent.
Vec f0_inverse(const ModelSpec& model, const Vec& y);

/// Reference inverse for piecewise families: try every regime and accept the
/// candidate that lies in its own regime.
Vec f0_inverse_search(const ModelSpec& model, const Vec& y);

/// Shocks given explicitly, one row per period (T x p).
struct GivenShocks {
  Mat u;
};

struct GaussianShocks {
  Mat sigma;
  std::uint64_t seed = 0;
  int T = 1;
};

/// Zero shocks except u at period tau (1-based).
struct ImpulseThenZero {
  Vec u;
  int tau = 1;
  int T = 1;
};

using ShockPlan = std::variant<GivenShocks, GaussianShocks, ImpulseThenZero>;

/// path row t-1 holds z_t for t = 1..T; window0 row i holds z_{-i} for
/// i = 0..k-1; shocks row t-1 holds the realized u_t.
struct PathResult {
  Mat path;
  Mat window0;
  Mat shocks;

  int T() const { return static_cast<int>(path.rows()); }
  /// z_t for 1-k <= t <= T.
  Vec z(int t) const;
  /// The window z_t, z_{t-1}, ..., z_{t-n+1}.
  std::vector<Vec> window(int t, int n) const;
};

/// Iterates z_t = f_0^{-1}(c + sum_i f_i(z_{t-i}) + u_t). When upsilon is
/// given the plan's draws are structural shocks e_t and u_t = upsilon e_t.
/// f_0 inversion failures are rethrown with the period attached.
PathResult simulate(const ModelSpec& model, const Mat& window0, const ShockPlan& shocks,
                    const std::optional<Mat>& upsilon = std::nullopt);

/// T x p matrix of iid N(0, sigma) draws from mt19937_64 seeded with seed.
/// Throws NotPositiveDefinite when the Cholesky factorization fails.
Mat gaussian_shocks(const Mat& sigma, int T, std::uint64_t seed);

/// max_t |f_0(z_t) - c - sum_i f_i(z_{t-i}) - u_t| / (1 + |z_t|).
double path_residual(const ModelSpec& model, const PathResult& result);

}  // namespace nlvar
