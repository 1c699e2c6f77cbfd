#include "nlvar/linalg.hpp"

#include <cmath>

namespace nlvar::linalg {

double spectral_norm(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

double spectral_radius(const Mat& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == 1) return std::abs(a(0, 0));
  Eigen::EigenSolver<Mat> es(a, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::Index numerical_rank(const Mat& a, double rel_tol) {
  if (a.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(a);
  const Vec& s = svd.singularValues();
  if (s(0) == 0.0) return 0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++rank;
  }
  return rank;
}

void canonicalize_signs(Mat& columns) {
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    for (Eigen::Index i = 0; i < columns.rows(); ++i) {
      if (std::abs(columns(i, j)) > 1e-12) {
        if (columns(i, j) < 0) columns.col(j) *= -1.0;
        break;
      }
    }
  }
}

Mat orthogonal_complement(const Mat& columns) {
  const Eigen::Index p = columns.rows();
  const Eigen::Index r = columns.cols();
  if (r == 0) return Mat::Identity(p, p);
  if (r == p) return Mat(p, 0);
  // Full U of the SVD spans R^p; its trailing p - r columns span the complement.
  Eigen::JacobiSVD<Mat> svd(columns, Eigen::ComputeFullU);
  Mat perp = svd.matrixU().rightCols(p - r);
  // Re-orthonormalize against the supplied columns so perp' * columns is at
  // round-off level regardless of SVD accuracy.
  perp -= columns * (columns.transpose() * perp);
  Eigen::HouseholderQR<Mat> qr(perp);
  perp = qr.householderQ() * Mat::Identity(p, p - r);
  canonicalize_signs(perp);
  return perp;
}

Mat null_space(const Mat& a, double rel_tol) {
  const Eigen::Index n = a.cols();
  if (a.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeFullV);
  const Eigen::Index rank = numerical_rank(a, rel_tol);
  Mat basis = svd.matrixV().rightCols(n - rank);
  canonicalize_signs(basis);
  return basis;
}

bool is_orthogonal(const Mat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a.transpose() * a - Mat::Identity(a.rows(), a.cols())).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace nlvar::linalg
