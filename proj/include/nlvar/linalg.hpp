#pragma once

#include "nlvar/types.hpp"

namespace nlvar::linalg {

/// Largest singular value.
double spectral_norm(const Mat& a);

/// Largest eigenvalue modulus; 0 for empty matrices.
double spectral_radius(const Mat& a);

/// Number of singular values above rel_tol * sigma_max (0 for a zero matrix).
Eigen::Index numerical_rank(const Mat& a, double rel_tol);

/// Flip column signs so the first entry with |x| > 1e-12 is positive.
void canonicalize_signs(Mat& columns);

/// Orthonormal basis of the orthogonal complement of span(columns), with
/// canonical signs. `columns` is assumed to have orthonormal columns.
Mat orthogonal_complement(const Mat& columns);

/// Orthonormal right null-space basis of `a` at relative tolerance rel_tol.
Mat null_space(const Mat& a, double rel_tol);

bool is_orthogonal(const Mat& a, double tol);

}  // namespace nlvar::linalg
