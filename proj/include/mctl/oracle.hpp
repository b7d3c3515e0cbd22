#pragma once

#include "mctl/dataset.hpp"

#include <functional>

// Brute-force reference computations for checking the solver. They share no
// code with the routines they check and are meant for small problems only.
namespace mctl::oracle {

using LossFn = std::function<double(const Matrix&)>;

/// Central differences, entry (i,j) perturbed by h_ij = base_h * (1 + |Z_ij|).
Matrix fd_gradient(const LossFn& loss, const Matrix& Z, double base_h = 1e-5);

/// Literal double sum (1/n_T^2) sum_pq W_pq |g_p - t_q|^2 over columns.
double lgdm_pairwise(const Matrix& generated, const Matrix& target, const Matrix& W);

/// Singular value soft-thresholding computed from the eigen-decomposition of
/// the smaller Gram matrix (S^T S or S S^T) instead of an SVD.
Matrix svt_reference(const Matrix& S, double threshold);

/// max_i |M v_i - lambda_i B v_i| / max(1, |M|_max) over the columns of V.
double generalized_eigen_residual(const Matrix& M, const Matrix& B, const Matrix& V, const Vector& lambda);

} // namespace mctl::oracle
