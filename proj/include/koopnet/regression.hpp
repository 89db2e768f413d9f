#pragma once

#include <Eigen/Dense>

namespace koopnet {

struct FitOptions {
  double ridge = 0.0;       // Tikhonov weight on the Gram matrix
  double svd_rcond = 1e-10; // relative singular-value cutoff of the pseudo-inverse
};

/// Moore-Penrose pseudo-inverse of a symmetric PSD Gram matrix, truncating
/// singular values below rcond * sigma_max.
Eigen::MatrixXd pinv_psd(const Eigen::MatrixXd& G, double rcond);

/// Least-squares operator M = (Y X^T)(X X^T + ridge I)^+, i.e. the minimizer
/// of ||Y - M X||_F acting on column data from the left. X is (p x m), Y is
/// (q x m); the result is (q x p).
Eigen::MatrixXd lsq_operator(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                             const FitOptions& opts = {});

/// Induced one-norm (maximum absolute column sum).
double induced_one_norm(const Eigen::MatrixXd& M);

}  // namespace koopnet
