#include "koopnet/regression.hpp"

#include <stdexcept>

namespace koopnet {

Eigen::MatrixXd pinv_psd(const Eigen::MatrixXd& G, double rcond) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
  if (eig.info() != Eigen::Success) throw std::runtime_error("pinv_psd: eigensolver failed");
  const Eigen::VectorXd& w = eig.eigenvalues();
  const double cutoff = rcond * w.cwiseAbs().maxCoeff();
  Eigen::VectorXd winv = Eigen::VectorXd::Zero(w.size());
  for (Eigen::Index k = 0; k < w.size(); ++k)
    if (w[k] > cutoff) winv[k] = 1.0 / w[k];
  return eig.eigenvectors() * winv.asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::MatrixXd lsq_operator(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                             const FitOptions& opts) {
  if (X.cols() != Y.cols()) throw std::invalid_argument("lsq_operator: sample count mismatch");
  if (X.cols() == 0) throw std::invalid_argument("lsq_operator: empty data");
  Eigen::MatrixXd G = X * X.transpose();
  if (opts.ridge > 0.0) G.diagonal().array() += opts.ridge;
  return (Y * X.transpose()) * pinv_psd(G, opts.svd_rcond);
}

double induced_one_norm(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  return M.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace koopnet
