#include "fliv/linmod.hpp"

#include <cmath>
#include <sstream>

#include "fliv/errors.hpp"

namespace fliv {

namespace {

void check_weights(const std::optional<Vector>& weights, Eigen::Index n) {
  if (!weights) return;
  if (weights->size() != n) {
    std::ostringstream msg;
    msg << "weights have length " << weights->size() << ", expected " << n;
    fail(ErrorKind::Dimension, msg.str());
  }
  if (!(weights->array() > 0.0).all()) fail(ErrorKind::InvalidArgument, "weights must be positive");
}

}  // namespace

LeastSquaresSolver::LeastSquaresSolver(const Matrix& design, const std::optional<Vector>& weights) {
  const Eigen::Index n = design.rows();
  const Eigen::Index p = design.cols();
  if (n <= p) {
    std::ostringstream msg;
    msg << "underdetermined least squares: " << n << " rows for " << p << " columns";
    fail(ErrorKind::Underdetermined, msg.str());
  }
  check_weights(weights, n);
  qr_.setThreshold(kRankTolerance);
  if (weights) {
    sqrt_weights_ = weights->array().sqrt().matrix();
    qr_.compute(sqrt_weights_->asDiagonal() * design);
  } else {
    qr_.compute(design);
  }
  if (qr_.rank() < p) {
    std::ostringstream msg;
    msg << "design is rank deficient: rank " << qr_.rank() << " of " << p << " columns ("
        << (p - qr_.rank()) << " dependent)";
    fail(ErrorKind::RankDeficient, msg.str());
  }
}

Vector LeastSquaresSolver::solve(const Vector& response) const {
  if (response.size() != qr_.rows()) fail(ErrorKind::Dimension, "response length differs from design rows");
  if (sqrt_weights_) return qr_.solve((sqrt_weights_->array() * response.array()).matrix());
  return qr_.solve(response);
}

Matrix LeastSquaresSolver::solve(const Matrix& responses) const {
  if (responses.rows() != qr_.rows()) fail(ErrorKind::Dimension, "response rows differ from design rows");
  if (sqrt_weights_) return qr_.solve(sqrt_weights_->asDiagonal() * responses);
  return qr_.solve(responses);
}

RegressionFit ols_fit(const Matrix& design, const Vector& response, const std::optional<Vector>& weights) {
  if (response.size() != design.rows()) fail(ErrorKind::Dimension, "response length differs from design rows");
  LeastSquaresSolver solver(design, weights);
  RegressionFit fit;
  fit.coefficients = solver.solve(response);
  fit.fitted = design * fit.coefficients;
  fit.residuals = response - fit.fitted;
  fit.rss = weights ? (weights->array() * fit.residuals.array().square()).sum()
                    : fit.residuals.squaredNorm();
  return fit;
}

Matrix multiresponse_ols(const Matrix& design, const Matrix& responses, const std::optional<Vector>& weights) {
  if (responses.cols() < 1) fail(ErrorKind::Dimension, "need at least one response column");
  if (responses.rows() != design.rows()) fail(ErrorKind::Dimension, "response rows differ from design rows");
  return LeastSquaresSolver(design, weights).solve(responses);
}

Matrix cross_covariance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) fail(ErrorKind::Dimension, "cross-covariance inputs have different row counts");
  const Eigen::Index n = a.rows();
  if (n < 2) fail(ErrorKind::InsufficientData, "cross-covariance needs at least 2 rows");
  const Matrix ac = a.rowwise() - a.colwise().mean();
  const Matrix bc = b.rowwise() - b.colwise().mean();
  return (ac.transpose() * bc) / static_cast<double>(n - 1);
}

Matrix nearest_psd(const Matrix& s) {
  if (s.rows() != s.cols()) fail(ErrorKind::Dimension, "nearest_psd needs a square matrix");
  const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8) {
    std::ostringstream msg;
    msg << "matrix is not symmetric (max |S - S^T| = " << asym << ")";
    fail(ErrorKind::AsymmetricInput, msg.str());
  }
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) fail(ErrorKind::Internal, "eigendecomposition failed");
  if (eig.eigenvalues().minCoeff() >= 0.0) return sym;
  const Vector clamped = eig.eigenvalues().cwiseMax(0.0);
  const Matrix& v = eig.eigenvectors();
  Matrix out = v * clamped.asDiagonal() * v.transpose();
  return 0.5 * (out + out.transpose());
}

Matrix psd_factor(const Matrix& s) {
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (s + s.transpose()));
  if (eig.info() != Eigen::Success) fail(ErrorKind::Internal, "eigendecomposition failed");
  const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
  if (eig.eigenvalues().minCoeff() < -1e-8 * scale)
    fail(ErrorKind::Internal, "covariance matrix is not positive semidefinite");
  return eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

}  // namespace fliv
