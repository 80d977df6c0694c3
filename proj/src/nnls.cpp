#include "ehsched/nnls.hpp"

#include "ehsched/errors.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <limits>
#include <vector>

namespace ehsched {

namespace {

// Least squares on the passive columns; other entries are zero.
Eigen::VectorXd passive_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                              const std::vector<bool>& passive) {
  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
  }
  Eigen::VectorXd z = Eigen::VectorXd::Zero(a.cols());
  if (cols.empty()) return z;
  Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) sub.col(static_cast<Eigen::Index>(i)) = a.col(cols[i]);
  const Eigen::VectorXd zs = sub.colPivHouseholderQr().solve(b);
  for (std::size_t i = 0; i < cols.size(); ++i) z[cols[i]] = zs[static_cast<Eigen::Index>(i)];
  return z;
}

}  // namespace

NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, int max_iters) {
  if (a.rows() != b.size()) throw ShapeError("nnls: A and b disagree on the row count");
  const Eigen::Index m = a.cols();
  if (max_iters <= 0) max_iters = static_cast<int>(3 * m + 10);
  NnlsResult res;
  res.x = Eigen::VectorXd::Zero(m);
  if (m == 0) {
    res.residual_norm = b.norm();
    return res;
  }
  std::vector<bool> passive(static_cast<std::size_t>(m), false);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() *
                     a.cwiseAbs().maxCoeff() * static_cast<double>(std::max(a.rows(), m));

  Eigen::VectorXd& x = res.x;
  for (; res.iterations < max_iters; ++res.iterations) {
    const Eigen::VectorXd w = a.transpose() * (b - a * x);
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w[j] > best_w) {
        best_w = w[j];
        best = j;
      }
    }
    if (best < 0) break;
    passive[static_cast<std::size_t>(best)] = true;

    for (;;) {
      Eigen::VectorXd z = passive_solve(a, b, passive);
      bool all_positive = true;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) all_positive = false;
      }
      if (all_positive) {
        x = z;
        break;
      }
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z[j] <= 0.0) {
          alpha = std::min(alpha, x[j] / (x[j] - z[j]));
        }
      }
      x += alpha * (z - x);
      for (Eigen::Index j = 0; j < m; ++j) {
        if (passive[static_cast<std::size_t>(j)] && x[j] <= tol) {
          passive[static_cast<std::size_t>(j)] = false;
          x[j] = 0.0;
        }
      }
    }
  }
  res.residual_norm = (a * x - b).norm();
  return res;
}

}  // namespace ehsched
