#pragma once

#include "sensched/system.hpp"

#include <span>
#include <utility>
#include <vector>

namespace sensched {

// Exact joint second moments of states and measurements over a horizon.
//
// Steps are 0-based throughout the API: step k holds state x_{k+1} and
// measurement y_{k+1} of the textbook 1-based recursion, and the stacked
// measurement vector Y_k = [y_0', ..., y_k']' has m*(k+1) entries. Entry
// k*m + j of Y_{T-1} is sensor j at step k.
//
// Blocks follow from unrolling the dynamics onto the initial state:
//   Sigma_{x_i x_j} = A^i Sigma0 (A^j)' + sum_{s<j} A^{i-1-s} W (A^{j-1-s})'   (j <= i)
//   Sigma_{x_t y_j} = Sigma_{x_t x_j} C'
//   Sigma_{y_i y_j} = C Sigma_{x_i x_j} C' + (V if i == j)
struct CovarianceCache {
  int n = 0;
  int m = 0;
  int T = 0;

  std::vector<Eigen::MatrixXd> A_pow;     // A^0 .. A^{T-1}
  std::vector<Eigen::MatrixXd> xx_lower;  // Sigma_{x_i x_j} for j <= i, packed i*(i+1)/2 + j
  std::vector<Eigen::MatrixXd> xy;        // Sigma_{x_t y_j}, all pairs, index t*T + j
  std::vector<Eigen::MatrixXd> yy;        // Sigma_{y_i y_j}, all pairs, index i*T + j
  std::vector<Eigen::MatrixXd> x_row;     // Sigma_{x_k Y_k}, n x m(k+1), per step k
  Eigen::MatrixXd YY;                     // Sigma_{Y_{T-1} Y_{T-1}}, mT x mT, exactly symmetric
  Eigen::MatrixXd YY_chol;                // lower-triangular Cholesky factor of YY

  int meas_count(int k) const { return m * (k + 1); }

  const Eigen::MatrixXd& A_power(int p) const;
  Eigen::MatrixXd state_state(int i, int j) const;  // any i, j < T
  const Eigen::MatrixXd& state_meas(int t, int j) const;
  const Eigen::MatrixXd& meas_meas(int i, int j) const;
  const Eigen::MatrixXd& state_meas_row(int k) const;  // Sigma_{x_k Y_k}
};

// Definitional single-block forms, valid for any step pair (0-based, no
// horizon limit). build_cache assembles the same formulas with the powers
// of A computed once.
Eigen::MatrixXd state_state_cov(const SystemParams& params, int i, int j);
Eigen::MatrixXd state_meas_cov(const SystemParams& params, int t, int j);
Eigen::MatrixXd meas_meas_cov(const SystemParams& params, int i, int j);

// Populates every block for a horizon of T steps and factorizes the
// assembled mT x mT measurement covariance. Throws std::runtime_error if
// that matrix is not positive definite (invalid V or numerical breakdown).
CovarianceCache build_cache(const SystemParams& params, int T);

// Column restriction Sigma_{x_k Y_{k,S}} and principal submatrix
// Sigma_{Y_{k,S} Y_{k,S}} for an index set S within [0, m(k+1)). Returns
// fresh dense copies; the solver factorizes them in place.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> submatrix_views(const CovarianceCache& cache,
                                                            int k, std::span<const int> S);

}  // namespace sensched
