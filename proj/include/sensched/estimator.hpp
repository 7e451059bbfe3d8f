#pragma once

#include "sensched/covariance.hpp"

#include <span>
#include <vector>

namespace sensched {

struct Schedule;

// Weighted-error cost for one step: the objective summand is
// trace(Q Sigma Q') = trace(M Sigma) with M = Q'Q.
struct CostMatrix {
  int k = 0;          // step the cost applies to (0-based)
  Eigen::MatrixXd Q;  // n' x n
  Eigen::MatrixXd M;  // n x n, Q'Q
};

CostMatrix make_cost(int k, Eigen::MatrixXd Q);

// Dense coefficients of a linear filter estimating x_k from Y_k. Column
// k*m + j weights sensor j at step k; columns outside the governing support
// are zero.
struct FilterCoefficients {
  int k = 0;
  Eigen::MatrixXd K;  // n x m(k+1)
};

// Best linear estimator of x_k from the measurements in S:
// K_S = Sigma_{x_k Y_{k,S}} Sigma_{Y_{k,S} Y_{k,S}}^{-1}, solved by Cholesky,
// scattered into the dense layout. Empty S yields all zeros (the estimate is
// the zero prior mean).
FilterCoefficients optimal_coefficients(const CovarianceCache& cache, int k,
                                        std::span<const int> S);

// Expected M-weighted squared error of an arbitrary linear filter:
// trace(M (K Syy K' - Sxy K' - K Syx + Sxx)). Nonnegative for PSD M; values
// in [-1e-9, 0) from cancellation are clamped to 0.
double cost_c(const CovarianceCache& cache, const CostMatrix& cost,
              const FilterCoefficients& coeffs);

// Minimum of cost_c over filters supported on S, evaluated in closed form as
// the Schur-complement trace trace(M (Sxx - SxS SSS^{-1} SSx)).
double restricted_error(const CovarianceCache& cache, const CostMatrix& cost, int k,
                        std::span<const int> S);

// Independent cross-check: textbook predict/update covariance recursion run
// on the sensors the schedule activates at each step (prediction only when a
// step activates none). Returns sum_k trace(Q_k Sigma_{k|k} Q_k').
double recursive_kf_error(const SystemParams& params, const std::vector<CostMatrix>& costs,
                          const Schedule& schedule);

// Batch objective of a schedule: sum_k restricted_error over the schedule's
// support restricted to the measurements available at step k.
double schedule_objective(const CovarianceCache& cache, const std::vector<CostMatrix>& costs,
                          const Schedule& schedule);

}  // namespace sensched
