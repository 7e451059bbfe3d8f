#include "sensched/estimator.hpp"

#include "sensched/problem.hpp"

#include <Eigen/Cholesky>

#include <stdexcept>
#include <string>

namespace sensched {

namespace {

// Trace of a PSD-weighted PSD form is nonnegative; absorb cancellation noise.
double clamp_error(double value) {
  if (value < 0.0 && value >= -1e-9) return 0.0;
  return value;
}

void check_cost(const CostMatrix& cost, int n, int k, const char* what) {
  if (cost.k != k)
    throw std::invalid_argument(std::string(what) + ": cost is for step " +
                                std::to_string(cost.k) + ", expected " + std::to_string(k));
  if (cost.M.rows() != n || cost.M.cols() != n)
    throw std::invalid_argument(std::string(what) + ": M must be " + std::to_string(n) + "x" +
                                std::to_string(n));
}

}  // namespace

CostMatrix make_cost(int k, Eigen::MatrixXd Q) {
  CostMatrix cost;
  cost.k = k;
  cost.M = Q.transpose() * Q;
  cost.M = 0.5 * (cost.M + cost.M.transpose());
  cost.Q = std::move(Q);
  return cost;
}

FilterCoefficients optimal_coefficients(const CovarianceCache& cache, int k,
                                        std::span<const int> S) {
  FilterCoefficients coeffs;
  coeffs.k = k;
  coeffs.K = Eigen::MatrixXd::Zero(cache.n, cache.meas_count(k));
  if (S.empty()) return coeffs;

  auto [Sxs, Sss] = submatrix_views(cache, k, S);
  Eigen::LLT<Eigen::MatrixXd> llt(Sss);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("optimal_coefficients: measurement submatrix not positive definite");
  Eigen::MatrixXd Ks = llt.solve(Sxs.transpose()).transpose();  // Sxs * Sss^{-1}
  for (int a = 0; a < static_cast<int>(S.size()); ++a) coeffs.K.col(S[a]) = Ks.col(a);
  return coeffs;
}

double cost_c(const CovarianceCache& cache, const CostMatrix& cost,
              const FilterCoefficients& coeffs) {
  check_cost(cost, cache.n, coeffs.k, "cost_c");
  const int mk = cache.meas_count(coeffs.k);
  if (coeffs.K.rows() != cache.n || coeffs.K.cols() != mk)
    throw std::invalid_argument("cost_c: K must be " + std::to_string(cache.n) + "x" +
                                std::to_string(mk));

  const auto Syy = cache.YY.topLeftCorner(mk, mk);
  const Eigen::MatrixXd& Sxy = cache.state_meas_row(coeffs.k);
  Eigen::MatrixXd E = coeffs.K * Syy * coeffs.K.transpose();
  Eigen::MatrixXd cross = Sxy * coeffs.K.transpose();
  E -= cross;
  E -= cross.transpose();
  E += cache.state_state(coeffs.k, coeffs.k);
  return clamp_error((cost.M * E).trace());
}

double restricted_error(const CovarianceCache& cache, const CostMatrix& cost, int k,
                        std::span<const int> S) {
  check_cost(cost, cache.n, k, "restricted_error");
  const Eigen::MatrixXd Sxx = cache.state_state(k, k);
  if (S.empty()) return clamp_error((cost.M * Sxx).trace());

  auto [Sxs, Sss] = submatrix_views(cache, k, S);
  Eigen::LLT<Eigen::MatrixXd> llt(Sss);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("restricted_error: measurement submatrix not positive definite");
  // Sxs Sss^{-1} Ssx = Z'Z with Z = L^{-1} Ssx.
  Eigen::MatrixXd Z = llt.matrixL().solve(Sxs.transpose());
  Eigen::MatrixXd schur = Sxx - Z.transpose() * Z;
  return clamp_error((cost.M * schur).trace());
}

double recursive_kf_error(const SystemParams& params, const std::vector<CostMatrix>& costs,
                          const Schedule& schedule) {
  if (schedule.m != params.m)
    throw std::invalid_argument("recursive_kf_error: schedule sensor count mismatch");
  if (static_cast<int>(costs.size()) != schedule.T)
    throw std::invalid_argument("recursive_kf_error: need one cost matrix per step");

  const int n = params.n;
  double total = 0.0;
  Eigen::MatrixXd Sigma;  // posterior covariance of the previous step
  for (int k = 0; k < schedule.T; ++k) {
    check_cost(costs[k], n, k, "recursive_kf_error");
    Eigen::MatrixXd pred =
        (k == 0) ? params.Sigma0
                 : Eigen::MatrixXd(params.A * Sigma * params.A.transpose() + params.W);
    pred = 0.5 * (pred + pred.transpose());

    std::vector<int> active;
    for (int j = 0; j < params.m; ++j)
      if (schedule.active(k, j)) active.push_back(j);

    if (active.empty()) {
      Sigma = pred;  // no measurement: prediction only
    } else {
      const int a = static_cast<int>(active.size());
      Eigen::MatrixXd Ca(a, n);
      Eigen::MatrixXd Va(a, a);
      for (int r = 0; r < a; ++r) {
        Ca.row(r) = params.C.row(active[r]);
        for (int c = 0; c < a; ++c) Va(r, c) = params.V(active[r], active[c]);
      }
      Eigen::MatrixXd PCt = pred * Ca.transpose();
      Eigen::MatrixXd innov = Ca * PCt + Va;
      innov = 0.5 * (innov + innov.transpose());
      Eigen::LLT<Eigen::MatrixXd> llt(innov);
      if (llt.info() != Eigen::Success)
        throw std::runtime_error("recursive_kf_error: innovation covariance not positive definite");
      Eigen::MatrixXd gain = llt.solve(PCt.transpose()).transpose();  // PCt * innov^{-1}
      Sigma = pred - gain * PCt.transpose();
      Sigma = 0.5 * (Sigma + Sigma.transpose());
    }
    total += (costs[k].M * Sigma).trace();
  }
  return clamp_error(total);
}

double schedule_objective(const CovarianceCache& cache, const std::vector<CostMatrix>& costs,
                          const Schedule& schedule) {
  if (schedule.m != cache.m || schedule.T != cache.T)
    throw std::invalid_argument("schedule_objective: schedule dimensions mismatch");
  if (static_cast<int>(costs.size()) != cache.T)
    throw std::invalid_argument("schedule_objective: need one cost matrix per step");
  double total = 0.0;
  for (int k = 0; k < cache.T; ++k) {
    const std::vector<int> S = schedule.support_up_to(k);
    total += restricted_error(cache, costs[k], k, S);
  }
  return total;
}

}  // namespace sensched
