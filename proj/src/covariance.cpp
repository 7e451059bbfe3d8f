#include "sensched/covariance.hpp"

#include <Eigen/Cholesky>

#include <stdexcept>
#include <string>

namespace sensched {

namespace {

std::vector<Eigen::MatrixXd> matrix_powers(const Eigen::MatrixXd& A, int count) {
  std::vector<Eigen::MatrixXd> pow;
  pow.reserve(count);
  pow.push_back(Eigen::MatrixXd::Identity(A.rows(), A.cols()));
  for (int p = 1; p < count; ++p) pow.push_back(pow.back() * A);
  return pow;
}

// Sigma_{x_i x_j} for j <= i with precomputed powers of A.
Eigen::MatrixXd xx_block(const std::vector<Eigen::MatrixXd>& A_pow, const Eigen::MatrixXd& Sigma0,
                         const Eigen::MatrixXd& W, int i, int j) {
  Eigen::MatrixXd S = A_pow[i] * Sigma0 * A_pow[j].transpose();
  for (int s = 0; s < j; ++s) S += A_pow[i - 1 - s] * W * A_pow[j - 1 - s].transpose();
  return S;
}

void check_step(int step, const char* what) {
  if (step < 0) throw std::invalid_argument(std::string(what) + ": step must be nonnegative");
}

}  // namespace

const Eigen::MatrixXd& CovarianceCache::A_power(int p) const { return A_pow.at(p); }

Eigen::MatrixXd CovarianceCache::state_state(int i, int j) const {
  if (i < 0 || j < 0 || i >= T || j >= T) throw std::out_of_range("state_state: step out of range");
  if (j <= i) return xx_lower[static_cast<std::size_t>(i) * (i + 1) / 2 + j];
  return xx_lower[static_cast<std::size_t>(j) * (j + 1) / 2 + i].transpose();
}

const Eigen::MatrixXd& CovarianceCache::state_meas(int t, int j) const {
  if (t < 0 || j < 0 || t >= T || j >= T) throw std::out_of_range("state_meas: step out of range");
  return xy[static_cast<std::size_t>(t) * T + j];
}

const Eigen::MatrixXd& CovarianceCache::meas_meas(int i, int j) const {
  if (i < 0 || j < 0 || i >= T || j >= T) throw std::out_of_range("meas_meas: step out of range");
  return yy[static_cast<std::size_t>(i) * T + j];
}

const Eigen::MatrixXd& CovarianceCache::state_meas_row(int k) const {
  if (k < 0 || k >= T) throw std::out_of_range("state_meas_row: step out of range");
  return x_row[k];
}

Eigen::MatrixXd state_state_cov(const SystemParams& params, int i, int j) {
  check_step(i, "state_state_cov");
  check_step(j, "state_state_cov");
  if (j > i) return state_state_cov(params, j, i).transpose();
  const auto A_pow = matrix_powers(params.A, i + 1);
  return xx_block(A_pow, params.Sigma0, params.W, i, j);
}

Eigen::MatrixXd state_meas_cov(const SystemParams& params, int t, int j) {
  check_step(t, "state_meas_cov");
  check_step(j, "state_meas_cov");
  return state_state_cov(params, t, j) * params.C.transpose();
}

Eigen::MatrixXd meas_meas_cov(const SystemParams& params, int i, int j) {
  check_step(i, "meas_meas_cov");
  check_step(j, "meas_meas_cov");
  Eigen::MatrixXd S = params.C * state_state_cov(params, i, j) * params.C.transpose();
  if (i == j) S += params.V;
  return S;
}

CovarianceCache build_cache(const SystemParams& params, int T) {
  if (T < 1) throw std::invalid_argument("build_cache: horizon must be at least 1");
  CovarianceCache cache;
  cache.n = params.n;
  cache.m = params.m;
  cache.T = T;
  cache.A_pow = matrix_powers(params.A, T);

  cache.xx_lower.reserve(static_cast<std::size_t>(T) * (T + 1) / 2);
  for (int i = 0; i < T; ++i)
    for (int j = 0; j <= i; ++j) {
      Eigen::MatrixXd S = xx_block(cache.A_pow, params.Sigma0, params.W, i, j);
      if (i == j) S = 0.5 * (S + S.transpose());
      cache.xx_lower.push_back(std::move(S));
    }

  cache.xy.resize(static_cast<std::size_t>(T) * T);
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < T; ++j)
      cache.xy[static_cast<std::size_t>(t) * T + j] = cache.state_state(t, j) * params.C.transpose();

  // Lower blocks from the formula, upper blocks as exact transposes, so the
  // assembled matrix is symmetric to the bit.
  cache.yy.resize(static_cast<std::size_t>(T) * T);
  for (int i = 0; i < T; ++i)
    for (int j = 0; j <= i; ++j) {
      Eigen::MatrixXd S = params.C * cache.state_state(i, j) * params.C.transpose();
      if (i == j) {
        S += params.V;
        S = 0.5 * (S + S.transpose());
      }
      cache.yy[static_cast<std::size_t>(i) * T + j] = S;
      if (i != j) cache.yy[static_cast<std::size_t>(j) * T + i] = S.transpose();
    }

  cache.x_row.resize(T);
  for (int k = 0; k < T; ++k) {
    Eigen::MatrixXd row(params.n, cache.meas_count(k));
    for (int j = 0; j <= k; ++j)
      row.middleCols(static_cast<Eigen::Index>(j) * params.m, params.m) = cache.state_meas(k, j);
    cache.x_row[k] = std::move(row);
  }

  const int mT = cache.meas_count(T - 1);
  cache.YY.resize(mT, mT);
  for (int i = 0; i < T; ++i)
    for (int j = 0; j < T; ++j)
      cache.YY.block(static_cast<Eigen::Index>(i) * params.m, static_cast<Eigen::Index>(j) * params.m,
                     params.m, params.m) = cache.meas_meas(i, j);

  Eigen::LLT<Eigen::MatrixXd> llt(cache.YY);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "build_cache: assembled measurement covariance is not positive definite "
        "(check V and the system parameters)");
  cache.YY_chol = llt.matrixL();
  return cache;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> submatrix_views(const CovarianceCache& cache, int k,
                                                            std::span<const int> S) {
  if (k < 0 || k >= cache.T) throw std::out_of_range("submatrix_views: step out of range");
  const int mk = cache.meas_count(k);
  const int s = static_cast<int>(S.size());
  Eigen::MatrixXd Sxs(cache.n, s);
  Eigen::MatrixXd Sss(s, s);
  const Eigen::MatrixXd& row = cache.state_meas_row(k);
  for (int a = 0; a < s; ++a) {
    if (S[a] < 0 || S[a] >= mk)
      throw std::out_of_range("submatrix_views: index " + std::to_string(S[a]) +
                              " outside [0, " + std::to_string(mk) + ")");
    Sxs.col(a) = row.col(S[a]);
    for (int b = 0; b < s; ++b) Sss(a, b) = cache.YY(S[a], S[b]);
  }
  return {std::move(Sxs), std::move(Sss)};
}

}  // namespace sensched
