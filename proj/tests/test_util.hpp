#pragma once

#include "sensched/covariance.hpp"
#include "sensched/system.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <cstdint>
#include <vector>

namespace test_util {

// n = m = 1 with A = C = W = V = Sigma0 = 1. Hand-computable moments:
// Sigma_{x1 x1} = 1, Sigma_{y1 y1} = 2, Sigma_{x2 x2} = 2, ...
inline sensched::SystemParams scalar_identity() {
  sensched::SystemParams p;
  p.n = 1;
  p.m = 1;
  p.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
  p.C = Eigen::MatrixXd::Constant(1, 1, 1.0);
  p.W = Eigen::MatrixXd::Constant(1, 1, 1.0);
  p.V = Eigen::MatrixXd::Constant(1, 1, 1.0);
  p.Sigma0 = Eigen::MatrixXd::Constant(1, 1, 1.0);
  return p;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

// Box-Muller over the deterministic uniform stream, so Gaussian draws
// reproduce bit-for-bit across platforms.
class GaussianRng {
 public:
  explicit GaussianRng(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = rng_.next();
    while (u1 <= 0.0) u1 = rng_.next();
    const double u2 = rng_.next();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * M_PI * u2;
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
  }

  Eigen::VectorXd vector(int size) {
    Eigen::VectorXd v(size);
    for (int i = 0; i < size; ++i) v(i) = next();
    return v;
  }

 private:
  sensched::UniformRng rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Empirical second moments from simulated trajectories, with enough
// bookkeeping to compute a standard error for every entry.
struct EmpiricalCovariances {
  int n = 0;
  int m = 0;
  int T = 0;
  std::int64_t samples = 0;
  // sums and sums of squares of the products, per ordered pair of steps
  std::vector<Eigen::MatrixXd> xx_sum, xx_sq;  // T*T blocks of n x n
  std::vector<Eigen::MatrixXd> xy_sum, xy_sq;  // T*T blocks of n x m
  std::vector<Eigen::MatrixXd> yy_sum, yy_sq;  // T*T blocks of m x m

  Eigen::MatrixXd mean(const std::vector<Eigen::MatrixXd>& sum, int i, int j) const {
    return sum[static_cast<std::size_t>(i) * T + j] / static_cast<double>(samples);
  }
  Eigen::MatrixXd stderr_of_mean(const std::vector<Eigen::MatrixXd>& sum,
                                 const std::vector<Eigen::MatrixXd>& sq, int i, int j) const {
    const double N = static_cast<double>(samples);
    const Eigen::MatrixXd mu = sum[static_cast<std::size_t>(i) * T + j] / N;
    Eigen::MatrixXd var =
        (sq[static_cast<std::size_t>(i) * T + j] - N * mu.cwiseProduct(mu)) / (N - 1.0);
    return (var.cwiseMax(0.0) / N).cwiseSqrt();
  }
};

inline EmpiricalCovariances simulate_moments(const sensched::SystemParams& params, int T,
                                             std::int64_t samples, std::uint64_t seed) {
  const int n = params.n;
  const int m = params.m;
  EmpiricalCovariances emp;
  emp.n = n;
  emp.m = m;
  emp.T = T;
  emp.samples = samples;
  const auto zero_blocks = [&](int rows, int cols) {
    return std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(T) * T,
                                        Eigen::MatrixXd::Zero(rows, cols));
  };
  emp.xx_sum = zero_blocks(n, n);
  emp.xx_sq = zero_blocks(n, n);
  emp.xy_sum = zero_blocks(n, m);
  emp.xy_sq = zero_blocks(n, m);
  emp.yy_sum = zero_blocks(m, m);
  emp.yy_sq = zero_blocks(m, m);

  const Eigen::MatrixXd L0 = Eigen::LLT<Eigen::MatrixXd>(params.Sigma0).matrixL();
  const Eigen::MatrixXd Lw = Eigen::LLT<Eigen::MatrixXd>(params.W).matrixL();
  const Eigen::MatrixXd Lv = Eigen::LLT<Eigen::MatrixXd>(params.V).matrixL();

  GaussianRng rng(seed);
  std::vector<Eigen::VectorXd> xs(T), ys(T);
  for (std::int64_t s = 0; s < samples; ++s) {
    Eigen::VectorXd x = L0 * rng.vector(n);
    for (int k = 0; k < T; ++k) {
      xs[k] = x;
      ys[k] = params.C * x + Lv * rng.vector(m);
      if (k + 1 < T) x = params.A * x + Lw * rng.vector(n);
    }
    for (int i = 0; i < T; ++i)
      for (int j = 0; j < T; ++j) {
        const std::size_t idx = static_cast<std::size_t>(i) * T + j;
        const Eigen::MatrixXd pxx = xs[i] * xs[j].transpose();
        const Eigen::MatrixXd pxy = xs[i] * ys[j].transpose();
        const Eigen::MatrixXd pyy = ys[i] * ys[j].transpose();
        emp.xx_sum[idx] += pxx;
        emp.xx_sq[idx] += pxx.cwiseProduct(pxx);
        emp.xy_sum[idx] += pxy;
        emp.xy_sq[idx] += pxy.cwiseProduct(pxy);
        emp.yy_sum[idx] += pyy;
        emp.yy_sq[idx] += pyy.cwiseProduct(pyy);
      }
  }
  return emp;
}

// Max entrywise deviation of `theory` from the empirical mean, measured in
// standard errors (entries with zero spread must match within 1e-12).
inline double max_sigma_deviation(const Eigen::MatrixXd& theory, const Eigen::MatrixXd& mean,
                                  const Eigen::MatrixXd& se) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < theory.rows(); ++i)
    for (Eigen::Index j = 0; j < theory.cols(); ++j) {
      const double dev = std::abs(theory(i, j) - mean(i, j));
      const double scale = se(i, j);
      worst = std::max(worst, scale > 0.0 ? dev / scale : (dev > 1e-12 ? 1e9 : 0.0));
    }
  return worst;
}

}  // namespace test_util
