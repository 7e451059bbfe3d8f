#include "sensched/estimator.hpp"

#include "sensched/baselines.hpp"
#include "sensched/problem.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <vector>

using namespace sensched;

namespace {

// All subsets of [0, count) as sorted index vectors.
std::vector<std::vector<int>> all_subsets(int count) {
  std::vector<std::vector<int>> subsets;
  for (int bits = 0; bits < (1 << count); ++bits) {
    std::vector<int> S;
    for (int i = 0; i < count; ++i)
      if (bits & (1 << i)) S.push_back(i);
    subsets.push_back(std::move(S));
  }
  return subsets;
}

bool subset_of(const std::vector<int>& a, const std::vector<int>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

Schedule schedule_from_mask(int mask, int m, int T) {
  Schedule s = Schedule::zeros(m, T);
  for (int i = 0; i < m * T; ++i) s.gamma[i] = (mask >> i) & 1;
  return s;
}

}  // namespace

TEST_SUITE("estimator") {

TEST_CASE("scalar identity filter weights and errors") {
  const CovarianceCache cache = build_cache(test_util::scalar_identity(), 1);
  const CostMatrix cost = make_cost(0, Eigen::MatrixXd::Identity(1, 1));

  const std::vector<int> S{0};
  const FilterCoefficients opt = optimal_coefficients(cache, 0, S);
  CHECK(opt.K(0, 0) == doctest::Approx(0.5));  // Sigma_xy / Sigma_yy

  CHECK(cost_c(cache, cost, opt) == doctest::Approx(0.5));
  CHECK(restricted_error(cache, cost, 0, S) == doctest::Approx(0.5));  // 1 - 1/2
}

TEST_CASE("empty support returns the zero filter and the prior error") {
  const SystemParams params = generate_instance(InstanceSpec{3, 2, 2, 0.5, 0.01});
  const CovarianceCache cache = build_cache(params, 2);
  const CostMatrix cost = make_cost(1, Eigen::MatrixXd::Identity(3, 3));

  const std::vector<int> empty;
  const FilterCoefficients zero = optimal_coefficients(cache, 1, empty);
  CHECK(zero.K.cwiseAbs().maxCoeff() == 0.0);
  const double prior = cache.state_state(1, 1).trace();
  CHECK(cost_c(cache, cost, zero) == doctest::Approx(prior));
  CHECK(restricted_error(cache, cost, 1, empty) == doctest::Approx(prior));
}

TEST_CASE("uninformative measurements drive the coefficients to zero") {
  SystemParams params = generate_instance(InstanceSpec{2, 2, 3, 0.5, 0.01});
  params.V = 1e6 * Eigen::MatrixXd::Identity(2, 2);
  const CovarianceCache cache = build_cache(params, 2);
  const std::vector<int> all{0, 1, 2, 3};
  const FilterCoefficients opt = optimal_coefficients(cache, 1, all);
  CHECK(opt.K.cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("a zero cost weight makes every filter free") {
  const SystemParams params = generate_instance(InstanceSpec{2, 2, 5, 0.5, 0.01});
  const CovarianceCache cache = build_cache(params, 1);
  const CostMatrix cost = make_cost(0, Eigen::MatrixXd::Zero(2, 2));
  UniformRng rng(8);
  FilterCoefficients coeffs;
  coeffs.k = 0;
  coeffs.K = Eigen::MatrixXd::Zero(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) coeffs.K(i, j) = rng.next() - 0.5;
  CHECK(cost_c(cache, cost, coeffs) == 0.0);
}

TEST_CASE("cost_c rejects mismatched steps and shapes") {
  const CovarianceCache cache = build_cache(test_util::scalar_identity(), 2);
  const CostMatrix cost = make_cost(0, Eigen::MatrixXd::Identity(1, 1));
  FilterCoefficients coeffs;
  coeffs.k = 1;
  coeffs.K = Eigen::MatrixXd::Zero(1, 2);
  CHECK_THROWS_AS(cost_c(cache, cost, coeffs), std::invalid_argument);
  coeffs.k = 0;
  CHECK_THROWS_AS(cost_c(cache, cost, coeffs), std::invalid_argument);  // 2 cols, step 0 has 1
}

TEST_CASE("restricted error equals the optimal filter cost") {
  const SystemParams params = generate_instance(InstanceSpec{3, 3, 11, 0.5, 0.01});
  const CovarianceCache cache = build_cache(params, 2);
  const auto costs = total_error_costs(3, 2);
  for (int k = 0; k < 2; ++k) {
    for (const auto& S : all_subsets(cache.meas_count(k))) {
      const double direct = restricted_error(cache, costs[k], k, S);
      const double via_filter = cost_c(cache, costs[k], optimal_coefficients(cache, k, S));
      CHECK(std::abs(direct - via_filter) <= 1e-9);
    }
  }
}

TEST_CASE("restricted error is monotone under support growth") {
  const SystemParams params = generate_instance(InstanceSpec{3, 3, 11, 0.5, 0.01});
  const CovarianceCache cache = build_cache(params, 2);
  const auto costs = total_error_costs(3, 2);
  for (int k = 0; k < 2; ++k) {
    const auto subsets = all_subsets(cache.meas_count(k));
    std::vector<double> err(subsets.size());
    for (std::size_t s = 0; s < subsets.size(); ++s)
      err[s] = restricted_error(cache, costs[k], k, subsets[s]);
    for (std::size_t a = 0; a < subsets.size(); ++a)
      for (std::size_t b = 0; b < subsets.size(); ++b)
        if (subset_of(subsets[a], subsets[b])) CHECK(err[a] >= err[b] - 1e-9);
  }
}

TEST_CASE("perturbing the optimal coefficients never helps") {
  const SystemParams params = generate_instance(InstanceSpec{3, 2, 17, 0.5, 0.01});
  const CovarianceCache cache = build_cache(params, 2);
  const CostMatrix cost = make_cost(1, Eigen::MatrixXd::Identity(3, 3));
  const std::vector<int> S{0, 2, 3};
  const FilterCoefficients opt = optimal_coefficients(cache, 1, S);
  const double base = cost_c(cache, cost, opt);

  UniformRng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    FilterCoefficients perturbed = opt;
    for (int i = 0; i < perturbed.K.rows(); ++i)
      for (int idx : S) perturbed.K(i, idx) += 0.2 * rng.next() - 0.1;
    CHECK(cost_c(cache, cost, perturbed) >= base - 1e-9);
  }
}

TEST_CASE("cost_c is convex in the coefficients") {
  const SystemParams params = generate_instance(InstanceSpec{2, 2, 23, 0.5, 0.01});
  const CovarianceCache cache = build_cache(params, 2);
  const CostMatrix cost = make_cost(1, Eigen::MatrixXd::Identity(2, 2));
  UniformRng rng(31);
  const int cols = cache.meas_count(1);
  for (int trial = 0; trial < 100; ++trial) {
    FilterCoefficients k1, k2, mid;
    k1.k = k2.k = mid.k = 1;
    k1.K = Eigen::MatrixXd::Zero(2, cols);
    k2.K = Eigen::MatrixXd::Zero(2, cols);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < cols; ++j) {
        k1.K(i, j) = 2.0 * rng.next() - 1.0;
        k2.K(i, j) = 2.0 * rng.next() - 1.0;
      }
    const double lambda = rng.next();
    mid.K = lambda * k1.K + (1.0 - lambda) * k2.K;
    CHECK(cost_c(cache, cost, mid) <=
          lambda * cost_c(cache, cost, k1) + (1.0 - lambda) * cost_c(cache, cost, k2) + 1e-9);
  }
}

TEST_CASE("recursive filter matches the scalar Riccati value") {
  const SystemParams params = test_util::scalar_identity();
  const auto costs = total_error_costs(1, 1);
  Schedule all_on = Schedule::zeros(1, 1);
  all_on.gamma[0] = 1;
  CHECK(recursive_kf_error(params, costs, all_on) == doctest::Approx(0.5));
}

TEST_CASE("an all-zeros schedule reduces to pure prediction") {
  const SystemParams params = generate_instance(InstanceSpec{3, 2, 9, 0.5, 0.01});
  const int T = 3;
  const auto costs = total_error_costs(3, T);
  const Schedule off = Schedule::zeros(2, T);
  double expected = 0.0;
  for (int k = 0; k < T; ++k) expected += state_state_cov(params, k, k).trace();
  CHECK(recursive_kf_error(params, costs, off) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("batch and recursive errors agree on every schedule of a small instance") {
  const SystemParams params = generate_instance(InstanceSpec{3, 2, 5, 0.5, 0.01});
  const int T = 3;
  const CovarianceCache cache = build_cache(params, T);
  const auto costs = final_state_costs(3, T);
  for (int mask = 0; mask < (1 << (2 * T)); ++mask) {
    const Schedule s = schedule_from_mask(mask, 2, T);
    const double batch = schedule_objective(cache, costs, s);
    const double recursive = recursive_kf_error(params, costs, s);
    CHECK(test_util::rel_diff(batch, recursive) < 1e-8);
  }
}

}  // TEST_SUITE
