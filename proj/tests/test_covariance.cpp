#include "sensched/covariance.hpp"

#include "test_util.hpp"

#include <Eigen/Eigenvalues>
#include <doctest.h>

#include <cmath>
#include <vector>

using namespace sensched;

TEST_SUITE("covariance") {

TEST_CASE("scalar identity blocks match the hand-evaluated sums") {
  const SystemParams params = test_util::scalar_identity();
  // step 0 is x_1 of the 1-based recursion, step 1 is x_2
  CHECK(state_state_cov(params, 0, 0)(0, 0) == doctest::Approx(1.0));
  CHECK(state_state_cov(params, 1, 1)(0, 0) == doctest::Approx(2.0));  // A Sigma0 A' + W
  CHECK(state_state_cov(params, 1, 0)(0, 0) == doctest::Approx(1.0));  // A Sigma0
  CHECK(state_meas_cov(params, 0, 0)(0, 0) == doctest::Approx(1.0));
  CHECK(state_meas_cov(params, 1, 0)(0, 0) == doctest::Approx(1.0));
  CHECK(meas_meas_cov(params, 0, 0)(0, 0) == doctest::Approx(2.0));  // C Sigma C' + V
  CHECK(meas_meas_cov(params, 1, 0)(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("a zero measurement map kills every state-measurement block") {
  SystemParams params = test_util::scalar_identity();
  params.C.setZero();
  for (int t = 0; t < 3; ++t)
    for (int j = 0; j < 3; ++j) CHECK(state_meas_cov(params, t, j)(0, 0) == 0.0);
  // off-diagonal measurement blocks carry no noise term either
  CHECK(meas_meas_cov(params, 2, 1)(0, 0) == 0.0);
}

TEST_CASE("block symmetry holds exactly across the transpose convention") {
  const SystemParams params = generate_instance(InstanceSpec{3, 2, 11, 0.5, 0.01});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const Eigen::MatrixXd a = state_state_cov(params, i, j);
      const Eigen::MatrixXd b = state_state_cov(params, j, i).transpose();
      CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("scalar identity cache holds the known values") {
  const CovarianceCache cache = build_cache(test_util::scalar_identity(), 1);
  CHECK(cache.state_state(0, 0)(0, 0) == doctest::Approx(1.0));
  CHECK(cache.state_meas(0, 0)(0, 0) == doctest::Approx(1.0));
  CHECK(cache.meas_meas(0, 0)(0, 0) == doctest::Approx(2.0));
  CHECK(cache.YY_chol(0, 0) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("a one-step cache assembles C Sigma0 C' + V") {
  const SystemParams params = generate_instance(InstanceSpec{3, 2, 4, 0.5, 0.01});
  const CovarianceCache cache = build_cache(params, 1);
  const Eigen::MatrixXd expected =
      params.C * params.Sigma0 * params.C.transpose() + params.V;
  CHECK((cache.YY - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("cache blocks agree with the definitional forms") {
  const SystemParams params = generate_instance(InstanceSpec{4, 3, 7, 0.5, 0.01});
  const CovarianceCache cache = build_cache(params, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK((cache.state_state(i, j) - state_state_cov(params, i, j)).cwiseAbs().maxCoeff() <
            1e-12);
      CHECK((cache.state_meas(i, j) - state_meas_cov(params, i, j)).cwiseAbs().maxCoeff() <
            1e-12);
      CHECK((cache.meas_meas(i, j) - meas_meas_cov(params, i, j)).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("assembled measurement covariance is symmetric to 1e-12") {
  const SystemParams params = generate_instance(InstanceSpec{4, 3, 7, 0.5, 0.01});
  const CovarianceCache cache = build_cache(params, 3);
  CHECK((cache.YY - cache.YY.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
  // blocks of the assembly match the block table
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Eigen::MatrixXd block = cache.YY.block(i * 3, j * 3, 3, 3);
      CHECK((block - cache.meas_meas(i, j)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("measurement covariance cannot dip below the noise floor") {
  const SystemParams params = generate_instance(InstanceSpec{3, 2, 21, 0.5, 0.01});
  const CovarianceCache cache = build_cache(params, 3);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> yy(cache.YY);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> v(params.V);
  CHECK(yy.eigenvalues().minCoeff() >= v.eigenvalues().minCoeff() - 1e-10);
}

TEST_CASE("submatrix extraction restricts columns and principal blocks") {
  const SystemParams params = test_util::scalar_identity();
  const CovarianceCache cache = build_cache(params, 2);

  SUBCASE("full index set reproduces the assembled blocks") {
    const std::vector<int> all{0, 1};
    const auto [Sxs, Sss] = submatrix_views(cache, 1, all);
    CHECK((Sxs - cache.state_meas_row(1)).cwiseAbs().maxCoeff() == 0.0);
    CHECK((Sss - cache.YY).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("empty set yields empty shapes") {
    const std::vector<int> empty;
    const auto [Sxs, Sss] = submatrix_views(cache, 0, empty);
    CHECK(Sxs.rows() == 1);
    CHECK(Sxs.cols() == 0);
    CHECK(Sss.rows() == 0);
  }

  SUBCASE("restriction of step 1 to the first measurement") {
    const std::vector<int> first{0};
    const auto [Sxs, Sss] = submatrix_views(cache, 1, first);
    CHECK(Sxs(0, 0) == doctest::Approx(1.0));  // Sigma_{x2 y1}
    CHECK(Sss(0, 0) == doctest::Approx(2.0));  // Sigma_{y1 y1}
  }

  SUBCASE("out-of-range indices throw") {
    const std::vector<int> bad{1};
    CHECK_THROWS_AS(submatrix_views(cache, 0, bad), std::out_of_range);
  }
}

TEST_CASE("simulated trajectories reproduce every block (smoke-scale)") {
  const SystemParams params = generate_instance(InstanceSpec{2, 1, 13, 0.5, 0.01});
  const int T = 2;
  const CovarianceCache cache = build_cache(params, T);
  const auto emp = test_util::simulate_moments(params, T, 50000, 20240501);

  for (int i = 0; i < T; ++i)
    for (int j = 0; j < T; ++j) {
      CHECK(test_util::max_sigma_deviation(cache.state_state(i, j), emp.mean(emp.xx_sum, i, j),
                                           emp.stderr_of_mean(emp.xx_sum, emp.xx_sq, i, j)) <
            4.0);
      CHECK(test_util::max_sigma_deviation(cache.state_meas(i, j), emp.mean(emp.xy_sum, i, j),
                                           emp.stderr_of_mean(emp.xy_sum, emp.xy_sq, i, j)) <
            4.0);
      CHECK(test_util::max_sigma_deviation(cache.meas_meas(i, j), emp.mean(emp.yy_sum, i, j),
                                           emp.stderr_of_mean(emp.yy_sum, emp.yy_sq, i, j)) <
            4.0);
    }
}

TEST_CASE("build_cache rejects a bad horizon") {
  CHECK_THROWS_AS(build_cache(test_util::scalar_identity(), 0), std::invalid_argument);
}

}  // TEST_SUITE
