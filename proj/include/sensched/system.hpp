#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace sensched {

// Linear-Gaussian system
//   x_{k+1} = A x_k + w_k,   w_k ~ (0, W)
//   y_k     = C x_k + v_k,   v_k ~ (0, V)
// with a zero-mean initial state of covariance Sigma0. Noise terms are
// mutually uncorrelated across time and from the initial state.
struct SystemParams {
  Eigen::MatrixXd A;       // n x n state transition
  Eigen::MatrixXd C;       // m x n measurement map
  Eigen::MatrixXd W;       // n x n process-noise covariance, SPD
  Eigen::MatrixXd V;       // m x m measurement-noise covariance, SPD
  Eigen::MatrixXd Sigma0;  // n x n prior covariance of the initial state, SPD
  int n = 0;               // state dimension
  int m = 0;               // sensor count
};

// Recipe for a seeded random instance. Equal specs generate bit-identical
// systems on any platform.
struct InstanceSpec {
  int n = 0;
  int m = 0;
  std::uint64_t seed = 0;
  double spectral_target = 0.5;
  double noise_sigma2 = 0.01;
};

// Uniform [0,1) stream built on std::mt19937_64, whose output sequence is
// fixed by the C++ standard. The mapping keeps the top 53 bits, avoiding
// std::uniform_real_distribution (whose output is implementation-defined).
class UniformRng {
 public:
  explicit UniformRng(std::uint64_t seed) : gen_(seed) {}
  double next() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
};

// Spectral radius via power iteration (relative tolerance 1e-10, at most
// 10000 iterations). Intended for entrywise-nonnegative matrices, whose
// dominant eigenvalue is real and simple.
double spectral_radius(const Eigen::MatrixXd& A);

// Draws an instance from the spec:
//   A: entries uniform [0,1), rescaled so the spectral radius equals
//      spec.spectral_target (a zero-radius draw is retried, at most 10 times);
//   C: entries uniform [0,1);
//   W: L L' with L uniform [0,1), plus 1e-8*I only if Cholesky fails;
//   V: noise_sigma2 * I;  Sigma0: I.
// Entries are drawn row-major in the order A, C, L.
SystemParams generate_instance(const InstanceSpec& spec);

// One description per violated invariant (dimension consistency; W, V,
// Sigma0 symmetric positive definite). Empty means well formed.
std::vector<std::string> validate(const SystemParams& params);

// Instance file: {"n","m","A","C","W","V","Sigma0"} plus an optional "spec"
// echo of the generating InstanceSpec.
struct InstanceFile {
  SystemParams params;
  std::optional<InstanceSpec> spec;
};

nlohmann::json instance_to_json(const InstanceFile& file);
InstanceFile instance_from_json(const nlohmann::json& j);
InstanceFile load_instance(const std::string& path);
void save_instance(const std::string& path, const InstanceFile& file);

}  // namespace sensched
