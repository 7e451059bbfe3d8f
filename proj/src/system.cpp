#include "sensched/system.hpp"

#include "sensched/json_util.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace sensched {

namespace {

Eigen::MatrixXd draw_matrix(UniformRng& rng, int rows, int cols) {
  Eigen::MatrixXd X(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) X(i, j) = rng.next();
  return X;
}

double min_eigenvalue_sym(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd S = 0.5 * (X + X.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

void check_spd(const Eigen::MatrixXd& X, const char* name, int dim,
               std::vector<std::string>& out) {
  if (X.rows() != dim || X.cols() != dim) {
    out.push_back(std::string(name) + ": expected " + std::to_string(dim) + "x" +
                  std::to_string(dim) + ", got " + std::to_string(X.rows()) + "x" +
                  std::to_string(X.cols()));
    return;
  }
  if (dim == 0) return;
  const double asym = (X - X.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10) {
    out.push_back(std::string(name) + ": not symmetric (max asymmetry " + format_double(asym) +
                  ")");
    return;
  }
  const double min_eig = min_eigenvalue_sym(X);
  if (!(min_eig > 1e-10))
    out.push_back(std::string(name) + ": not positive definite (min eigenvalue " +
                  format_double(min_eig) + ")");
}

}  // namespace

double spectral_radius(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw std::invalid_argument("spectral_radius: matrix must be square");
  const int n = static_cast<int>(A.rows());
  if (n == 0) return 0.0;
  if (n == 1) return std::abs(A(0, 0));

  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  double lambda = 0.0;
  for (int iter = 0; iter < 10000; ++iter) {
    Eigen::VectorXd w = A * v;
    const double norm = w.norm();
    if (norm < 1e-300) return 0.0;
    v = w / norm;
    if (std::abs(norm - lambda) <= 1e-10 * std::max(1.0, norm)) return norm;
    lambda = norm;
  }
  return lambda;
}

SystemParams generate_instance(const InstanceSpec& spec) {
  if (spec.n < 1 || spec.m < 1)
    throw std::invalid_argument("generate_instance: n and m must be positive");
  if (!(spec.spectral_target > 0.0))
    throw std::invalid_argument("generate_instance: spectral_target must be positive");
  if (!(spec.noise_sigma2 > 0.0))
    throw std::invalid_argument("generate_instance: noise_sigma2 must be positive");

  UniformRng rng(spec.seed);
  SystemParams params;
  params.n = spec.n;
  params.m = spec.m;

  bool scaled = false;
  for (int attempt = 0; attempt < 10 && !scaled; ++attempt) {
    Eigen::MatrixXd raw = draw_matrix(rng, spec.n, spec.n);
    const double rho = spectral_radius(raw);
    if (rho > 1e-12) {
      params.A = (spec.spectral_target / rho) * raw;
      scaled = true;
    }
  }
  if (!scaled)
    throw std::runtime_error("generate_instance: drew a zero-spectral-radius matrix 10 times");

  params.C = draw_matrix(rng, spec.m, spec.n);

  Eigen::MatrixXd L = draw_matrix(rng, spec.n, spec.n);
  params.W = L * L.transpose();
  params.W = 0.5 * (params.W + params.W.transpose());
  if (Eigen::LLT<Eigen::MatrixXd>(params.W).info() != Eigen::Success)
    params.W += 1e-8 * Eigen::MatrixXd::Identity(spec.n, spec.n);

  params.V = spec.noise_sigma2 * Eigen::MatrixXd::Identity(spec.m, spec.m);
  params.Sigma0 = Eigen::MatrixXd::Identity(spec.n, spec.n);
  return params;
}

std::vector<std::string> validate(const SystemParams& params) {
  std::vector<std::string> out;
  if (params.n < 1) out.push_back("n: must be positive");
  if (params.m < 1) out.push_back("m: must be positive");
  if (params.n < 1 || params.m < 1) return out;

  if (params.A.rows() != params.n || params.A.cols() != params.n)
    out.push_back("A: expected " + std::to_string(params.n) + "x" + std::to_string(params.n) +
                  ", got " + std::to_string(params.A.rows()) + "x" +
                  std::to_string(params.A.cols()));
  if (params.C.rows() != params.m || params.C.cols() != params.n)
    out.push_back("C: expected " + std::to_string(params.m) + "x" + std::to_string(params.n) +
                  ", got " + std::to_string(params.C.rows()) + "x" +
                  std::to_string(params.C.cols()));
  check_spd(params.W, "W", params.n, out);
  check_spd(params.V, "V", params.m, out);
  check_spd(params.Sigma0, "Sigma0", params.n, out);
  return out;
}

nlohmann::json instance_to_json(const InstanceFile& file) {
  nlohmann::json j;
  j["n"] = file.params.n;
  j["m"] = file.params.m;
  j["A"] = matrix_to_json(file.params.A);
  j["C"] = matrix_to_json(file.params.C);
  j["W"] = matrix_to_json(file.params.W);
  j["V"] = matrix_to_json(file.params.V);
  j["Sigma0"] = matrix_to_json(file.params.Sigma0);
  if (file.spec) {
    j["spec"] = {{"n", file.spec->n},
                 {"m", file.spec->m},
                 {"seed", file.spec->seed},
                 {"spectral_target", file.spec->spectral_target},
                 {"noise_sigma2", file.spec->noise_sigma2}};
  }
  return j;
}

InstanceFile instance_from_json(const nlohmann::json& j) {
  InstanceFile file;
  file.params.n = j.at("n").get<int>();
  file.params.m = j.at("m").get<int>();
  if (file.params.n < 1 || file.params.m < 1)
    throw std::invalid_argument("instance: n and m must be positive");
  const int n = file.params.n;
  const int m = file.params.m;
  file.params.A = matrix_from_json(j.at("A"), "A", n, n);
  file.params.C = matrix_from_json(j.at("C"), "C", m, n);
  file.params.W = matrix_from_json(j.at("W"), "W", n, n);
  file.params.V = matrix_from_json(j.at("V"), "V", m, m);
  file.params.Sigma0 = matrix_from_json(j.at("Sigma0"), "Sigma0", n, n);
  if (j.contains("spec")) {
    const auto& s = j.at("spec");
    InstanceSpec spec;
    spec.n = s.at("n").get<int>();
    spec.m = s.at("m").get<int>();
    spec.seed = s.at("seed").get<std::uint64_t>();
    if (s.contains("spectral_target")) spec.spectral_target = s.at("spectral_target").get<double>();
    if (s.contains("noise_sigma2")) spec.noise_sigma2 = s.at("noise_sigma2").get<double>();
    file.spec = spec;
  }
  return file;
}

InstanceFile load_instance(const std::string& path) {
  return instance_from_json(load_json_file(path));
}

void save_instance(const std::string& path, const InstanceFile& file) {
  save_json_file(path, instance_to_json(file));
}

}  // namespace sensched
