#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <filesystem>
#include <string>

namespace sensched {

// Matrices travel through JSON as row-major nested arrays of numbers.
// nlohmann emits shortest round-trip representations, so emit/parse is
// lossless for finite doubles.
nlohmann::json matrix_to_json(const Eigen::MatrixXd& X);

// Parses a nested-array matrix. `name` appears in error messages;
// expect_rows/expect_cols of -1 accept any extent.
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& name,
                                 int expect_rows = -1, int expect_cols = -1);

nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& name,
                                 int expect_size = -1);

nlohmann::json load_json_file(const std::filesystem::path& path);
void save_json_file(const std::filesystem::path& path, const nlohmann::json& j);

// printf-style %.17g formatting; deterministic and locale-independent enough
// for the C locale the tools run under.
std::string format_double(double x);

}  // namespace sensched
