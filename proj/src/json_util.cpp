#include "sensched/json_util.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace sensched {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& X) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < X.cols(); ++j) row.push_back(X(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, const std::string& name,
                                 int expect_rows, int expect_cols) {
  if (!j.is_array()) throw std::invalid_argument(name + ": expected an array of rows");
  const int rows = static_cast<int>(j.size());
  int cols = 0;
  if (rows > 0) {
    if (!j[0].is_array()) throw std::invalid_argument(name + ": rows must be arrays");
    cols = static_cast<int>(j[0].size());
  }
  Eigen::MatrixXd X(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const auto& row = j[i];
    if (!row.is_array() || static_cast<int>(row.size()) != cols)
      throw std::invalid_argument(name + ": ragged rows");
    for (int c = 0; c < cols; ++c) {
      if (!row[c].is_number()) throw std::invalid_argument(name + ": non-numeric entry");
      X(i, c) = row[c].get<double>();
    }
  }
  if (expect_rows >= 0 && rows != expect_rows)
    throw std::invalid_argument(name + ": expected " + std::to_string(expect_rows) + " rows, got " +
                                std::to_string(rows));
  if (expect_cols >= 0 && cols != expect_cols)
    throw std::invalid_argument(name + ": expected " + std::to_string(expect_cols) +
                                " columns, got " + std::to_string(cols));
  return X;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& name,
                                 int expect_size) {
  if (!j.is_array()) throw std::invalid_argument(name + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw std::invalid_argument(name + ": non-numeric entry");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  if (expect_size >= 0 && v.size() != expect_size)
    throw std::invalid_argument(name + ": expected " + std::to_string(expect_size) +
                                " entries, got " + std::to_string(v.size()));
  return v;
}

nlohmann::json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  nlohmann::json j;
  in >> j;
  return j;
}

void save_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace sensched
