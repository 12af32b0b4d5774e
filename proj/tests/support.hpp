#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include <optistat/dataset.hpp>

namespace testing_support {

inline optistat::ResultsMatrix cec17() {
  return optistat::load_results_matrix(std::string(OPTISTAT_DATA_DIR) + "/cec17_dim10.csv");
}

inline optistat::ResultsMatrix matrix(const std::vector<std::vector<double>>& rows) {
  Eigen::MatrixXd v(rows.size(), rows.at(0).size());
  std::vector<std::string> algs, benches;
  for (std::size_t j = 0; j < rows[0].size(); ++j) algs.push_back("A" + std::to_string(j));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    benches.push_back("B" + std::to_string(i));
    for (std::size_t j = 0; j < rows[i].size(); ++j) v(i, j) = rows[i][j];
  }
  return optistat::ResultsMatrix(algs, benches, v);
}

}  // namespace testing_support
