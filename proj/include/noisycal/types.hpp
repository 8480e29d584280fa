#pragma once

#include <vector>

#include <Eigen/Dense>

namespace noisycal {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// Rows are contiguous so that one data point can be viewed as a std::span.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Labels are 0-based in memory. Files and the CLI use 1-based labels.
using Label = int;
using LabelVector = std::vector<Label>;
using LabelSet = std::vector<Label>;

}  // namespace noisycal
