#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddp/netgraph.hpp"

namespace ddp {

struct DatasetSpec {
  enum class Type { TeacherStudent, GaussianBlobs, Csv };
  Type type = Type::TeacherStudent;

  // teacher_student
  std::vector<int> shape;
  double noise = 0.0;
  // gaussian_blobs
  int k = 2;
  int dim = 2;
  double separation = 6.0;
  // csv
  std::string path;
  int label_cols = 1;

  int n = 0;
  std::uint64_t seed = 0;
};

/// Full dataset in memory: inputs, regression targets and (when the targets
/// look like classes) integer labels.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::MatrixXd Y;
  Eigen::VectorXi labels;  // empty when not a classification set

  int size() const { return static_cast<int>(X.rows()); }
  Batch batch(const std::vector<int>& rows) const;
};

Dataset make_dataset(const DatasetSpec& spec);

// minimal csv helpers; numbers written with round-trip precision
Eigen::MatrixXd read_csv(const std::string& path);
void write_csv(const Eigen::MatrixXd& m, const std::string& path);

}  // namespace ddp
