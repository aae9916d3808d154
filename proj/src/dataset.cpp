#include "ddp/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ddp/rng.hpp"

namespace ddp {

Batch Dataset::batch(const std::vector<int>& rows) const {
  Batch b;
  b.inputs.resize(rows.size(), X.cols());
  if (Y.cols() > 0) b.targets.resize(rows.size(), Y.cols());
  if (labels.size() > 0) b.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    b.inputs.row(i) = X.row(rows[i]);
    if (Y.cols() > 0) b.targets.row(i) = Y.row(rows[i]);
    if (labels.size() > 0) b.labels[i] = labels[rows[i]];
  }
  return b;
}

namespace {

Dataset make_teacher_student(const DatasetSpec& spec) {
  if (spec.shape.size() < 2) throw ConfigError("dataset.shape", "needs at least two layers");
  if (spec.n < 1) throw ConfigError("dataset.n", "needs n >= 1");
  Rng rng(spec.seed);
  NetworkTopology teacher = NetworkTopology::layered(spec.shape);
  WeightVector w_star = init_weights(teacher, rng);
  Dataset d;
  d.X.resize(spec.n, spec.shape.front());
  for (int i = 0; i < spec.n; ++i)
    for (int c = 0; c < d.X.cols(); ++c) d.X(i, c) = rng.normal();
  d.Y = network_outputs(teacher, w_star, d.X);
  if (spec.noise > 0.0)
    for (int i = 0; i < d.Y.rows(); ++i)
      for (int c = 0; c < d.Y.cols(); ++c) d.Y(i, c) += spec.noise * rng.normal();
  return d;
}

Dataset make_gaussian_blobs(const DatasetSpec& spec) {
  if (spec.k < 2) throw ConfigError("dataset.k", "needs k >= 2 blobs");
  if (spec.dim < 1) throw ConfigError("dataset.dim", "needs dim >= 1");
  if (spec.n < spec.k) throw ConfigError("dataset.n", "needs n >= k");
  Rng rng(spec.seed);
  // class c center: separation * c along axis (c mod dim); unit noise
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(spec.k, spec.dim);
  for (int c = 0; c < spec.k; ++c) centers(c, c % spec.dim) = spec.separation * c;
  Dataset d;
  d.X.resize(spec.n, spec.dim);
  d.Y = Eigen::MatrixXd::Zero(spec.n, spec.k);  // one-hot targets
  d.labels.resize(spec.n);
  std::vector<int> order(spec.n);
  for (int i = 0; i < spec.n; ++i) order[i] = i % spec.k;
  rng.shuffle(order);
  for (int i = 0; i < spec.n; ++i) {
    int c = order[i];
    d.labels[i] = c;
    d.Y(i, c) = 1.0;
    for (int j = 0; j < spec.dim; ++j) d.X(i, j) = centers(c, j) + rng.normal();
  }
  return d;
}

Dataset make_csv(const DatasetSpec& spec) {
  Eigen::MatrixXd m = read_csv(spec.path);
  if (spec.label_cols < 0 || spec.label_cols >= m.cols())
    throw ConfigError("dataset.label_cols", "must be in [0, columns)");
  Dataset d;
  d.X = m.leftCols(m.cols() - spec.label_cols);
  d.Y = m.rightCols(spec.label_cols);
  if (spec.label_cols == 1) {
    // treat an integral label column as class indices as well
    bool integral = true;
    for (int i = 0; i < d.Y.rows() && integral; ++i)
      integral = d.Y(i, 0) == std::floor(d.Y(i, 0)) && d.Y(i, 0) >= 0;
    if (integral) {
      d.labels.resize(d.Y.rows());
      for (int i = 0; i < d.Y.rows(); ++i) d.labels[i] = static_cast<int>(d.Y(i, 0));
    }
  }
  return d;
}

}  // namespace

Dataset make_dataset(const DatasetSpec& spec) {
  switch (spec.type) {
    case DatasetSpec::Type::TeacherStudent: return make_teacher_student(spec);
    case DatasetSpec::Type::GaussianBlobs: return make_gaussian_blobs(spec);
    case DatasetSpec::Type::Csv: return make_csv(spec);
  }
  throw ConfigError("dataset.type", "unknown dataset type");
}

Eigen::MatrixXd read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open file");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (...) {
        throw ConfigError(path, "malformed number '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ConfigError(path, "ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError(path, "empty csv");
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_csv(const Eigen::MatrixXd& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  char buf[64];
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out << (j ? "," : "") << buf;
    }
    out << "\n";
  }
}

}  // namespace ddp
