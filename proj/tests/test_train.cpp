#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "ddp/dataset.hpp"
#include "ddp/rng.hpp"
#include "ddp/train.hpp"

using namespace ddp;

namespace {

TrainConfig teacher_student_config() {
  TrainConfig cfg;
  cfg.optimizer = Optimizer::DdpSgd;
  cfg.eta = 0.05;
  cfg.batch_size = 64;
  cfg.steps = 200;
  cfg.seed = 1;
  cfg.shape = {2, 4, 1};
  cfg.dataset.type = DatasetSpec::Type::TeacherStudent;
  cfg.dataset.shape = {2, 4, 1};
  cfg.dataset.noise = 0.01;
  cfg.dataset.n = 512;
  cfg.dataset.seed = 7;
  return cfg;
}

}  // namespace

TEST_CASE("teacher-student dataset is the teacher's function plus noise") {
  DatasetSpec spec;
  spec.type = DatasetSpec::Type::TeacherStudent;
  spec.shape = {2, 3, 1};
  spec.noise = 0.0;
  spec.n = 32;
  spec.seed = 9;
  Dataset d = make_dataset(spec);
  // rebuild the teacher the same way the dataset does
  Rng rng(spec.seed);
  NetworkTopology teacher = NetworkTopology::layered(spec.shape);
  WeightVector w_star = init_weights(teacher, rng);
  Eigen::MatrixXd f = network_outputs(teacher, w_star, d.X);
  CHECK((f - d.Y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gaussian blobs are linearly learnable to >95% accuracy") {
  DatasetSpec spec;
  spec.type = DatasetSpec::Type::GaussianBlobs;
  spec.k = 2;
  spec.dim = 2;
  spec.separation = 6.0;
  spec.n = 256;
  spec.seed = 3;
  Dataset d = make_dataset(spec);
  REQUIRE(d.labels.size() == 256);

  TrainConfig cfg;
  cfg.optimizer = Optimizer::Sgd;
  cfg.eta = 0.1;
  cfg.batch_size = 64;
  cfg.steps = 400;
  cfg.seed = 1;
  cfg.shape = {2, 2};  // direct input->output, affine via the bias node
  cfg.bias = true;
  NetworkTopology topo = NetworkTopology::layered(cfg.shape, true);
  TrainResult r = train_loop(cfg, topo, d);

  Eigen::MatrixXd f = network_outputs(topo, r.weights, d.X);
  int correct = 0;
  for (int i = 0; i < d.size(); ++i) {
    int arg;
    f.row(i).maxCoeff(&arg);
    if (arg == d.labels[i]) ++correct;
  }
  CHECK(correct >= static_cast<int>(0.95 * d.size()));
}

TEST_CASE("csv datasets round-trip bit-exactly") {
  Rng rng(77);
  Eigen::MatrixXd m(5, 3);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = rng.normal();
  std::string path =
      (std::filesystem::temp_directory_path() / "ddp_test_roundtrip.csv").string();
  write_csv(m, path);
  Eigen::MatrixXd back = read_csv(path);
  CHECK((m - back).cwiseAbs().maxCoeff() == 0.0);
  std::remove(path.c_str());
}

TEST_CASE("eta = 0 leaves the weights unchanged") {
  TrainConfig cfg = teacher_student_config();
  cfg.eta = 0.0;
  cfg.batch_size = 512;  // full batch: constant loss too
  cfg.steps = 5;
  TrainResult r = train_loop(cfg);
  NetworkTopology topo = NetworkTopology::layered(cfg.shape);
  Rng rng(cfg.seed);
  WeightVector w0 = init_weights(topo, rng);
  CHECK((r.weights - w0).norm() == 0.0);
  // epoch reshuffling permutes the summation order, so allow rounding slack
  for (const StepRecord& rec : r.metrics)
    CHECK(rec.loss == doctest::Approx(r.metrics.front().loss).epsilon(1e-12));
}

TEST_CASE("ddp_sgd halves the teacher-student loss") {
  TrainConfig cfg = teacher_student_config();
  cfg.steps = 2000;
  TrainResult r = train_loop(cfg);
  CHECK(r.metrics.back().loss <= 0.5 * r.metrics.front().loss);
}

TEST_CASE("optimizer aliases produce identical trajectories") {
  SUBCASE("path_sgd == ddp_sgd(alpha=0)") {
    TrainConfig a = teacher_student_config();
    a.optimizer = Optimizer::PathSgd;
    TrainConfig b = teacher_student_config();
    b.optimizer = Optimizer::DdpSgd;
    b.complexity.alpha = 0.0;
    TrainResult ra = train_loop(a), rb = train_loop(b);
    CHECK((ra.weights - rb.weights).cwiseAbs().maxCoeff() <= 1e-12);
    for (std::size_t i = 0; i < ra.metrics.size(); ++i)
      CHECK(ra.metrics[i].loss == rb.metrics[i].loss);
  }
  SUBCASE("diag_natural_gradient == ddp_sgd(alpha=1, second moment)") {
    TrainConfig a = teacher_student_config();
    a.optimizer = Optimizer::DiagNaturalGradient;
    a.complexity.alpha = 1.0;
    a.complexity.s_mode = SMode::SecondMoment;
    TrainConfig b = teacher_student_config();
    b.complexity.alpha = 1.0;
    b.complexity.s_mode = SMode::SecondMoment;
    TrainResult ra = train_loop(a), rb = train_loop(b);
    CHECK((ra.weights - rb.weights).cwiseAbs().maxCoeff() <= 1e-12);
    for (std::size_t i = 0; i < ra.metrics.size(); ++i)
      CHECK(ra.metrics[i].loss == rb.metrics[i].loss);
  }
}

TEST_CASE("identical config and seed give bit-identical metrics") {
  TrainConfig cfg = teacher_student_config();
  cfg.steps = 50;
  TrainResult a = train_loop(cfg), b = train_loop(cfg);
  REQUIRE(a.metrics.size() == b.metrics.size());
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    CHECK(a.metrics[i].loss == b.metrics[i].loss);
    CHECK(a.metrics[i].gamma_net == b.metrics[i].gamma_net);
    CHECK(a.metrics[i].grad_norm == b.metrics[i].grad_norm);
    CHECK(a.metrics[i].kappa_min == b.metrics[i].kappa_min);
    CHECK(a.metrics[i].kappa_max == b.metrics[i].kappa_max);
  }
  CHECK((a.weights - b.weights).norm() == 0.0);
}

TEST_CASE("alias constraints are enforced") {
  TrainConfig cfg = teacher_student_config();
  cfg.optimizer = Optimizer::PathSgd;
  cfg.complexity.alpha = 0.5;
  CHECK_THROWS_AS(cfg.finalize(), ConfigError);

  TrainConfig cfg2 = teacher_student_config();
  cfg2.optimizer = Optimizer::DiagNaturalGradient;
  cfg2.complexity.alpha = 1.0;
  cfg2.loss = LossKind::SoftmaxCrossEntropy;
  CHECK_THROWS_AS(cfg2.finalize(), ConfigError);
}

TEST_CASE("divergence raises with the step index") {
  TrainConfig cfg = teacher_student_config();
  cfg.optimizer = Optimizer::Sgd;
  cfg.eta = 1e6;
  cfg.steps = 50;
  CHECK_THROWS_AS(train_loop(cfg), DivergenceError);
}

TEST_CASE("ddp_norm trains and realizes finite weights") {
  TrainConfig cfg = teacher_student_config();
  cfg.optimizer = Optimizer::DdpNorm;
  cfg.complexity.alpha = 0.5;
  cfg.steps = 300;
  TrainResult r = train_loop(cfg);
  CHECK(r.weights.allFinite());
  CHECK(r.metrics.back().loss <= r.metrics.front().loss);
}

TEST_CASE("held-out statistics mode runs and differs from same-batch mode") {
  TrainConfig a = teacher_student_config();
  a.steps = 100;
  a.complexity.alpha = 1.0;
  TrainConfig b = a;
  b.stats_batch_mode = StatsBatchMode::HeldOut;
  TrainResult ra = train_loop(a), rb = train_loop(b);
  CHECK((ra.weights - rb.weights).norm() > 0.0);
  CHECK(rb.weights.allFinite());
}
