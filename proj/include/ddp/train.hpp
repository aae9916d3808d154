#pragma once

#include "ddp/complexity.hpp"
#include "ddp/dataset.hpp"

namespace ddp {

enum class Optimizer { Sgd, PathSgd, DdpSgd, DdpNorm, DiagNaturalGradient };

const char* to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& s);

enum class StatsBatchMode { Same, HeldOut };

struct TrainConfig {
  Optimizer optimizer = Optimizer::DdpSgd;
  ComplexityConfig complexity;
  LossKind loss = LossKind::Squared;
  double eta = 0.1;
  int batch_size = 64;
  int steps = 100;
  std::uint64_t seed = 0;
  StatsBatchMode stats_batch_mode = StatsBatchMode::Same;
  std::vector<int> shape;  // student network layer widths
  bool bias = false;
  DatasetSpec dataset;

  // Applies the optimizer aliases (path_sgd == ddp_sgd with alpha=0,
  // diag_natural_gradient == ddp_sgd with alpha=1, second moment, squared
  // loss) and rejects inconsistent settings.
  void finalize();
};

struct StepRecord {
  int step;
  double loss;
  double gamma_net;
  double grad_norm;
  double kappa_min;
  double kappa_max;
  double ms;
};

struct TrainResult {
  std::vector<StepRecord> metrics;
  WeightVector weights;        // realized weights (ddp_norm realizes via EMA stats)
  WeightVector raw_params;     // optimizer state: w, or tilde_w for ddp_norm
};

TrainResult train_loop(const TrainConfig& cfg, const NetworkTopology& topo,
                       const Dataset& data);

// convenience: builds layered(cfg.shape, cfg.bias) and make_dataset(cfg.dataset)
TrainResult train_loop(const TrainConfig& cfg);

}  // namespace ddp
