#include "ddp/train.hpp"

#include <chrono>

#include "ddp/ddpnorm.hpp"
#include "ddp/kappa.hpp"
#include "ddp/rng.hpp"

namespace ddp {

const char* to_string(Optimizer o) {
  switch (o) {
    case Optimizer::Sgd: return "sgd";
    case Optimizer::PathSgd: return "path_sgd";
    case Optimizer::DdpSgd: return "ddp_sgd";
    case Optimizer::DdpNorm: return "ddp_norm";
    case Optimizer::DiagNaturalGradient: return "diag_natural_gradient";
  }
  return "?";
}

Optimizer optimizer_from_string(const std::string& s) {
  if (s == "sgd") return Optimizer::Sgd;
  if (s == "path_sgd") return Optimizer::PathSgd;
  if (s == "ddp_sgd") return Optimizer::DdpSgd;
  if (s == "ddp_norm") return Optimizer::DdpNorm;
  if (s == "diag_natural_gradient") return Optimizer::DiagNaturalGradient;
  throw ConfigError("optimizer", "unknown optimizer '" + s + "'");
}

void TrainConfig::finalize() {
  complexity.check();
  if (eta < 0.0) throw ConfigError("eta", "must be non-negative");
  if (batch_size < 1) throw ConfigError("batch_size", "must be >= 1");
  if (steps < 0) throw ConfigError("steps", "must be >= 0");
  if (optimizer == Optimizer::PathSgd) {
    if (complexity.alpha != 0.0)
      throw ConfigError("complexity.alpha", "path_sgd requires alpha = 0");
  }
  if (optimizer == Optimizer::DiagNaturalGradient) {
    if (complexity.alpha != 1.0)
      throw ConfigError("complexity.alpha", "diag_natural_gradient requires alpha = 1");
    if (complexity.s_mode != SMode::SecondMoment)
      throw ConfigError("complexity.s_mode", "diag_natural_gradient requires second_moment");
    if (loss != LossKind::Squared)
      throw ConfigError("loss", "diag_natural_gradient requires squared loss");
  }
}

namespace {

// Epoch sampler: without replacement, reshuffled when a full batch no longer
// fits. A batch never spans the epoch boundary.
class BatchSampler {
 public:
  BatchSampler(int n, int batch_size, std::uint64_t seed)
      : order_(n), batch_(std::min(batch_size, n)), rng_(seed), cursor_(n) {
    for (int i = 0; i < n; ++i) order_[i] = i;
  }

  std::vector<int> next() {
    if (cursor_ + batch_ > static_cast<int>(order_.size())) {
      rng_.shuffle(order_);
      cursor_ = 0;
    }
    std::vector<int> rows(order_.begin() + cursor_, order_.begin() + cursor_ + batch_);
    cursor_ += batch_;
    return rows;
  }

 private:
  std::vector<int> order_;
  int batch_;
  Rng rng_;
  int cursor_;
};

bool runs_ddp_sgd(Optimizer o) {
  return o == Optimizer::PathSgd || o == Optimizer::DdpSgd ||
         o == Optimizer::DiagNaturalGradient;
}

}  // namespace

TrainResult train_loop(const TrainConfig& cfg_in, const NetworkTopology& topo,
                       const Dataset& data) {
  TrainConfig cfg = cfg_in;
  cfg.finalize();
  if (data.size() < 1) throw ConfigError("dataset.n", "empty dataset");
  if (data.X.cols() != static_cast<int>(topo.input_nodes().size()))
    throw ConfigError("dataset", "input width does not match the network");

  Rng rng(cfg.seed);
  WeightVector params = init_weights(topo, rng);  // w, or tilde_w for ddp_norm
  BatchSampler sampler(data.size(), cfg.batch_size, rng.next_u64());
  // held_out mode draws kappa/statistics batches from an independent stream
  BatchSampler stats_sampler(data.size(), cfg.batch_size, rng.next_u64() ^ 0x5851f42d4c957f2dull);

  TrainResult result;
  result.metrics.reserve(cfg.steps);
  Eigen::VectorXd ema_gamma_sq;  // ddp_norm running statistics (decay 0.9)

  for (int step = 0; step < cfg.steps; ++step) {
    auto t0 = std::chrono::steady_clock::now();
    Batch batch = data.batch(sampler.next());
    Batch stats_batch = cfg.stats_batch_mode == StatsBatchMode::HeldOut
                            ? data.batch(stats_sampler.next())
                            : batch;

    StepRecord rec{};
    rec.step = step;

    try {
    if (cfg.optimizer == Optimizer::DdpNorm) {
      NormalizedActivations act = normalized_forward(topo, params, stats_batch.inputs, cfg.complexity);
      if (ema_gamma_sq.size() == 0)
        ema_gamma_sq = act.gamma_tilde_sq;
      else
        ema_gamma_sq = 0.9 * ema_gamma_sq + 0.1 * act.gamma_tilde_sq;
      LossGrad lg = ddpnorm_gradient(topo, params, batch, cfg.loss, cfg.complexity);
      rec.loss = lg.loss;
      rec.grad_norm = lg.grad.norm();
      WeightVector realized = realize_weights(topo, params, act.gamma_tilde_sq);
      NodeGamma ng = gamma_forward(topo, realized, stats_batch.inputs, cfg.complexity);
      rec.gamma_net = gamma_net(ng, topo);
      double kmin = 1.0, kmax = 1.0;
      bool first = true;
      for (int v : topo.internal_nodes()) {
        double g2 = act.gamma_tilde_sq[v];
        kmin = first ? g2 : std::min(kmin, g2);
        kmax = first ? g2 : std::max(kmax, g2);
        first = false;
      }
      rec.kappa_min = kmin;
      rec.kappa_max = kmax;
      if (!std::isfinite(rec.loss)) throw DivergenceError(step);
      params = sgd_step_tilde(params, lg.grad, cfg.eta);
    } else {
      LossGrad lg = loss_gradient(topo, params, batch, cfg.loss);
      rec.loss = lg.loss;
      rec.grad_norm = lg.grad.norm();
      NodeGamma ng = gamma_forward(topo, params, stats_batch.inputs, cfg.complexity);
      rec.gamma_net = gamma_net(ng, topo);
      if (!std::isfinite(rec.loss)) throw DivergenceError(step);
      if (runs_ddp_sgd(cfg.optimizer)) {
        WeightVector k = kappa(topo, params, stats_batch.inputs, cfg.complexity);
        rec.kappa_min = k.minCoeff();
        rec.kappa_max = k.maxCoeff();
        params = ddp_sgd_step(params, lg.grad, k, cfg.eta);
      } else {
        rec.kappa_min = 1.0;
        rec.kappa_max = 1.0;
        params -= cfg.eta * lg.grad;
      }
    }
    } catch (const DivergenceError&) {
      throw;
    } catch (const Error& e) {
      // overflow surfaces as a non-finite activation inside the forward pass
      if (std::string(e.what()).find("non-finite") != std::string::npos)
        throw DivergenceError(step);
      throw;
    }
    if (!params.allFinite()) throw DivergenceError(step);

    auto t1 = std::chrono::steady_clock::now();
    rec.ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    result.metrics.push_back(rec);
  }

  result.raw_params = params;
  if (cfg.optimizer == Optimizer::DdpNorm) {
    if (ema_gamma_sq.size() == 0) {
      // zero steps: realize with statistics from the whole dataset
      NormalizedActivations act = normalized_forward(topo, params, data.X, cfg.complexity);
      ema_gamma_sq = act.gamma_tilde_sq;
    }
    result.weights = realize_weights(topo, params, ema_gamma_sq);
  } else {
    result.weights = params;
  }
  return result;
}

TrainResult train_loop(const TrainConfig& cfg) {
  if (cfg.shape.size() < 2) throw ConfigError("shape", "needs at least two layers");
  NetworkTopology topo = NetworkTopology::layered(cfg.shape, cfg.bias);
  Dataset data = make_dataset(cfg.dataset);
  return train_loop(cfg, topo, data);
}

}  // namespace ddp
