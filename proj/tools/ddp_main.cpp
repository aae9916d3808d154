// ddp: train / verify / analyze over feedforward ReLU networks.
//
// Exit codes: 0 success, 1 config or property failure, 2 divergence,
// 3 resource limit (path explosion).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ddp/io.hpp"
#include "ddp/paths.hpp"
#include "ddp/rng.hpp"
#include "ddp/train.hpp"
#include "ddp/verify.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace ddp;

template <typename T>
T field(const json& j, const std::string& name, const T& fallback) {
  if (!j.contains(name)) return fallback;
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(name, e.what());
  }
}

template <typename T>
T required(const json& j, const std::string& name) {
  if (!j.contains(name)) throw ConfigError(name, "missing required field");
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(name, e.what());
  }
}

SMode s_mode_from_string(const std::string& s) {
  if (s == "variance") return SMode::Variance;
  if (s == "second_moment") return SMode::SecondMoment;
  throw ConfigError("complexity.s_mode", "unknown mode '" + s + "'");
}

const char* to_string(SMode m) { return m == SMode::Variance ? "variance" : "second_moment"; }

DatasetSpec parse_dataset(const json& j) {
  DatasetSpec d;
  std::string type = required<std::string>(j, "type");
  if (type == "teacher_student") {
    d.type = DatasetSpec::Type::TeacherStudent;
    d.shape = required<std::vector<int>>(j, "shape");
    d.noise = field(j, "noise", 0.0);
  } else if (type == "gaussian_blobs") {
    d.type = DatasetSpec::Type::GaussianBlobs;
    d.k = field(j, "k", 2);
    d.dim = field(j, "dim", 2);
    d.separation = field(j, "separation", 6.0);
  } else if (type == "csv") {
    d.type = DatasetSpec::Type::Csv;
    d.path = required<std::string>(j, "path");
    d.label_cols = field(j, "label_cols", 1);
  } else {
    throw ConfigError("dataset.type", "unknown dataset type '" + type + "'");
  }
  if (d.type != DatasetSpec::Type::Csv) d.n = required<int>(j, "n");
  d.seed = field<std::uint64_t>(j, "seed", 0);
  return d;
}

TrainConfig parse_train_config(const json& j) {
  TrainConfig cfg;
  cfg.optimizer = optimizer_from_string(field<std::string>(j, "optimizer", "ddp_sgd"));
  // alias defaults when the complexity block leaves them unspecified
  if (cfg.optimizer == Optimizer::DiagNaturalGradient) {
    cfg.complexity.alpha = 1.0;
    cfg.complexity.s_mode = SMode::SecondMoment;
  }
  if (j.contains("complexity")) {
    const json& c = j.at("complexity");
    cfg.complexity.alpha = field(c, "alpha", cfg.complexity.alpha);
    if (c.contains("s_mode"))
      cfg.complexity.s_mode = s_mode_from_string(c.at("s_mode").get<std::string>());
    cfg.complexity.input_gamma_sq = field(c, "input_gamma_sq", cfg.complexity.input_gamma_sq);
    cfg.complexity.kappa_floor = field(c, "kappa_floor", cfg.complexity.kappa_floor);
  }
  std::string loss = field<std::string>(j, "loss", "squared");
  if (loss == "squared")
    cfg.loss = LossKind::Squared;
  else if (loss == "softmax_cross_entropy")
    cfg.loss = LossKind::SoftmaxCrossEntropy;
  else
    throw ConfigError("loss", "unknown loss '" + loss + "'");
  cfg.eta = required<double>(j, "eta");
  cfg.batch_size = field(j, "batch_size", 64);
  cfg.steps = required<int>(j, "steps");
  cfg.seed = field<std::uint64_t>(j, "seed", 0);
  std::string mode = field<std::string>(j, "stats_batch_mode", "same");
  if (mode == "same")
    cfg.stats_batch_mode = StatsBatchMode::Same;
  else if (mode == "held_out")
    cfg.stats_batch_mode = StatsBatchMode::HeldOut;
  else
    throw ConfigError("stats_batch_mode", "expected 'same' or 'held_out'");
  cfg.shape = required<std::vector<int>>(j, "shape");
  cfg.bias = field(j, "bias", false);
  if (!j.contains("dataset")) throw ConfigError("dataset", "missing required field");
  cfg.dataset = parse_dataset(j.at("dataset"));
  try {
    cfg.finalize();
  } catch (const Error& e) {
    if (dynamic_cast<const ConfigError*>(&e)) throw;
    throw ConfigError("config", e.what());
  }
  return cfg;
}

json echo_config(const TrainConfig& cfg) {
  json c;
  c["optimizer"] = ddp::to_string(cfg.optimizer);
  c["loss"] = cfg.loss == LossKind::Squared ? "squared" : "softmax_cross_entropy";
  c["eta"] = cfg.eta;
  c["batch_size"] = cfg.batch_size;
  c["steps"] = cfg.steps;
  c["seed"] = cfg.seed;
  c["stats_batch_mode"] = cfg.stats_batch_mode == StatsBatchMode::Same ? "same" : "held_out";
  c["shape"] = cfg.shape;
  c["bias"] = cfg.bias;
  c["complexity"] = {{"alpha", cfg.complexity.alpha},
                     {"s_mode", to_string(cfg.complexity.s_mode)},
                     {"input_gamma_sq", cfg.complexity.input_gamma_sq},
                     {"kappa_floor", cfg.complexity.kappa_floor}};
  json d;
  switch (cfg.dataset.type) {
    case DatasetSpec::Type::TeacherStudent:
      d = {{"type", "teacher_student"}, {"shape", cfg.dataset.shape}, {"noise", cfg.dataset.noise}};
      break;
    case DatasetSpec::Type::GaussianBlobs:
      d = {{"type", "gaussian_blobs"},
           {"k", cfg.dataset.k},
           {"dim", cfg.dataset.dim},
           {"separation", cfg.dataset.separation}};
      break;
    case DatasetSpec::Type::Csv:
      d = {{"type", "csv"}, {"path", cfg.dataset.path}, {"label_cols", cfg.dataset.label_cols}};
      break;
  }
  d["n"] = cfg.dataset.n;
  d["seed"] = cfg.dataset.seed;
  c["dataset"] = d;
  return c;
}

int cmd_train(const std::string& config_path, const std::string& out_dir) {
  json raw = load_json(config_path);
  TrainConfig cfg = parse_train_config(raw);
  json echo = echo_config(cfg);
  std::cout << "resolved config: " << echo.dump() << "\n";

  NetworkTopology topo = NetworkTopology::layered(cfg.shape, cfg.bias);
  Dataset data = make_dataset(cfg.dataset);

  std::filesystem::create_directories(out_dir);
  TrainResult result = train_loop(cfg, topo, data);

  std::ofstream metrics(out_dir + "/metrics.jsonl");
  if (!metrics) throw Error("cannot write '" + out_dir + "/metrics.jsonl'");
  for (const StepRecord& r : result.metrics) {
    json line = {{"step", r.step},           {"loss", r.loss},
                 {"gamma_net", r.gamma_net}, {"grad_norm", r.grad_norm},
                 {"kappa_min", r.kappa_min}, {"kappa_max", r.kappa_max},
                 {"ms", r.ms}};
    metrics << line.dump() << "\n";
  }
  save_topology(topo, out_dir + "/topology.json");
  save_weights(result.weights, out_dir + "/weights.json");
  json checkpoint = {{"config", echo},
                     {"config_hash", fnv1a_hex(echo.dump())},
                     {"seed", cfg.seed},
                     {"final_loss", result.metrics.empty() ? 0.0 : result.metrics.back().loss}};
  save_json(checkpoint, out_dir + "/checkpoint.json");
  std::cout << "wrote " << result.metrics.size() << " metric records to " << out_dir << "\n";
  return 0;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, int trials) {
  std::cout << "resolved config: suite=" << suite << " seed=" << seed << " trials=" << trials
            << "\n";
  std::vector<SuiteResult> results = run_suites(suite, seed, trials);
  bool all_pass = true;
  char buf[64];
  for (const SuiteResult& s : results) {
    for (const TrialResult& t : s.trials) {
      std::snprintf(buf, sizeof buf, "%.12e", t.max_error);
      std::cout << s.suite << " trial " << t.trial << ": max_error=" << buf
                << " tol=" << t.tolerance << (t.pass ? " PASS" : " FAIL") << "  (" << t.note
                << ")\n";
    }
    std::cout << s.suite << ": " << (s.pass ? "PASS" : "FAIL") << "\n";
    all_pass = all_pass && s.pass;
  }
  return all_pass ? 0 : 1;
}

int cmd_analyze(const std::string& net_path, const std::string& weights_path,
                const std::string& data_path, const std::string& report_path,
                unsigned long long path_limit, double rank_tol, std::uint64_t seed) {
  NetworkTopology topo = load_topology(net_path);
  WeightVector w = load_weights(weights_path, topo);
  std::cout << "resolved config: net=" << net_path << " weights=" << weights_path
            << " paths_limit=" << path_limit << " rank_tol=" << rank_tol << "\n";

  PathSet paths = enumerate_paths(topo, path_limit);
  PathJacobian pj = path_jacobian(paths, topo, w);
  int rank_j = numerical_rank(pj.J, rank_tol);

  Eigen::MatrixXd probes;
  if (!data_path.empty()) {
    probes = read_csv(data_path);
    if (probes.cols() != static_cast<int>(topo.input_nodes().size()))
      throw ConfigError(data_path, "column count does not match the network inputs");
  } else {
    Rng rng(seed);
    probes.resize(4 * topo.edge_count(), topo.input_nodes().size());
    for (int i = 0; i < probes.rows(); ++i)
      for (int j = 0; j < probes.cols(); ++j) probes(i, j) = rng.normal();
  }
  DegreesOfFreedom dof = degrees_of_freedom(topo, w, probes, rank_tol);
  DistributionFisher fisher = distribution_fisher(topo, w, probes, MetricSpec::squared_distance(), rank_tol);

  json report = {{"paths", paths.size()},
                 {"rank_J", rank_j},
                 {"predicted_rank", generic_rank_prediction(topo)},
                 {"d_G", dof.d_G},
                 {"dim_N", dof.dim_N},
                 {"d_GD", fisher.rank},
                 {"probe_count", dof.probe_count},
                 {"tolerances", {{"rank_rel_tol", rank_tol}}}};
  if (report_path.empty())
    std::cout << report.dump(2) << "\n";
  else
    save_json(report, report_path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"training, verification and path analysis for feedforward ReLU networks"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  CLI::App* train = app.add_subcommand("train", "run a training loop from a config file");
  train->add_option("--config", config_path, "config file")->required();
  train->add_option("--out", out_dir, "output directory");

  std::string suite = "all";
  std::uint64_t seed = 0;
  int trials = 10;
  CLI::App* verify = app.add_subcommand("verify", "run property suites on random instances");
  verify->add_option("--suite", suite, "suite name or 'all'");
  verify->add_option("--seed", seed, "base seed");
  verify->add_option("--trials", trials, "trials per suite");

  std::string net_path, weights_path, data_path, report_path;
  unsigned long long path_limit = 100000;
  double rank_tol = 1e-8;
  std::uint64_t analyze_seed = 0;
  CLI::App* analyze = app.add_subcommand("analyze", "path/rank analysis of a trained network");
  analyze->add_option("--net", net_path, "topology file")->required();
  analyze->add_option("--weights", weights_path, "weights file")->required();
  analyze->add_option("--data", data_path, "probe inputs csv (default: random probes)");
  analyze->add_option("--report", report_path, "report output path (default: stdout)");
  analyze->add_option("--paths-limit", path_limit, "path enumeration limit");
  analyze->add_option("--rank-tol", rank_tol, "relative singular value tolerance");
  analyze->add_option("--seed", analyze_seed, "seed for random probes");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return cmd_train(config_path, out_dir);
    if (verify->parsed()) return cmd_verify(suite, seed, trials);
    return cmd_analyze(net_path, weights_path, data_path, report_path, path_limit, rank_tol,
                       analyze_seed);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const PathLimitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
