// Copyright 2026 The NSNN Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nsnn/run.h"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <vector>

#include <json.hpp>

#include "nsnn/analysis.h"
#include "nsnn/errors.h"
#include "nsnn/fixtures.h"
#include "nsnn/learning.h"
#include "nsnn/model_io.h"
#include "nsnn/network.h"
#include "nsnn/perturb.h"
#include "nsnn/stability.h"

#ifndef NSNN_BUILD_ID
#define NSNN_BUILD_ID "unknown"
#endif

namespace nsnn {

using nlohmann::json;

std::string build_id() { return NSNN_BUILD_ID; }

namespace {

// Stream ids below the run seed.
enum : std::uint64_t {
  kDataStream = 1,
  kInitStream = 2,
  kTrainStream = 3,
  kEvalStream = 4,
  kStabilityStream = 5,
  kCodingStream = 6,
  kFitStream = 7,
  kGradStream = 8,
  kDsnnStream = 9,
};

// Shortest representation that parses back to the same double.
std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const ExperimentConfig& cfg,
            const std::string& header)
      : out_(path) {
    if (!out_) throw Error("cannot open " + path.string());
    out_ << "# seed=" << cfg.seed << " config_hash=" << cfg.hash() << "\n" << header << "\n";
  }

  template <typename... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
    out_ << "\n";
  }

 private:
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }

  std::ofstream out_;
};

json base_summary(const ExperimentConfig& cfg) {
  json s;
  s["task"] = cfg.task;
  s["build_id"] = build_id();
  s["seed"] = cfg.seed;
  s["config_hash"] = cfg.hash();
  s["config"] = json::parse(cfg.canonical_json());
  return s;
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string());
  out << doc.dump(2) << "\n";
}

std::vector<std::size_t> network_dims(const ExperimentConfig& cfg) {
  std::vector<std::size_t> dims{cfg.dataset.input_dim};
  dims.insert(dims.end(), cfg.hidden.begin(), cfg.hidden.end());
  dims.push_back(cfg.dataset.n_classes);
  return dims;
}

Mode mode_for(const Network& net) {
  for (const auto& l : net.layers) {
    if (!l.noise.is_deterministic()) return Mode::kSample;
  }
  return Mode::kDeterministic;
}

void check_rule(LearningRule rule, const NoiseModel& noise) {
  if (rule == LearningRule::kNdl && noise.is_deterministic()) {
    throw ConfigError("rule 'ndl' needs a stochastic noise family");
  }
}

struct TrainedModel {
  Network net;
  std::vector<EpochMetrics> metrics;
  double lr = 0.0;
  json grid = json::array();
};

// Trains with the config hyperparameters, or over lr_grid keeping the run
// with the best final training accuracy.
TrainedModel train_model(const ExperimentConfig& cfg, const SyntheticTask& task,
                         const NoiseModel& noise, LearningRule rule,
                         std::uint64_t stream, std::ostream& log) {
  check_rule(rule, noise);
  RngStream init_rng(cfg.seed, stream == kDsnnStream ? kDsnnStream : kInitStream);
  Network init = make_network(network_dims(cfg), noise, init_rng, cfg.init_gain, cfg.lif);
  init.loss_mode = cfg.loss_mode;

  std::vector<double> grid = cfg.lr_grid;
  if (grid.empty()) grid.push_back(cfg.optimizer.learning_rate);
  TrainedModel best;
  double best_acc = -1.0;
  for (double lr : grid) {
    TrainOptions opts;
    opts.rule = rule;
    opts.epochs = cfg.epochs;
    opts.batch_size = cfg.batch_size;
    opts.optimizer = cfg.optimizer;
    opts.optimizer.learning_rate = lr;
    opts.record_wall_time = cfg.record_timing;
    TrainResult r = train(init, task.train, task.test, opts, RngStream(cfg.seed, stream));
    double train_acc = 0.0, test_acc = 0.0;
    for (const auto& m : r.metrics) {
      (m.split == "train" ? train_acc : test_acc) = m.accuracy;
    }
    log << "  " << to_string(rule) << " lr=" << lr << " train_acc=" << train_acc
        << " test_acc=" << test_acc << "\n";
    best.grid.push_back({{"lr", lr}, {"train_accuracy", train_acc}, {"test_accuracy", test_acc}});
    if (train_acc > best_acc) {
      best_acc = train_acc;
      best.net = std::move(r.net);
      best.metrics = std::move(r.metrics);
      best.lr = lr;
    }
  }
  return best;
}

SyntheticTask make_task(const ExperimentConfig& cfg) {
  return generate_task(cfg.dataset, RngStream(cfg.seed, kDataStream));
}

Network load_required_model(const ExperimentConfig& cfg) {
  if (cfg.model_file.empty()) {
    throw ConfigError("task '" + cfg.task + "' requires model_file");
  }
  return load_model(cfg.model_file);
}

void check_input_dim(const Network& net, const ExperimentConfig& cfg) {
  if (net.input_dim() != cfg.dataset.input_dim ||
      net.output_dim() != cfg.dataset.n_classes) {
    throw ConfigError("model dimensions do not match the configured task");
  }
}

int task_train(const ExperimentConfig& cfg, const std::filesystem::path& dir,
               std::ostream& log) {
  const SyntheticTask task = make_task(cfg);
  TrainedModel m = train_model(cfg, task, cfg.noise, cfg.rule, kTrainStream, log);
  CsvWriter csv(dir / "metrics.csv", cfg, "epoch,split,loss,accuracy,lr,wall_ms");
  for (const auto& e : m.metrics) csv.row(e.epoch, e.split, e.loss, e.accuracy, e.lr, e.wall_ms);
  const ModelProvenance prov{cfg.seed, cfg.hash()};
  save_model(m.net, dir / "model.json", &prov);
  json s = base_summary(cfg);
  s["learning_rate"] = m.lr;
  s["lr_grid_results"] = m.grid;
  s["final_train_accuracy"] = m.metrics[m.metrics.size() - 2].accuracy;
  s["final_test_accuracy"] = m.metrics.back().accuracy;
  s["final_test_loss"] = m.metrics.back().loss;
  write_json(dir / "summary.json", s);
  return kExitOk;
}

int task_eval(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream&) {
  const Network net = load_required_model(cfg);
  check_input_dim(net, cfg);
  const SyntheticTask task = make_task(cfg);
  CsvWriter csv(dir / "metrics.csv", cfg, "split,loss,accuracy,passes");
  json s = base_summary(cfg);
  const RngStream rng(cfg.seed, kEvalStream);
  const std::pair<std::string, const SpikeDataset*> splits[] = {{"train", &task.train},
                                                                 {"test", &task.test}};
  for (std::size_t k = 0; k < 2; ++k) {
    const auto& [name, data] = splits[k];
    const EvalResult r =
        evaluate(net, *data, mode_for(net), rng.split(k), 0.0, cfg.eval_passes);
    csv.row(name, r.loss, r.accuracy, cfg.eval_passes);
    s[name + "_accuracy"] = r.accuracy;
    s[name + "_loss"] = r.loss;
  }
  write_json(dir / "summary.json", s);
  return kExitOk;
}

int task_perturb(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                 std::ostream& log) {
  const SyntheticTask task = make_task(cfg);
  std::vector<std::pair<std::string, Network>> models;
  auto kind = [](const Network& n) {
    return mode_for(n) == Mode::kSample ? std::string("nsnn") : std::string("dsnn");
  };
  if (!cfg.model_file.empty()) {
    Network net = load_model(cfg.model_file);
    check_input_dim(net, cfg);
    models.emplace_back(kind(net), std::move(net));
  } else {
    Network net = train_model(cfg, task, cfg.noise, cfg.rule, kTrainStream, log).net;
    models.emplace_back(kind(net), std::move(net));
    if (cfg.compare_dsnn) {
      models.emplace_back("dsnn", train_model(cfg, task, NoiseModel::none(),
                                              LearningRule::kSgl, kDsnnStream, log)
                                      .net);
    }
  }
  CsvWriter csv(dir / "sweep.csv", cfg, "attack,intensity,model_kind,seed,loss,accuracy");
  json s = base_summary(cfg);
  json results = json::array();
  for (std::size_t k = 0; k < models.size(); ++k) {
    const auto rows = robustness_sweep(models[k].second, models[k].first, task.test,
                                       cfg.dataset.coding, cfg.attack, cfg.intensities,
                                       cfg.seed, RngStream(cfg.seed, kEvalStream),
                                       cfg.eval_passes);
    for (const auto& r : rows) {
      csv.row(r.attack, r.intensity, r.model_kind, r.seed, r.loss, r.accuracy);
      results.push_back({{"model_kind", r.model_kind},
                         {"intensity", r.intensity},
                         {"accuracy", r.accuracy}});
    }
  }
  s["results"] = results;
  write_json(dir / "summary.json", s);
  return kExitOk;
}

int task_stability(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                   std::ostream& log) {
  const auto rows = stability_sweep(cfg.stability, RngStream(cfg.seed, kStabilityStream));
  CsvWriter csv(dir / "sweep.csv", cfg,
                "a1,a2,b2,variant,LB,UB,LE_mean,LE_stderr,dt,T,n_paths,closed_form,contained");
  bool all_contained = true;
  for (const auto& r : rows) {
    csv.row(r.a1, r.a2, r.b2, to_string(r.variant), r.bounds.lower, r.bounds.upper,
            r.estimate.mean, r.estimate.standard_error, r.dt, r.horizon, r.n_paths,
            r.closed_form, r.contained);
    if (r.variant == ErrorDiffusion::kConforming) all_contained &= r.contained;
    log << "  " << to_string(r.variant) << " (" << r.a1 << ", " << r.a2 << ", " << r.b2
        << ") LE=" << r.estimate.mean << " bounds=[" << r.bounds.lower << ", "
        << r.bounds.upper << "]\n";
  }
  json s = base_summary(cfg);
  s["rows"] = rows.size();
  s["conforming_rows_contained"] = all_contained;
  write_json(dir / "summary.json", s);
  return kExitOk;
}

int task_coding(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                std::ostream& log) {
  Network net;
  SyntheticTaskSpec spec = cfg.dataset;
  spec.n_test = cfg.coding_samples;
  const SyntheticTask task = generate_task(spec, RngStream(cfg.seed, kDataStream));
  if (!cfg.model_file.empty()) {
    net = load_model(cfg.model_file);
    check_input_dim(net, cfg);
  } else {
    net = train_model(cfg, task, cfg.noise, cfg.rule, kTrainStream, log).net;
  }
  const CodingReport rep =
      coding_report(net, task.test, cfg.n_trials, RngStream(cfg.seed, kCodingStream),
                    cfg.bootstrap);
  CsvWriter csv(dir / "report.csv", cfg, "sample_id,mean_fano,mean_cosine");
  for (std::size_t i = 0; i < rep.n_samples; ++i) {
    csv.row(i, rep.mean_fano[i], rep.mean_cosine[i]);
  }
  json s = base_summary(cfg);
  s["pearson_r"] = rep.pearson ? json(*rep.pearson) : json(nullptr);
  s["ci95"] = rep.ci ? json::array({rep.ci->lower, rep.ci->upper}) : json(nullptr);
  s["degenerate"] = rep.degenerate;
  s["n_samples"] = rep.n_samples;
  s["n_trials"] = rep.n_trials;
  s["prediction_space"] = rep.prediction_space;
  write_json(dir / "summary.json", s);
  return kExitOk;
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  }
  return t;
}

Matrix output_spikes(const Trace& tr) {
  const std::size_t last = tr.records.front().size() - 1;
  const std::size_t n = tr.at(0, last).spikes.size();
  Matrix s(tr.steps(), n);
  for (std::size_t t = 0; t < tr.steps(); ++t) {
    for (std::size_t m = 0; m < n; ++m) s(t, m) = tr.at(t, last).spikes[m];
  }
  return s;
}

int task_fit_spikes(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                    std::ostream& log) {
  if (cfg.noise.is_deterministic() && cfg.rule == LearningRule::kNdl) {
    throw ConfigError("fit_spikes with rule 'ndl' needs a stochastic noise family");
  }
  const SyntheticTask task = make_task(cfg);
  const Matrix& input = task.train.samples.front().input;
  const RngStream rng(cfg.seed, kFitStream);
  const std::vector<std::size_t> dims{cfg.dataset.input_dim, cfg.fit_neurons,
                                      cfg.dataset.n_classes};
  RngStream teacher_rng = rng.split(0);
  const Network teacher = make_network(dims, cfg.noise, teacher_rng, 2.0, cfg.lif);
  RngStream record_rng = rng.split(1);
  const Matrix recorded =
      transpose(output_spikes(forward(teacher, input, mode_for(teacher), record_rng)));
  RngStream student_rng = rng.split(2);
  Network student = make_network(dims, cfg.noise, student_rng, cfg.init_gain, cfg.lif);

  Optimizer opt(cfg.optimizer, cfg.fit_iters);
  Vector params = flatten_parameters(student);
  CsvWriter csv(dir / "metrics.csv", cfg, "iter,psp_mmd_loss");
  RngStream sample_rng = rng.split(3);
  std::vector<double> losses;
  for (std::size_t it = 0; it < cfg.fit_iters; ++it) {
    const Trace tr = forward(student, input, mode_for(student), sample_rng);
    const SpikeTrainPair pair{transpose(output_spikes(tr)), recorded, cfg.psp_tau};
    const double loss = psp_mmd_loss(pair);
    if (!std::isfinite(loss)) throw TrainingError("non-finite fitting loss", it);
    const Matrix d_spikes = transpose(psp_mmd_gradient(pair));
    const GradientSet g = backward_from_spike_grads(student, tr, d_spikes, cfg.rule);
    opt.apply(params, g.flatten());
    assign_parameters(student, params);
    csv.row(it, loss);
    losses.push_back(loss);
  }
  auto window_mean = [&](std::size_t begin, std::size_t end) {
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += losses[i];
    return end > begin ? sum / static_cast<double>(end - begin) : 0.0;
  };
  const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(10, losses.size()));
  json s = base_summary(cfg);
  s["initial_loss"] = losses.empty() ? 0.0 : window_mean(0, w);
  s["final_loss"] = losses.empty() ? 0.0 : window_mean(losses.size() - w, losses.size());
  log << "  psp-mmd " << s["initial_loss"] << " -> " << s["final_loss"] << "\n";
  write_json(dir / "summary.json", s);
  return kExitOk;
}

int task_grad_check(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                    std::ostream& log) {
  Network net;
  if (!cfg.model_file.empty()) {
    net = load_model(cfg.model_file);
  } else {
    if (cfg.noise.is_deterministic()) {
      throw ConfigError("grad_check needs a stochastic noise family");
    }
    net = tiny_222(cfg.noise);
  }
  if (cfg.grad_label >= net.output_dim()) throw ConfigError("grad_label out of range");
  Matrix inputs(cfg.grad_steps, net.input_dim());
  for (std::size_t t = 0; t < cfg.grad_steps; ++t) inputs(t, t % net.input_dim()) = 1.0;
  const Objective objective = Objective::cross_entropy(cfg.grad_label);

  const Vector exact = exact_gradient(net, inputs, objective).flatten();
  RngStream rng(cfg.seed, kGradStream);
  const GradientEstimate est =
      local_marg_gradient(net, inputs, objective, rng, cfg.grad_samples);
  const Vector mean = est.mean.flatten();
  const Vector se = est.standard_error.flatten();

  CsvWriter csv(dir / "grad_check.csv", cfg, "index,exact,estimate,stderr,abs_bias_over_se");
  double worst = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double bias = std::abs(mean[i] - exact[i]);
    double z = 0.0;
    if (se[i] > 0.0) {
      z = bias / se[i];
    } else if (bias > 1e-9) {
      z = std::numeric_limits<double>::infinity();
    }
    worst = std::max(worst, z);
    csv.row(i, exact[i], mean[i], se[i], z);
  }
  const bool pass = worst < cfg.grad_threshold;
  json s = base_summary(cfg);
  s["max_abs_bias_over_se"] = std::isfinite(worst) ? json(worst) : json("inf");
  s["threshold"] = cfg.grad_threshold;
  s["n_samples"] = est.samples;
  s["parameters"] = exact.size();
  s["pass"] = pass;
  write_json(dir / "summary.json", s);
  log << "  max |bias|/SE = " << worst << (pass ? " (pass)" : " (FAIL)") << "\n";
  return pass ? kExitOk : kExitFailure;
}

}  // namespace

int run_config(const ExperimentConfig& cfg, std::ostream& log) {
  try {
    if (!is_known_task(cfg.task)) throw ConfigError("unknown task '" + cfg.task + "'");
    const std::filesystem::path dir = cfg.out;
    std::filesystem::create_directories(dir);
    log << "nsnn " << cfg.task << " seed=" << cfg.seed << " config_hash=" << cfg.hash()
        << " out=" << dir.string() << "\n";
    if (cfg.task == "train") return task_train(cfg, dir, log);
    if (cfg.task == "eval") return task_eval(cfg, dir, log);
    if (cfg.task == "perturb") return task_perturb(cfg, dir, log);
    if (cfg.task == "stability") return task_stability(cfg, dir, log);
    if (cfg.task == "coding") return task_coding(cfg, dir, log);
    if (cfg.task == "fit_spikes") return task_fit_spikes(cfg, dir, log);
    return task_grad_check(cfg, dir, log);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const TrainingError& e) {
    log << "training diverged: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const DivergenceError& e) {
    log << "simulation diverged: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const CapacityError& e) {
    log << "capacity guard: " << e.what() << "\n";
    return kExitCapacity;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

int run(const RunRequest& request, std::ostream& log) {
  try {
    if (!is_known_task(request.task)) {
      throw ConfigError("unknown task '" + request.task + "'");
    }
    ExperimentConfig cfg = load_config(request.config_path);
    if (!cfg.task.empty() && cfg.task != request.task) {
      throw ConfigError("config is for task '" + cfg.task + "', not '" + request.task + "'");
    }
    cfg.task = request.task;
    if (request.seed) cfg.seed = *request.seed;
    if (request.out) cfg.out = *request.out;
    return run_config(cfg, log);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace nsnn
