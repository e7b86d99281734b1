// Copyright 2026 The symce Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#include "symce/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "symce/errors.hpp"
#include "symce/gradcheck.hpp"
#include "symce/theory.hpp"

namespace symce {

using nlohmann::json;

namespace {

constexpr double kIdentityTolerance = 1e-10;
constexpr double kAsymmetricEta = 0.3;

std::string csv_row(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) line += ',';
    line += fields[i];
  }
  line += '\n';
  return line;
}

json config_echo(const ExperimentConfig& c, const Cell& cell, const TrainConfig& tc) {
  json data = {{"kind", to_string(c.dataset)}};
  if (c.dataset == DatasetKind::Mnist) {
    data["mnist_dir"] = c.mnist_dir.string();
    data["train_limit"] = c.train_limit;
    data["test_limit"] = c.test_limit;
  } else {
    data["classes"] = c.blob_classes;
    data["dim"] = c.blob_dim;
    data["per_class"] = c.blob_per_class;
    data["separation"] = c.blob_separation;
  }
  json noise = {{"kind", to_string(c.noise)}, {"eta", cell.eta}};
  if (tc.noise) noise["transition"] = to_text(*tc.noise);
  return {
      {"dataset", data},
      {"loss",
       {{"name", cell.loss},
        {"alpha", cell.alpha},
        {"beta", cell.beta},
        {"A", cell.A},
        {"gce_q", c.params.gce_exponent},
        {"lsr_eps", c.params.lsr_eps},
        {"bootstrap_soft_weight", c.params.bootstrap_soft_weight},
        {"bootstrap_hard_weight", c.params.bootstrap_hard_weight}}},
      {"noise", noise},
      {"hidden", tc.hidden},
      {"epochs", tc.epochs},
      {"batch_size", tc.batch_size},
      {"lr", tc.base_lr},
      {"lr_milestones", tc.lr_milestones},
      {"lr_factor", tc.lr_factor},
      {"momentum", tc.momentum},
      {"weight_decay", tc.weight_decay},
      {"seed", tc.seed},
      {"repetition", cell.repetition},
  };
}

int run_guarded(std::ostream& log, const std::function<int()>& body) {
  try {
    return body();
  } catch (const Divergence& e) {
    log << "error: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const ResourceLimit& e) {
    log << "error: " << e.what() << '\n';
    return kExitResourceLimit;
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidParameter& e) {
    log << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitFailed;
  }
}

void write_run_artifacts(const std::filesystem::path& dir, const ExperimentConfig& config,
                         const Cell& cell, const TrainRun& run, std::size_t classes) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "run.json", run_json(config, cell, run));
  write_file_atomic(dir / "epochs.csv", epochs_csv(run, classes));
  write_file_atomic(dir / "final_report.csv", final_report_csv(run));
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw Error("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

std::pair<Dataset, Dataset> load_experiment_data(const ExperimentConfig& config) {
  if (config.dataset == DatasetKind::Blobs) {
    RngStream rng(config.seed, 0xda7a);
    return synthetic_blobs(config.blob_classes, config.blob_dim, config.blob_per_class,
                           config.blob_separation, rng);
  }
  MnistOptions opts;
  opts.dir = config.mnist_dir.empty() ? default_data_dir() / "mnist" : config.mnist_dir;
  opts.train_limit = config.train_limit;
  opts.test_limit = config.test_limit;
  try {
    return load_mnist(opts);
  } catch (const std::filesystem::filesystem_error& e) {
    throw ConfigError(std::string("cannot load MNIST: ") + e.what());
  }
}

std::optional<NoiseModel> make_noise_model(NoiseKind kind, double eta, std::size_t classes) {
  switch (kind) {
    case NoiseKind::None: return std::nullopt;
    case NoiseKind::Symmetric: return symmetric_matrix(classes, eta);
    case NoiseKind::Pairflip: {
      std::vector<FlipPair> pairs;
      if (classes == 10) {
        pairs = mnist_flip_pairs();
      } else {
        for (std::size_t c = 0; c < classes; ++c) pairs.emplace_back(c, (c + 1) % classes);
      }
      return pairflip_matrix(classes, eta, pairs);
    }
  }
  return std::nullopt;
}

std::vector<Cell> expand_grid(const ExperimentConfig& config) {
  std::vector<Cell> cells;
  for (const auto& loss : config.losses) {
    for (double alpha : config.alphas) {
      for (double beta : config.betas) {
        for (double a : config.As) {
          for (double eta : config.etas) {
            for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
              cells.push_back({loss, alpha, beta, a, eta, rep, derive_seed(config.seed, rep)});
            }
          }
        }
      }
    }
  }
  return cells;
}

TrainConfig make_train_config(const ExperimentConfig& config, const Cell& cell,
                              std::size_t classes) {
  TrainConfig tc;
  tc.hidden = config.hidden;
  tc.epochs = config.epochs;
  tc.batch_size = config.batch_size;
  tc.base_lr = config.lr;
  tc.lr_milestones = config.lr_milestones;
  tc.lr_factor = config.lr_factor;
  tc.momentum = config.momentum;
  tc.weight_decay = config.weight_decay;
  tc.seed = cell.seed;
  tc.noise = cell.eta > 0.0 ? make_noise_model(config.noise, cell.eta, classes) : std::nullopt;

  LossParams params = config.params;
  params.alpha = cell.alpha;
  params.beta = cell.beta;
  params.A = cell.A;
  const NoiseModel transition = tc.noise ? *tc.noise : NoiseModel(Matrix::identity(classes), 0.0);
  tc.loss = make_loss_preset(cell.loss, params, &transition);
  tc.validate();
  return tc;
}

std::string run_json(const ExperimentConfig& config, const Cell& cell, const TrainRun& run) {
  json clean = json::array();
  for (const auto& c : run.clean_confidence) {
    clean.push_back(c ? json(*c) : json(nullptr));
  }
  json doc = {
      {"schema", kRunSchemaVersion},
      {"csv_schema", kCsvSchemaVersion},
      {"config", config_echo(config, cell, run.config)},
      {"realized_noise", run.realized_noise},
      {"last_accuracy", run.last_accuracy()},
      {"best_accuracy", run.best_accuracy()},
      {"final_class_spread", run.last_spread()},
      {"test_accuracy", run.test_accuracy},
      {"class_accuracy", run.class_accuracy},
      {"class_spread", run.class_spread},
      {"train_loss", run.train_loss},
      {"confusion", run.confusion},
      {"prediction",
       {{"predicted", run.prediction.predicted},
        {"true_positive", run.prediction.true_positive}}},
      {"clean_confidence", clean},
  };
  return doc.dump(2) + "\n";
}

std::string epochs_csv(const TrainRun& run, std::size_t classes) {
  std::vector<std::string> header = {"epoch", "overall_acc"};
  for (std::size_t k = 0; k < classes; ++k) header.push_back("acc_class_" + std::to_string(k));
  std::string out = csv_row(header);
  for (std::size_t e = 0; e < run.test_accuracy.size(); ++e) {
    std::vector<std::string> row = {std::to_string(e + 1), format_double(run.test_accuracy[e])};
    for (double a : run.class_accuracy[e]) row.push_back(format_double(a));
    out += csv_row(row);
  }
  return out;
}

std::string final_report_csv(const TrainRun& run) {
  std::string out = csv_row({"section", "row", "col", "value"});
  auto cell = [&](const char* section, std::size_t r, std::string col, std::string value) {
    out += csv_row({section, std::to_string(r), std::move(col), std::move(value)});
  };
  for (std::size_t r = 0; r < run.confusion.size(); ++r) {
    for (std::size_t c = 0; c < run.confusion[r].size(); ++c) {
      cell("confusion", r, std::to_string(c), std::to_string(run.confusion[r][c]));
    }
  }
  for (std::size_t k = 0; k < run.prediction.predicted.size(); ++k) {
    cell("predicted", k, "", std::to_string(run.prediction.predicted[k]));
    cell("true_positive", k, "", std::to_string(run.prediction.true_positive[k]));
  }
  if (!run.class_accuracy.empty()) {
    const auto& last = run.class_accuracy.back();
    for (std::size_t k = 0; k < last.size(); ++k) cell("class_accuracy", k, "", format_double(last[k]));
  }
  for (std::size_t c = 0; c < run.clean_confidence.size(); ++c) {
    if (!run.clean_confidence[c]) continue;
    const auto& profile = *run.clean_confidence[c];
    for (std::size_t k = 0; k < profile.size(); ++k) {
      cell("clean_confidence", c, std::to_string(k), format_double(profile[k]));
    }
  }
  return out;
}

int cmd_train(const ExperimentConfig& config, std::ostream& log) {
  return run_guarded(log, [&] {
    const auto cells = expand_grid(config);
    if (cells.size() != config.repetitions || config.repetitions != 1) {
      throw ConfigError("train: loss, alpha, beta, A and eta need exactly one value each "
                        "and repetitions must be 1 (use sweep for grids)");
    }
    const Cell& cell = cells.front();
    const auto [train_set, test_set] = load_experiment_data(config);
    const TrainConfig tc = make_train_config(config, cell, train_set.classes);
    const TrainRun run = train(train_set, test_set, tc);
    write_run_artifacts(config.out_dir, config, cell, run, train_set.classes);
    log << "train: last_acc " << format_double(run.last_accuracy()) << " best_acc "
        << format_double(run.best_accuracy()) << " realized_noise "
        << format_double(run.realized_noise) << '\n';
    return kExitOk;
  });
}

int cmd_sweep(const ExperimentConfig& config, std::size_t jobs, std::ostream& log) {
  return run_guarded(log, [&] {
    const auto cells = expand_grid(config);
    if (cells.empty()) throw ConfigError("sweep: empty grid");
    const auto [train_set, test_set] = load_experiment_data(config);
    const std::size_t k = train_set.classes;
    // Build every TrainConfig up front so parameter errors stop the sweep early.
    std::vector<TrainConfig> configs;
    for (const auto& c : cells) configs.push_back(make_train_config(config, c, k));

    std::vector<std::string> rows(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) {
        const Cell& c = cells[i];
        std::vector<std::string> row = {c.loss, format_double(c.alpha), format_double(c.beta),
                                        format_double(c.A), format_double(c.eta),
                                        std::to_string(c.seed)};
        std::string status = "ok";
        try {
          const TrainRun run = train(train_set, test_set, configs[i]);
          row.push_back(format_double(run.last_accuracy()));
          row.push_back(format_double(run.best_accuracy()));
          row.push_back(format_double(run.last_spread()));
          row.push_back(format_double(run.realized_noise));
          if (config.cell_outputs) {
            char name[32];
            std::snprintf(name, sizeof name, "cell_%04zu", i);
            write_run_artifacts(config.out_dir / "cells" / name, config, c, run, k);
          }
        } catch (const Divergence& e) {
          row.resize(6);
          row.insert(row.end(), 4, "");
          status = "diverged_epoch_" + std::to_string(e.epoch());
        } catch (const std::exception& e) {
          row.resize(6);
          row.insert(row.end(), 4, "");
          status = "error";
          std::lock_guard lock(log_mutex);
          log << "sweep: cell " << i << " failed: " << e.what() << '\n';
        }
        row.push_back(status);
        rows[i] = csv_row(row);
        std::lock_guard lock(log_mutex);
        log << "sweep: cell " << i + 1 << "/" << cells.size() << " " << status << '\n';
      }
    };
    const std::size_t n_workers = std::max<std::size_t>(1, std::min(jobs, cells.size()));
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(worker);
      worker();
    }

    std::string csv = csv_row({"loss", "alpha", "beta", "A", "eta", "seed", "last_acc", "best_acc",
                               "class_acc_spread", "realized_noise", "status"});
    for (const auto& r : rows) csv += r;
    std::filesystem::create_directories(config.out_dir);
    write_file_atomic(config.out_dir / "sweep.csv", csv);
    json manifest = {{"schema", kRunSchemaVersion},
                     {"csv_schema", kCsvSchemaVersion},
                     {"cells", cells.size()},
                     {"base_config", config_echo(config, cells.front(), configs.front())}};
    write_file_atomic(config.out_dir / "sweep.json", manifest.dump(2) + "\n");
    return kExitOk;
  });
}

int cmd_verify_theorem(const ExperimentConfig& config, std::ostream& log) {
  return run_guarded(log, [&] {
    bool all_pass = true;
    json identity = json::array();
    RngStream rng(config.seed, 0x7e0);
    for (std::size_t k : config.classes) {
      if (k < 2) throw ConfigError("verify-theorem: classes must be at least 2");
      std::vector<FixedClassifier> fs;
      std::vector<std::vector<std::size_t>> labels;
      for (std::size_t i = 0; i < config.classifiers; ++i) {
        fs.push_back(random_classifier(config.samples, k, rng));
        std::vector<std::size_t> y(config.samples);
        for (auto& v : y) v = rng.uniform_index(k);
        labels.push_back(std::move(y));
      }
      for (double eta : config.theorem_etas) {
        for (double a : config.theorem_As) {
          double worst = 0.0;
          double clean_sum = 0.0;
          for (std::size_t i = 0; i < fs.size(); ++i) {
            const RiskReport r = verify_symmetric_identity(fs[i], labels[i], eta, a, k);
            worst = std::max(worst, std::isfinite(r.residual) ? r.residual
                                                               : std::numeric_limits<double>::infinity());
            clean_sum += r.clean_risk;
          }
          const bool pass = worst < kIdentityTolerance;
          all_pass = all_pass && pass;
          const double kd = static_cast<double>(k);
          identity.push_back({{"classes", k},
                              {"eta", eta},
                              {"A", a},
                              {"classifiers", fs.size()},
                              {"mean_clean_risk", fs.empty() ? 0.0 : clean_sum / fs.size()},
                              {"max_residual", worst},
                              {"condition", eta < 1.0 - 1.0 / kd ? "met" : "condition unmet"},
                              {"pass", pass}});
        }
      }
    }

    json minimizers = json::array();
    const std::size_t gk = config.grid_classes;
    std::vector<std::size_t> grid_labels(config.grid_samples);
    for (std::size_t i = 0; i < grid_labels.size(); ++i) grid_labels[i] = i % gk;
    const double a = config.theorem_As.empty() ? -4.0 : config.theorem_As.front();
    auto record = [&](const std::string& loss_name, const LossSpec& loss, const NoiseModel& model,
                      const std::string& noise, bool asserted, const std::string& precondition) {
      const MinimizerSets m = brute_force_minimizers(grid_labels, gk, loss, model,
                                                     config.grid_resolution);
      std::string status;
      if (!asserted) {
        status = precondition.empty() ? "recorded" : precondition;
      } else if (noise == "asymmetric" && m.clean_min > 0.0) {
        status = "hypothesis unmet";
      } else {
        status = m.equal() ? "pass" : "fail";
        all_pass = all_pass && m.equal();
      }
      minimizers.push_back({{"loss", loss_name},
                            {"noise", noise},
                            {"eta", model.eta()},
                            {"tuples", m.tuples},
                            {"clean_min", m.clean_min},
                            {"noisy_min", m.noisy_min},
                            {"clean_argmin_size", m.clean.size()},
                            {"noisy_argmin_size", m.noisy.size()},
                            {"equal", m.equal()},
                            {"asserted", asserted},
                            {"status", status}});
      log << "verify-theorem: " << loss_name << " " << noise << " eta " << model.eta() << ": "
          << status << '\n';
    };
    const double gkd = static_cast<double>(gk);
    for (double eta : config.theorem_etas) {
      const NoiseModel sym = symmetric_matrix(gk, eta);
      const bool met = eta < 1.0 - 1.0 / gkd;
      record("rce", LossSpec::rce(a), sym, "symmetric", met, met ? "" : "condition unmet");
      record("ce", LossSpec::ce(), sym, "symmetric", false, "");
    }
    std::vector<FlipPair> cyclic;
    for (std::size_t c = 0; c < gk; ++c) cyclic.emplace_back(c, (c + 1) % gk);
    const NoiseModel asym = pairflip_matrix(gk, kAsymmetricEta, cyclic);
    const bool cond = check_asymmetric_condition(asym);
    record("rce", LossSpec::rce(a), asym, "asymmetric", cond, cond ? "" : "condition unmet");

    json report = {{"schema", kRunSchemaVersion},
                   {"seed", config.seed},
                   {"identity_tolerance", kIdentityTolerance},
                   {"identity", identity},
                   {"grid", {{"classes", gk}, {"samples", config.grid_samples},
                             {"resolution", config.grid_resolution}, {"A", a}}},
                   {"minimizers", minimizers},
                   {"passed", all_pass}};
    std::filesystem::create_directories(config.out_dir);
    write_file_atomic(config.out_dir / "theorem_report.json", report.dump(2) + "\n");
    log << "verify-theorem: " << (all_pass ? "all checks passed" : "FAILED") << '\n';
    return all_pass ? kExitOk : kExitFailed;
  });
}

int cmd_grad_check(const ExperimentConfig& config, std::ostream& log) {
  return run_guarded(log, [&] {
    GradCheckOptions opts;
    opts.losses = config.check_losses;
    opts.classes = config.check_classes;
    opts.trials = config.trials;
    opts.seed = config.seed;
    opts.saturate = config.saturate;
    opts.params = config.params;
    if (!config.alphas.empty()) opts.params.alpha = config.alphas.front();
    if (!config.betas.empty()) opts.params.beta = config.betas.front();
    if (!config.As.empty()) opts.params.A = config.As.front();
    const auto rows = run_grad_check(opts);
    std::string csv = csv_row({"loss", "K", "max_rel_err"});
    bool all_pass = true;
    for (const auto& r : rows) {
      csv += csv_row({r.loss, std::to_string(r.classes), format_double(r.max_rel_err)});
      all_pass = all_pass && r.passed;
      log << "grad-check: " << r.loss << " K=" << r.classes << " max_rel_err "
          << format_double(r.max_rel_err) << (r.passed ? "" : "  FAIL") << '\n';
    }
    std::filesystem::create_directories(config.out_dir);
    write_file_atomic(config.out_dir / "gradcheck.csv", csv);
    return all_pass ? kExitOk : kExitFailed;
  });
}

}  // namespace symce
