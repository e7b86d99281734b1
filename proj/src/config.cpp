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

#include "symce/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "symce/data_io.hpp"
#include "symce/errors.hpp"

namespace symce {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  }
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError("config: '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<std::size_t> to_size_list(const std::string& key, const std::string& v) {
  std::vector<std::size_t> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_u64(key, item));
  }
  return out;
}

}  // namespace

ConfigEntries parse_config_entries(const std::string& text) {
  ConfigEntries entries;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("config line " + std::to_string(number) + ": empty key or value");
    }
    entries[key].push_back(value);
  }
  return entries;
}

ExperimentConfig config_from_entries(const ConfigEntries& entries,
                                     const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  using Values = std::vector<std::string>;
  using Handler = std::function<void(const std::string&, const Values&)>;

  auto scalar = [](auto apply) -> Handler {
    return [apply](const std::string& key, const Values& v) {
      if (v.size() != 1) throw ConfigError("config: '" + key + "' may appear only once");
      apply(key, v.front());
    };
  };
  auto grid_of_doubles = [](std::vector<double>& target) -> Handler {
    return [&target](const std::string& key, const Values& v) {
      target.clear();
      for (const auto& s : v) target.push_back(to_double(key, s));
    };
  };
  auto grid_of_sizes = [](std::vector<std::size_t>& target) -> Handler {
    return [&target](const std::string& key, const Values& v) {
      target.clear();
      for (const auto& s : v) {
        for (std::size_t x : to_size_list(key, s)) target.push_back(x);
      }
    };
  };
  auto path_of = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_absolute() ? p : base_dir / p;
  };

  const std::map<std::string, Handler> handlers = {
      {"dataset", scalar([&](auto& k, auto& v) {
         if (v == "mnist") c.dataset = DatasetKind::Mnist;
         else if (v == "blobs") c.dataset = DatasetKind::Blobs;
         else throw ConfigError("config: '" + k + "' must be mnist or blobs");
       })},
      {"mnist_dir", scalar([&](auto&, auto& v) { c.mnist_dir = path_of(v); })},
      {"train_limit", scalar([&](auto& k, auto& v) { c.train_limit = to_u64(k, v); })},
      {"test_limit", scalar([&](auto& k, auto& v) { c.test_limit = to_u64(k, v); })},
      {"blob_classes", scalar([&](auto& k, auto& v) { c.blob_classes = to_u64(k, v); })},
      {"blob_dim", scalar([&](auto& k, auto& v) { c.blob_dim = to_u64(k, v); })},
      {"blob_per_class", scalar([&](auto& k, auto& v) { c.blob_per_class = to_u64(k, v); })},
      {"blob_separation", scalar([&](auto& k, auto& v) { c.blob_separation = to_double(k, v); })},
      {"loss", [&](auto&, const Values& v) { c.losses = v; }},
      {"alpha", grid_of_doubles(c.alphas)},
      {"beta", grid_of_doubles(c.betas)},
      {"A", grid_of_doubles(c.As)},
      {"eta", grid_of_doubles(c.etas)},
      {"noise", scalar([&](auto& k, auto& v) {
         if (v == "none") c.noise = NoiseKind::None;
         else if (v == "symmetric") c.noise = NoiseKind::Symmetric;
         else if (v == "pairflip") c.noise = NoiseKind::Pairflip;
         else throw ConfigError("config: '" + k + "' must be none, symmetric or pairflip");
       })},
      {"gce_q", scalar([&](auto& k, auto& v) { c.params.gce_exponent = to_double(k, v); })},
      {"lsr_eps", scalar([&](auto& k, auto& v) { c.params.lsr_eps = to_double(k, v); })},
      {"bootstrap_soft_weight",
       scalar([&](auto& k, auto& v) { c.params.bootstrap_soft_weight = to_double(k, v); })},
      {"bootstrap_hard_weight",
       scalar([&](auto& k, auto& v) { c.params.bootstrap_hard_weight = to_double(k, v); })},
      {"hidden", scalar([&](auto& k, auto& v) {
         c.hidden = v == "none" ? std::vector<std::size_t>{} : to_size_list(k, v);
       })},
      {"epochs", scalar([&](auto& k, auto& v) { c.epochs = to_u64(k, v); })},
      {"batch_size", scalar([&](auto& k, auto& v) { c.batch_size = to_u64(k, v); })},
      {"lr", scalar([&](auto& k, auto& v) { c.lr = to_double(k, v); })},
      {"lr_milestones", scalar([&](auto& k, auto& v) {
         c.lr_milestones = v == "none" ? std::vector<std::size_t>{} : to_size_list(k, v);
       })},
      {"lr_factor", scalar([&](auto& k, auto& v) { c.lr_factor = to_double(k, v); })},
      {"momentum", scalar([&](auto& k, auto& v) { c.momentum = to_double(k, v); })},
      {"weight_decay", scalar([&](auto& k, auto& v) { c.weight_decay = to_double(k, v); })},
      {"seed", scalar([&](auto& k, auto& v) { c.seed = to_u64(k, v); })},
      {"repetitions", scalar([&](auto& k, auto& v) { c.repetitions = to_u64(k, v); })},
      {"cell_outputs", scalar([&](auto& k, auto& v) { c.cell_outputs = to_bool(k, v); })},
      {"out", scalar([&](auto&, auto& v) { c.out_dir = path_of(v); })},
      {"classes", grid_of_sizes(c.classes)},
      {"theorem_eta", grid_of_doubles(c.theorem_etas)},
      {"theorem_A", grid_of_doubles(c.theorem_As)},
      {"classifiers", scalar([&](auto& k, auto& v) { c.classifiers = to_u64(k, v); })},
      {"samples", scalar([&](auto& k, auto& v) { c.samples = to_u64(k, v); })},
      {"grid_resolution", scalar([&](auto& k, auto& v) { c.grid_resolution = to_u64(k, v); })},
      {"grid_samples", scalar([&](auto& k, auto& v) { c.grid_samples = to_u64(k, v); })},
      {"grid_classes", scalar([&](auto& k, auto& v) { c.grid_classes = to_u64(k, v); })},
      {"check_loss", [&](auto&, const Values& v) { c.check_losses = v; }},
      {"check_classes", grid_of_sizes(c.check_classes)},
      {"trials", scalar([&](auto& k, auto& v) { c.trials = to_u64(k, v); })},
      {"saturate", scalar([&](auto& k, auto& v) { c.saturate = to_bool(k, v); })},
  };

  for (const auto& [key, values] : entries) {
    const auto it = handlers.find(key);
    if (it == handlers.end()) throw ConfigError("config: unknown key '" + key + "'");
    it->second(key, values);
  }

  const std::set<std::string> known(loss_preset_names().begin(), loss_preset_names().end());
  for (const auto* list : {&c.losses, &c.check_losses}) {
    for (const auto& name : *list) {
      if (!known.count(name)) throw ConfigError("config: unknown loss '" + name + "'");
    }
  }
  for (double eta : c.etas) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("config: eta must lie in [0, 1]");
  }
  for (double eta : c.theorem_etas) {
    if (!(eta >= 0.0 && eta <= 1.0)) throw ConfigError("config: theorem_eta must lie in [0, 1]");
  }
  for (const auto* list : {&c.As, &c.theorem_As}) {
    for (double a : *list) {
      if (!(a < 0.0)) throw ConfigError("config: A must be negative");
    }
  }
  if (c.repetitions == 0) throw ConfigError("config: repetitions must be at least 1");
  const bool mentions_mnist = entries.count("dataset") || entries.count("mnist_dir");
  if (c.dataset == DatasetKind::Mnist && mentions_mnist) {
    const auto dir = c.mnist_dir.empty() ? default_data_dir() / "mnist" : c.mnist_dir;
    if (!std::filesystem::is_directory(dir)) {
      throw ConfigError("config: MNIST directory " + dir.string() +
                        " does not exist (run tools/fetch_mnist.sh or set mnist_dir)");
    }
    c.mnist_dir = dir;
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("config: cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_entries(parse_config_entries(buf.str()), path.parent_path());
}

std::string to_string(DatasetKind kind) {
  return kind == DatasetKind::Mnist ? "mnist" : "blobs";
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::None: return "none";
    case NoiseKind::Symmetric: return "symmetric";
    case NoiseKind::Pairflip: return "pairflip";
  }
  return "?";
}

}  // namespace symce
