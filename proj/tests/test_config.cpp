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

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "symce/config.hpp"
#include "symce/errors.hpp"

using namespace symce;
namespace fs = std::filesystem;

namespace {

ExperimentConfig from_text(const std::string& text, const fs::path& base = fs::temp_directory_path()) {
  return config_from_entries(parse_config_entries(text), base);
}

}  // namespace

TEST_CASE("parse_config_entries collects repeated keys in order", "[config]") {
  const auto e = parse_config_entries(
      "# comment\n"
      "loss = ce\n"
      "  loss=sl   # trailing\n"
      "\n"
      "epochs = 3\n");
  CHECK(e.at("loss") == std::vector<std::string>{"ce", "sl"});
  CHECK(e.at("epochs") == std::vector<std::string>{"3"});
  CHECK_THROWS_AS(parse_config_entries("epochs 3\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_entries("= 3\n"), ConfigError);
  try {
    parse_config_entries("a = 1\nbroken\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    CHECK(std::string(err.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("config values override the defaults", "[config]") {
  const auto c = from_text(
      "dataset = blobs\nblob_classes = 4\nloss = ce\nloss = sl\neta = 0.2\neta = 0.4\n"
      "alpha = 0.1\nbeta = 1\nA = -6\nnoise = pairflip\nhidden = 32,16\nepochs = 7\n"
      "batch_size = 64\nlr = 0.05\nlr_milestones = 3,5\nweight_decay = 0\nseed = 11\n"
      "repetitions = 2\ncell_outputs = true\ngce_q = 0.5\n");
  CHECK(c.dataset == DatasetKind::Blobs);
  CHECK(c.blob_classes == 4);
  CHECK(c.losses == std::vector<std::string>{"ce", "sl"});
  CHECK(c.etas == std::vector<double>{0.2, 0.4});
  CHECK(c.As == std::vector<double>{-6.0});
  CHECK(c.noise == NoiseKind::Pairflip);
  CHECK(c.hidden == std::vector<std::size_t>{32, 16});
  CHECK(c.epochs == 7);
  CHECK(c.batch_size == 64);
  CHECK(c.lr_milestones == std::vector<std::size_t>{3, 5});
  CHECK(c.weight_decay == 0.0);
  CHECK(c.seed == 11);
  CHECK(c.repetitions == 2);
  CHECK(c.cell_outputs);
  CHECK(c.params.gce_exponent == 0.5);

  const auto none = from_text("hidden = none\nlr_milestones = none\n");
  CHECK(none.hidden.empty());
  CHECK(none.lr_milestones.empty());
}

TEST_CASE("benchmark defaults", "[config]") {
  const ExperimentConfig c;
  CHECK(c.lr == 0.1);
  CHECK(c.momentum == 0.9);
  CHECK(c.weight_decay == 1e-4);
  CHECK(c.lr_milestones == std::vector<std::size_t>{10, 30});
  CHECK(c.params.lsr_eps == 0.1);
  CHECK(c.losses == std::vector<std::string>{"sl"});
}

TEST_CASE("config errors", "[config]") {
  CHECK_THROWS_AS(from_text("colour = red\n"), ConfigError);
  CHECK_THROWS_AS(from_text("epochs = 3\nepochs = 4\n"), ConfigError);
  CHECK_THROWS_AS(from_text("epochs = many\n"), ConfigError);
  CHECK_THROWS_AS(from_text("epochs = -2\n"), ConfigError);
  CHECK_THROWS_AS(from_text("lr = 0.1x\n"), ConfigError);
  CHECK_THROWS_AS(from_text("loss = focal\n"), ConfigError);
  CHECK_THROWS_AS(from_text("eta = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(from_text("A = 0\n"), ConfigError);
  CHECK_THROWS_AS(from_text("noise = gaussian\n"), ConfigError);
  CHECK_THROWS_AS(from_text("dataset = cifar\n"), ConfigError);
  CHECK_THROWS_AS(from_text("cell_outputs = maybe\n"), ConfigError);
  CHECK_THROWS_AS(from_text("repetitions = 0\n"), ConfigError);
  CHECK_THROWS_AS(from_text("dataset = mnist\nmnist_dir = /nonexistent/symce\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/symce.cfg"), ConfigError);
}

TEST_CASE("load_config resolves paths against the file", "[config]") {
  const fs::path dir = fs::temp_directory_path() / "symce_test_config";
  fs::remove_all(dir);
  fs::create_directories(dir / "mnist");
  {
    std::ofstream(dir / "run.cfg") << "dataset = mnist\nmnist_dir = mnist\nout = results\n";
  }
  const auto c = load_config(dir / "run.cfg");
  CHECK(c.mnist_dir == dir / "mnist");
  CHECK(c.out_dir == dir / "results");
  fs::remove_all(dir);
}

TEST_CASE("enum names", "[config]") {
  CHECK(to_string(DatasetKind::Blobs) == "blobs");
  CHECK(to_string(NoiseKind::Pairflip) == "pairflip");
  CHECK(to_string(NoiseKind::None) == "none");
}
