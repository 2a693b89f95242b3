// Copyright 2026 The NES Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <yaml-cpp/yaml.h>

#include "nes/error.h"
#include "nes/harness/experiment.h"

namespace nes {
namespace {

template <typename Enum>
struct Names {
  std::vector<std::pair<Enum, std::string_view>> table;
  std::string_view what;

  std::string name(Enum value) const {
    for (const auto& [v, n] : table) {
      if (v == value) return std::string(n);
    }
    return "?";
  }
  Enum parse(std::string_view text) const {
    for (const auto& [v, n] : table) {
      if (n == text) return v;
    }
    std::string known;
    for (const auto& entry : table) {
      known += (known.empty() ? "" : ", ") + std::string(entry.second);
    }
    throw ConfigError("unknown " + std::string(what) + " '" +
                      std::string(text) + "' (expected one of: " + known + ")");
  }
};

const Names<Method> kMethods{{{Method::kNesRs, "nes-rs"},
                              {Method::kNesRe, "nes-re"},
                              {Method::kDeepEnsFixed, "deepens-fixed"},
                              {Method::kDeepEnsRs, "deepens-rs"},
                              {Method::kDeepEnsBest, "deepens-best"},
                              {Method::kDeepEnsPlusEs, "deepens+es"},
                              {Method::kAnchored, "anchored"}},
                             "method"};

const Names<SelectionAlgorithm> kAlgorithms{
    {{SelectionAlgorithm::kForward, "forward"},
     {SelectionAlgorithm::kForwardWithReplacement, "forward-replacement"},
     {SelectionAlgorithm::kDiverse, "diverse"},
     {SelectionAlgorithm::kQuickAndGreedy, "quick-greedy"},
     {SelectionAlgorithm::kTopM, "top-m"},
     {SelectionAlgorithm::kStacking, "stacking"}},
    "selection algorithm"};

const Names<BenchmarkKind> kKinds{{{BenchmarkKind::kSynthetic, "synthetic"},
                                   {BenchmarkKind::kStore, "store"},
                                   {BenchmarkKind::kToy, "toy"}},
                                  "benchmark kind"};

const Names<SeverityMix> kMixes{{{SeverityMix::kClean, "clean"},
                                 {SeverityMix::kShifted, "shifted"},
                                 {SeverityMix::kAlternating, "alternating"}},
                                "severity mix"};

const Names<AveragingMode> kAveraging{
    {{AveragingMode::kProbability, "probability"},
     {AveragingMode::kLogit, "logit"}},
    "averaging mode"};

const Names<ExecutionMode> kModes{
    {{ExecutionMode::kSynchronous, "synchronous"},
     {ExecutionMode::kAsynchronous, "asynchronous"}},
    "execution mode"};

// Rejects keys outside `allowed`, which catches misspelled options.
void check_keys(const YAML::Node& node, std::string_view where,
                std::initializer_list<std::string_view> allowed) {
  if (!node.IsMap()) throw ConfigError(std::string(where) + " must be a map");
  for (const auto& item : node) {
    const auto key = item.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (!node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(std::string("bad value for '") + key + "'");
  }
}

// Accepts a scalar or a sequence.
template <typename T>
void read_list(const YAML::Node& node, const char* key, std::vector<T>& out) {
  if (!node[key]) return;
  try {
    if (node[key].IsSequence()) {
      out = node[key].as<std::vector<T>>();
    } else {
      out = {node[key].as<T>()};
    }
  } catch (const YAML::Exception&) {
    throw ConfigError(std::string("bad value for '") + key + "'");
  }
}

template <typename Enum>
void read_enum(const YAML::Node& node, const char* key, const Names<Enum>& names,
               Enum& out) {
  std::string text;
  read(node, key, text);
  if (!text.empty()) out = names.parse(text);
}

void read_synthetic(const YAML::Node& node, SyntheticBenchmarkConfig& c) {
  check_keys(node, "benchmark",
             {"kind", "gen_seed", "num_families", "cell_nodes", "num_ops",
              "seeds_per_arch", "num_points", "num_classes", "separation",
              "sigma_w", "sigma_s", "signal", "family_quality", "edge_quality",
              "shift_margin", "shift_noise"});
  read(node, "gen_seed", c.gen_seed);
  read(node, "num_families", c.num_families);
  read(node, "cell_nodes", c.cell_nodes);
  read(node, "num_ops", c.num_ops);
  read(node, "seeds_per_arch", c.seeds_per_arch);
  read(node, "num_points", c.num_points);
  read(node, "num_classes", c.num_classes);
  read(node, "separation", c.separation);
  read(node, "sigma_w", c.sigma_w);
  read(node, "sigma_s", c.sigma_s);
  read(node, "signal", c.signal);
  read(node, "family_quality", c.family_quality);
  read(node, "edge_quality", c.edge_quality);
  read(node, "shift_margin", c.shift_margin);
  read(node, "shift_noise", c.shift_noise);
}

void read_toy(const YAML::Node& node, BenchmarkConfig& b) {
  check_keys(node, "benchmark",
             {"kind", "space", "task", "hidden_width", "macro_depth", "train",
              "persist"});
  read(node, "space", b.toy_space);
  read(node, "hidden_width", b.toy.hidden_width);
  read(node, "macro_depth", b.toy.macro_depth);
  read(node, "persist", b.persist);
  if (const auto task = node["task"]) {
    check_keys(task, "benchmark.task",
               {"task_seed", "num_train", "num_val", "num_test", "num_classes",
                "input_dim", "clusters_per_class", "separation", "overlap"});
    ToyTaskConfig& t = b.toy.task;
    read(task, "task_seed", t.task_seed);
    read(task, "num_train", t.num_train);
    read(task, "num_val", t.num_val);
    read(task, "num_test", t.num_test);
    read(task, "num_classes", t.num_classes);
    read(task, "input_dim", t.input_dim);
    read(task, "clusters_per_class", t.clusters_per_class);
    read(task, "separation", t.separation);
    read(task, "overlap", t.overlap);
  }
  if (const auto train = node["train"]) {
    check_keys(train, "benchmark.train",
               {"epochs", "batch_size", "learning_rate", "momentum", "l2"});
    TrainConfig& t = b.toy.train;
    read(train, "epochs", t.epochs);
    read(train, "batch_size", t.batch_size);
    read(train, "learning_rate", t.learning_rate);
    read(train, "momentum", t.momentum);
    read(train, "l2", t.l2);
  }
}

bool is_pool_method(Method method) {
  return method == Method::kNesRs || method == Method::kNesRe ||
         method == Method::kDeepEnsPlusEs;
}

}  // namespace

std::string to_string(Method method) { return kMethods.name(method); }
Method parse_method(std::string_view text) { return kMethods.parse(text); }
std::string to_string(SelectionAlgorithm algorithm) {
  return kAlgorithms.name(algorithm);
}

ExperimentConfig ExperimentConfig::from_yaml(const YAML::Node& root) {
  check_keys(root, "experiment config",
             {"method", "output_dir", "seeds", "budget", "severities",
              "selection", "severity_mix", "architecture", "anchored_lambda",
              "workers", "mode", "benchmark"});
  ExperimentConfig c;
  if (!root["method"]) throw ConfigError("experiment config needs a method");
  read_enum(root, "method", kMethods, c.method);
  std::string output_dir = c.output_dir.string();
  read(root, "output_dir", output_dir);
  c.output_dir = output_dir;
  read_list(root, "seeds", c.seeds);
  read_list(root, "severities", c.severities);
  if (const auto budget = root["budget"]) {
    check_keys(budget, "budget", {"K", "M", "P", "m", "K_grid"});
    read(budget, "K", c.K);
    read_list(budget, "M", c.M);
    read(budget, "P", c.P);
    read(budget, "m", c.m);
    read_list(budget, "K_grid", c.K_grid);
  }
  if (const auto selection = root["selection"]) {
    check_keys(selection, "selection", {"algorithm", "lambda", "averaging"});
    read_enum(selection, "algorithm", kAlgorithms, c.selection);
    read(selection, "lambda", c.diversity_lambda);
    read_enum(selection, "averaging", kAveraging, c.averaging);
  }
  read_enum(root, "severity_mix", kMixes, c.severity_mix);
  read(root, "architecture", c.architecture);
  read(root, "anchored_lambda", c.anchored_lambda);
  read(root, "workers", c.workers);
  read_enum(root, "mode", kModes, c.mode);
  if (const auto bench = root["benchmark"]) {
    if (!bench.IsMap()) throw ConfigError("benchmark must be a map");
    read_enum(bench, "kind", kKinds, c.benchmark.kind);
    switch (c.benchmark.kind) {
      case BenchmarkKind::kSynthetic:
        read_synthetic(bench, c.benchmark.synthetic);
        break;
      case BenchmarkKind::kStore: {
        check_keys(bench, "benchmark", {"kind", "path"});
        std::string path;
        read(bench, "path", path);
        if (path.empty()) throw ConfigError("store benchmark needs a path");
        c.benchmark.store_path = path;
        break;
      }
      case BenchmarkKind::kToy:
        read_toy(bench, c.benchmark);
        break;
    }
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw ConfigError("cannot read config " + path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("malformed YAML in " + path.string() + ": " + e.what());
  }
  return from_yaml(root);
}

std::string ExperimentConfig::to_yaml() const {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "method" << YAML::Value << to_string(method);
  out << YAML::Key << "output_dir" << YAML::Value << output_dir.string();
  out << YAML::Key << "seeds" << YAML::Value << YAML::Flow << seeds;
  out << YAML::Key << "budget" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "K" << YAML::Value << K;
  out << YAML::Key << "M" << YAML::Value << YAML::Flow << M;
  out << YAML::Key << "P" << YAML::Value << P;
  out << YAML::Key << "m" << YAML::Value << m;
  if (!K_grid.empty()) {
    out << YAML::Key << "K_grid" << YAML::Value << YAML::Flow << K_grid;
  }
  out << YAML::EndMap;
  out << YAML::Key << "severities" << YAML::Value << YAML::Flow << severities;
  out << YAML::Key << "selection" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "algorithm" << YAML::Value << to_string(selection);
  out << YAML::Key << "lambda" << YAML::Value << diversity_lambda;
  out << YAML::Key << "averaging" << YAML::Value << kAveraging.name(averaging);
  out << YAML::EndMap;
  out << YAML::Key << "severity_mix" << YAML::Value << kMixes.name(severity_mix);
  if (!architecture.empty()) {
    out << YAML::Key << "architecture" << YAML::Value << architecture;
  }
  out << YAML::Key << "anchored_lambda" << YAML::Value << anchored_lambda;
  out << YAML::Key << "workers" << YAML::Value << workers;
  out << YAML::Key << "mode" << YAML::Value << kModes.name(mode);

  out << YAML::Key << "benchmark" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << kKinds.name(benchmark.kind);
  switch (benchmark.kind) {
    case BenchmarkKind::kSynthetic: {
      const auto& s = benchmark.synthetic;
      out << YAML::Key << "gen_seed" << YAML::Value << s.gen_seed;
      out << YAML::Key << "num_families" << YAML::Value << s.num_families;
      out << YAML::Key << "cell_nodes" << YAML::Value << s.cell_nodes;
      out << YAML::Key << "num_ops" << YAML::Value << s.num_ops;
      out << YAML::Key << "seeds_per_arch" << YAML::Value << s.seeds_per_arch;
      out << YAML::Key << "num_points" << YAML::Value << s.num_points;
      out << YAML::Key << "num_classes" << YAML::Value << s.num_classes;
      out << YAML::Key << "separation" << YAML::Value << s.separation;
      out << YAML::Key << "sigma_w" << YAML::Value << s.sigma_w;
      out << YAML::Key << "sigma_s" << YAML::Value << s.sigma_s;
      out << YAML::Key << "signal" << YAML::Value << s.signal;
      out << YAML::Key << "family_quality" << YAML::Value << s.family_quality;
      out << YAML::Key << "edge_quality" << YAML::Value << s.edge_quality;
      out << YAML::Key << "shift_margin" << YAML::Value << s.shift_margin;
      out << YAML::Key << "shift_noise" << YAML::Value << s.shift_noise;
      break;
    }
    case BenchmarkKind::kStore:
      out << YAML::Key << "path" << YAML::Value << benchmark.store_path.string();
      break;
    case BenchmarkKind::kToy: {
      const auto& t = benchmark.toy;
      out << YAML::Key << "space" << YAML::Value << benchmark.toy_space;
      out << YAML::Key << "hidden_width" << YAML::Value << t.hidden_width;
      out << YAML::Key << "macro_depth" << YAML::Value << t.macro_depth;
      out << YAML::Key << "persist" << YAML::Value << benchmark.persist;
      out << YAML::Key << "task" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "task_seed" << YAML::Value << t.task.task_seed;
      out << YAML::Key << "num_train" << YAML::Value << t.task.num_train;
      out << YAML::Key << "num_val" << YAML::Value << t.task.num_val;
      out << YAML::Key << "num_test" << YAML::Value << t.task.num_test;
      out << YAML::Key << "num_classes" << YAML::Value << t.task.num_classes;
      out << YAML::Key << "input_dim" << YAML::Value << t.task.input_dim;
      out << YAML::Key << "clusters_per_class" << YAML::Value
          << t.task.clusters_per_class;
      out << YAML::Key << "separation" << YAML::Value << t.task.separation;
      out << YAML::Key << "overlap" << YAML::Value << t.task.overlap;
      out << YAML::EndMap;
      out << YAML::Key << "train" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "epochs" << YAML::Value << t.train.epochs;
      out << YAML::Key << "batch_size" << YAML::Value << t.train.batch_size;
      out << YAML::Key << "learning_rate" << YAML::Value << t.train.learning_rate;
      out << YAML::Key << "momentum" << YAML::Value << t.train.momentum;
      out << YAML::Key << "l2" << YAML::Value << t.train.l2;
      out << YAML::EndMap;
      break;
    }
  }
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::size_t ExperimentConfig::max_M() const {
  return M.empty() ? 0 : *std::max_element(M.begin(), M.end());
}

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (std::set(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("seeds must be distinct");
  }
  if (M.empty()) throw ConfigError("at least one ensemble size M is required");
  for (std::size_t size : M) {
    if (size == 0) throw ConfigError("ensemble size M must be >= 1");
  }
  if (K == 0) throw ConfigError("budget K must be >= 1");
  if (severities.empty()) throw ConfigError("at least one severity is required");
  for (int s : severities) {
    if (s < 0 || s > kMaxSeverity) {
      throw ConfigError("severity " + std::to_string(s) + " outside 0..5");
    }
  }
  if (std::set(severities.begin(), severities.end()).size() != severities.size()) {
    throw ConfigError("severities must be distinct");
  }
  if (workers == 0) throw ConfigError("workers must be >= 1");
  if (diversity_lambda < 0.0) throw ConfigError("diversity lambda must be >= 0");

  const bool searches = method == Method::kNesRs || method == Method::kNesRe ||
                        method == Method::kDeepEnsRs;
  if (searches || method == Method::kDeepEnsPlusEs) {
    if (K < max_M()) throw ConfigError("budget K must be >= every M");
  }
  if (method == Method::kNesRe) {
    SearchBudget{K, max_M(), P, m, 0}.validate();
  }
  if (!K_grid.empty()) {
    if (!is_pool_method(method)) {
      throw ConfigError("K_grid applies to nes-rs, nes-re and deepens+es only");
    }
    if (mode == ExecutionMode::kAsynchronous) {
      throw ConfigError("K_grid needs synchronous execution");
    }
    for (std::size_t k : K_grid) {
      if (k < max_M() || k > K) {
        throw ConfigError("K_grid entries must lie in [max M, K]");
      }
      if (method == Method::kNesRe && k < P) {
        throw ConfigError("nes-re K_grid entries must be >= P");
      }
    }
  }
  const bool needs_arch = method == Method::kDeepEnsFixed ||
                          method == Method::kDeepEnsPlusEs ||
                          method == Method::kAnchored;
  if (needs_arch && architecture.empty()) {
    throw ConfigError(to_string(method) + " needs an architecture");
  }
  if (method == Method::kAnchored) {
    if (benchmark.kind != BenchmarkKind::kToy) {
      throw ConfigError("anchored ensembles need the toy benchmark");
    }
    if (anchored_lambda < 0.0) throw ConfigError("anchored lambda must be >= 0");
  }
  if (method == Method::kDeepEnsBest && benchmark.kind == BenchmarkKind::kToy) {
    throw ConfigError("deepens-best needs a tabular benchmark");
  }
  if (benchmark.persist && benchmark.kind != BenchmarkKind::kToy) {
    throw ConfigError("persist applies to the toy benchmark only");
  }
  switch (benchmark.kind) {
    case BenchmarkKind::kSynthetic:
      benchmark.synthetic.validate();
      break;
    case BenchmarkKind::kStore:
      if (benchmark.store_path.empty()) {
        throw ConfigError("store benchmark needs a path");
      }
      break;
    case BenchmarkKind::kToy:
      benchmark.toy.task.validate();
      benchmark.toy.train.validate();
      if (benchmark.toy.hidden_width == 0 || benchmark.toy.macro_depth == 0) {
        throw ConfigError("toy network width and depth must be >= 1");
      }
      try {
        SearchSpace::parse(benchmark.toy_space);
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad toy space: ") + e.what());
      }
      break;
  }
}

}  // namespace nes
