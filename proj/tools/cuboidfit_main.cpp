// Copyright 2026 The cuboidfit Authors.
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

// Command-line front end: fit, eval, cluster, synth, export.

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cuboidfit/error.hpp"
#include "cuboidfit/evaluation.hpp"
#include "cuboidfit/io.hpp"
#include "cuboidfit/optimizer.hpp"
#include "cuboidfit/synth.hpp"

namespace fs = std::filesystem;
using namespace cuboidfit;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct FitOptions {
  std::string input;
  std::optional<std::string> format;
  bool no_normalize = false;
  std::string variant = "p2c-seg";
  std::string projection = "normal";
  std::optional<std::size_t> batch_points;
  std::string out;
  std::string export_obj;
  int jobs = 1;
  FitConfig config;
};

struct EvalOptions {
  std::string result;
  std::string input;
  std::optional<std::string> format;
  std::size_t samples = 4096;
  std::optional<std::uint64_t> seed;
  double transfer_fraction = 1.0;
  std::vector<std::string> relabel;
};

struct SynthOptions {
  std::string kind = "table";
  std::size_t points = 2048;
  std::uint64_t seed = 0;
  double noise = 0.0;
  std::string out;
  std::string gt;
};

int default_jobs() {
  if (const char* env = std::getenv("CUBOIDFIT_JOBS")) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring invalid CUBOIDFIT_JOBS='" << env << "'\n";
    }
  }
  return 1;
}

LoadedCloud load_cloud(const std::string& path, const std::optional<std::string>& format,
                       bool normalize) {
  LoadOptions options;
  options.normalize = normalize;
  return format ? load_pointcloud(path, parse_cloud_format(*format), options)
                : load_pointcloud(path, options);
}

void fit_one(const std::string& input, const FitOptions& opts, const std::string& out,
             const std::string& obj) {
  const LoadedCloud loaded = load_cloud(input, opts.format, !opts.no_normalize);
  const AbstractionResult result = fit(loaded.cloud, opts.config);

  Provenance prov;
  prov.input = input;
  prov.seed = opts.config.seed;
  prov.normals = loaded.normals_source;
  prov.normalized = loaded.normalized;
  prov.normalization = loaded.normalization;
  const ResultDocument doc = make_document(result, opts.config, prov);

  if (out.empty()) {
    std::cout << serialize_result(doc);
  } else {
    save_result(out, doc);
  }
  if (!obj.empty()) export_obj(obj, doc);
  std::cerr << "fit " << input << ": " << loaded.cloud.size() << " points, "
            << result.active_count << "/" << opts.config.cuboids
            << " active cuboids, final loss " << result.final_loss.total << '\n';
}

int run_fit(FitOptions opts) {
  opts.config.variant = parse_variant(opts.variant);
  opts.config.projection = parse_projection(opts.projection);
  opts.config.batch_points = opts.batch_points;
  opts.config.validate();

  if (!fs::is_directory(opts.input)) {
    fit_one(opts.input, opts, opts.out, opts.export_obj);
    return 0;
  }

  if (opts.out.empty()) throw InvalidConfig("--out must name a directory when --input is one");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(opts.input)) {
    if (!entry.is_regular_file()) continue;
    try {
      format_from_path(entry.path());
      files.push_back(entry.path());
    } catch (const InvalidInput&) {
    }
  }
  std::sort(files.begin(), files.end());
  fs::create_directories(opts.out);
  if (!opts.export_obj.empty()) fs::create_directories(opts.export_obj);

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      const fs::path& f = files[i];
      const std::string stem = f.stem().string();
      const std::string obj =
          opts.export_obj.empty() ? "" : (fs::path(opts.export_obj) / (stem + ".obj")).string();
      try {
        fit_one(f.string(), opts, (fs::path(opts.out) / (stem + ".json")).string(), obj);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int jobs = std::max(1, std::min<int>(opts.jobs, static_cast<int>(files.size())));
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return 0;
}

int run_eval(const EvalOptions& opts) {
  const ResultDocument doc = load_result(opts.result);
  const AbstractionResult result = result_from_document(doc);
  LoadedCloud loaded = load_cloud(opts.input, opts.format, doc.provenance.normalized);
  if (loaded.cloud.size() != result.labels.size()) {
    throw InvalidInput("cloud has " + std::to_string(loaded.cloud.size()) +
                       " points but the result labels " +
                       std::to_string(result.labels.size()));
  }

  std::map<int, int> relabel;
  for (const std::string& rule : opts.relabel) {
    const auto eq = rule.find('=');
    if (eq == std::string::npos) throw InvalidConfig("--relabel expects SRC=DST");
    try {
      relabel[std::stoi(rule.substr(0, eq))] = std::stoi(rule.substr(eq + 1));
    } catch (const std::exception&) {
      throw InvalidConfig("--relabel expects integer labels, got '" + rule + "'");
    }
  }

  Rng rng(opts.seed.value_or(doc.provenance.seed));
  MetricsReport report;
  report.chamfer = eval_chamfer(result, loaded.cloud, opts.samples, rng);
  report.normal_consistency = normal_consistency(result, loaded.cloud, opts.samples, rng);
  const std::vector<std::vector<std::uint8_t>> flags{result.exists};
  report.n_ac = active_cuboid_stats(flags);

  if (loaded.cloud.labels) {
    std::vector<int> gt = *loaded.cloud.labels;
    for (int& l : gt) {
      if (const auto it = relabel.find(l); it != relabel.end()) l = it->second;
    }
    const std::vector<ShapeSegmentation> shapes{{result.labels, gt}};
    const LabelMap map = transfer_labels(shapes, static_cast<int>(result.cuboids.size()),
                                         opts.transfer_fraction, rng);
    const MiouResult m = miou(shapes, map);
    report.per_label = m.per_label;
    report.miou = m.miou;
  }
  std::cout << metrics_to_json(report);
  return 0;
}

int run_cluster(const std::vector<std::string>& results) {
  std::vector<std::vector<std::uint8_t>> flags;
  for (const std::string& path : results) {
    const ResultDocument doc = load_result(path);
    std::vector<std::uint8_t> f;
    for (const CuboidRecord& c : doc.cuboids) f.push_back(c.exists ? 1 : 0);
    flags.push_back(std::move(f));
  }
  nlohmann::json out = nlohmann::json::array();
  for (const auto& cluster : structural_clusters(flags)) {
    std::string bits;
    for (std::uint8_t b : flags[cluster.front()]) bits += b ? '1' : '0';
    nlohmann::json members = nlohmann::json::array();
    for (std::size_t i : cluster) members.push_back(results[i]);
    out.push_back({{"existence", bits}, {"shapes", std::move(members)}});
  }
  std::cout << nlohmann::json{{"clusters", std::move(out)},
                              {"mean_active", active_cuboid_stats(flags)}}
                   .dump(2)
            << '\n';
  return 0;
}

int run_synth(const SynthOptions& opts) {
  const ShapeKind kind = parse_shape_kind(opts.kind);
  const SynthShape shape = synth_shape(kind, {}, opts.points, opts.noise, opts.seed);
  save_pointcloud(opts.out, shape.cloud);
  fs::path gt = opts.gt;
  if (gt.empty()) gt = fs::path(opts.out).replace_extension(".gt.json");
  std::ofstream sidecar(gt);
  if (!sidecar) throw InvalidInput("cannot write '" + gt.string() + "'");
  sidecar << serialize_parts(to_string(kind), opts.seed, shape.parts);
  std::cerr << "synth " << opts.kind << ": " << opts.points << " points -> " << opts.out
            << " (parts in " << gt.string() << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cuboid abstraction of point clouds"};
  app.require_subcommand(1);

  FitOptions fit_opts;
  fit_opts.jobs = default_jobs();
  auto* fit_cmd = app.add_subcommand("fit", "Fit cuboids to a point cloud (or a directory)");
  fit_cmd->add_option("--input", fit_opts.input, "Point cloud file or directory")->required();
  fit_cmd->add_option("--format", fit_opts.format, "xyz | ply | obj (default: extension)");
  fit_cmd->add_flag("--no-normalize", fit_opts.no_normalize,
                    "Keep input coordinates instead of normalizing them");
  fit_cmd->add_option("--cuboids", fit_opts.config.cuboids, "Cuboid count M")
      ->capture_default_str();
  fit_cmd->add_option("--steps", fit_opts.config.steps)->capture_default_str();
  fit_cmd->add_option("--lr", fit_opts.config.lr, "Adam step for cuboid parameters")
      ->capture_default_str();
  fit_cmd->add_option("--logit-lr", fit_opts.config.logit_lr, "Adam step for assignment logits")
      ->capture_default_str();
  fit_cmd->add_option("--lambda1", fit_opts.config.lambda1, "Compactness weight")
      ->capture_default_str();
  fit_cmd->add_option("--lambda2", fit_opts.config.lambda2, "Existence weight")
      ->capture_default_str();
  fit_cmd->add_option("--sigma-s", fit_opts.config.sigma_s, "Normal sampling std")
      ->capture_default_str();
  fit_cmd->add_option("--eps-sps", fit_opts.config.eps_sps)->capture_default_str();
  fit_cmd->add_option("--eps-ext", fit_opts.config.eps_ext)->capture_default_str();
  fit_cmd->add_option("--variant", fit_opts.variant, "p2c-seg | p2c-dis | chamfer-dis")
      ->capture_default_str();
  fit_cmd->add_option("--projection", fit_opts.projection, "normal | mindist")
      ->capture_default_str();
  fit_cmd->add_option("--seed", fit_opts.config.seed)->capture_default_str();
  fit_cmd->add_option("--batch-points", fit_opts.batch_points, "Points per step");
  fit_cmd->add_option("--out", fit_opts.out, "Result JSON (stdout when omitted)");
  fit_cmd->add_option("--export-obj", fit_opts.export_obj, "Also write an OBJ mesh");
  fit_cmd->add_option("--jobs", fit_opts.jobs, "Parallel shapes for directory input")
      ->capture_default_str();

  EvalOptions eval_opts;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a result against its point cloud");
  eval_cmd->add_option("--result", eval_opts.result)->required();
  eval_cmd->add_option("--input", eval_opts.input)->required();
  eval_cmd->add_option("--format", eval_opts.format);
  eval_cmd->add_option("--samples", eval_opts.samples)->capture_default_str();
  eval_cmd->add_option("--seed", eval_opts.seed, "Sampling seed (default: the fit seed)");
  eval_cmd->add_option("--transfer-fraction", eval_opts.transfer_fraction)
      ->capture_default_str();
  eval_cmd->add_option("--relabel", eval_opts.relabel,
                       "Merge ground-truth label SRC into DST before scoring (SRC=DST)");

  std::vector<std::string> cluster_inputs;
  auto* cluster_cmd = app.add_subcommand("cluster", "Group results by existence vector");
  cluster_cmd->add_option("results", cluster_inputs, "Result JSON files")->required();

  SynthOptions synth_opts;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic cuboid-assembly cloud");
  synth_cmd->add_option("--kind", synth_opts.kind, "cuboid | table | chair | stack")
      ->capture_default_str();
  synth_cmd->add_option("--points", synth_opts.points)->capture_default_str();
  synth_cmd->add_option("--seed", synth_opts.seed)->capture_default_str();
  synth_cmd->add_option("--noise", synth_opts.noise, "Positional noise std")
      ->capture_default_str();
  synth_cmd->add_option("--out", synth_opts.out)->required();
  synth_cmd->add_option("--gt", synth_opts.gt, "Ground-truth parts JSON");

  std::string export_result, export_out;
  auto* export_cmd = app.add_subcommand("export", "Convert a result to an OBJ mesh");
  export_cmd->add_option("--result", export_result)->required();
  export_cmd->add_option("--out", export_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*fit_cmd) return run_fit(fit_opts);
    if (*eval_cmd) return run_eval(eval_opts);
    if (*cluster_cmd) return run_cluster(cluster_inputs);
    if (*synth_cmd) return run_synth(synth_opts);
    if (*export_cmd) {
      export_obj(export_out, load_result(export_result));
      return 0;
    }
  } catch (const InvalidConfig& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
