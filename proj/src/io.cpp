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

#include "cuboidfit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "cuboidfit/error.hpp"

namespace cuboidfit {

using json = nlohmann::json;

CloudFormat format_from_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".xyz" || ext == ".txt" || ext == ".pts") return CloudFormat::Xyz;
  if (ext == ".ply") return CloudFormat::PlyAscii;
  if (ext == ".obj") return CloudFormat::Obj;
  throw InvalidInput("cannot infer point cloud format from '" + path.string() + "'");
}

CloudFormat parse_cloud_format(std::string_view name) {
  if (name == "xyz") return CloudFormat::Xyz;
  if (name == "ply" || name == "ply-ascii") return CloudFormat::PlyAscii;
  if (name == "obj" || name == "obj-vertices") return CloudFormat::Obj;
  throw InvalidConfig("unknown point cloud format '" + std::string(name) + "'");
}

std::string_view to_string(NormalsSource source) {
  return source == NormalsSource::File ? "file" : "estimated";
}

Cuboid Normalization::apply(const Cuboid& c) const {
  Cuboid out = c;
  out.t = apply(c.t);
  out.s_log = c.s_log.array() + std::log(scale);
  return out;
}

Normalization normalize(PointCloud& pc) {
  Normalization norm;
  if (pc.points.empty()) return norm;
  for (const Vec3& p : pc.points) norm.center += p;
  norm.center /= static_cast<double>(pc.points.size());
  for (Vec3& p : pc.points) p -= norm.center;
  const double diag = bbox_diagonal(pc.points);
  norm.scale = diag > 0 ? kNormalizedDiagonal / diag : 1.0;
  for (Vec3& p : pc.points) p *= norm.scale;
  return norm;
}

namespace {

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
  throw InvalidInput("line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double to_double(std::string_view token, std::size_t line) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    fail_at(line, "invalid number '" + std::string(token) + "'");
  }
  return value;
}

int to_int(std::string_view token, std::size_t line) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    // Accept integral values written as reals, e.g. "3.0".
    const double d = to_double(token, line);
    if (d != std::floor(d)) fail_at(line, "invalid label '" + std::string(token) + "'");
    return static_cast<int>(d);
  }
  return value;
}

RawCloud parse_xyz(std::istream& in) {
  RawCloud cloud;
  std::string line;
  std::size_t number = 0;
  std::size_t columns = 0;
  std::vector<Vec3> normals;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++number;
    const auto tokens = split(line);
    if (tokens.empty() || tokens[0].front() == '#') continue;
    if (columns == 0) {
      columns = tokens.size();
      if (columns != 3 && columns != 4 && columns != 6 && columns != 7) {
        fail_at(number, "expected 3, 4, 6 or 7 columns, got " + std::to_string(columns));
      }
    } else if (tokens.size() != columns) {
      fail_at(number, "expected " + std::to_string(columns) + " columns, got " +
                          std::to_string(tokens.size()));
    }
    cloud.points.emplace_back(to_double(tokens[0], number), to_double(tokens[1], number),
                              to_double(tokens[2], number));
    if (columns >= 6) {
      normals.emplace_back(to_double(tokens[3], number), to_double(tokens[4], number),
                           to_double(tokens[5], number));
    }
    if (columns == 4 || columns == 7) labels.push_back(to_int(tokens.back(), number));
  }
  if (columns >= 6) cloud.normals = std::move(normals);
  if (columns == 4 || columns == 7) cloud.labels = std::move(labels);
  return cloud;
}

RawCloud parse_ply(std::istream& in) {
  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> properties;
  };
  std::string line;
  std::size_t number = 0;
  auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next() || line != "ply") fail_at(number, "missing 'ply' magic");
  std::vector<Element> elements;
  bool ascii = false;
  bool header_done = false;
  while (next()) {
    const auto tokens = split(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "format") {
      if (tokens.size() < 2) fail_at(number, "malformed format line");
      if (tokens[1] != "ascii") fail_at(number, "only ascii PLY is supported");
      ascii = true;
    } else if (tokens[0] == "element") {
      if (tokens.size() != 3) fail_at(number, "malformed element line");
      Element e;
      e.name = std::string(tokens[1]);
      e.count = static_cast<std::size_t>(to_int(tokens[2], number));
      elements.push_back(std::move(e));
    } else if (tokens[0] == "property") {
      if (elements.empty()) fail_at(number, "property before any element");
      if (tokens.size() < 3) fail_at(number, "malformed property line");
      // List properties only occur in face-like elements, which are skipped.
      elements.back().properties.emplace_back(tokens.back());
    } else if (tokens[0] == "end_header") {
      header_done = true;
      break;
    } else if (tokens[0] != "comment" && tokens[0] != "obj_info") {
      fail_at(number, "unexpected header line");
    }
  }
  if (!header_done) fail_at(number, "missing end_header");
  if (!ascii) fail_at(number, "missing format line");

  RawCloud cloud;
  for (const Element& e : elements) {
    if (e.name != "vertex") {
      for (std::size_t i = 0; i < e.count; ++i) {
        if (!next()) fail_at(number, "unexpected end of file in element " + e.name);
      }
      continue;
    }
    auto column = [&](const char* name) -> int {
      const auto it = std::find(e.properties.begin(), e.properties.end(), name);
      return it == e.properties.end() ? -1 : static_cast<int>(it - e.properties.begin());
    };
    const int ix = column("x"), iy = column("y"), iz = column("z");
    const int inx = column("nx"), iny = column("ny"), inz = column("nz");
    const int il = column("label");
    if (ix < 0 || iy < 0 || iz < 0) fail_at(number, "vertex element lacks x, y or z");
    const bool has_normals = inx >= 0 && iny >= 0 && inz >= 0;
    std::vector<Vec3> normals;
    std::vector<int> labels;
    for (std::size_t i = 0; i < e.count; ++i) {
      if (!next()) fail_at(number, "unexpected end of file in vertex data");
      const auto tokens = split(line);
      if (tokens.size() != e.properties.size()) {
        fail_at(number, "expected " + std::to_string(e.properties.size()) +
                            " vertex properties, got " + std::to_string(tokens.size()));
      }
      cloud.points.emplace_back(to_double(tokens[ix], number), to_double(tokens[iy], number),
                                to_double(tokens[iz], number));
      if (has_normals) {
        normals.emplace_back(to_double(tokens[inx], number),
                             to_double(tokens[iny], number),
                             to_double(tokens[inz], number));
      }
      if (il >= 0) labels.push_back(to_int(tokens[il], number));
    }
    if (has_normals) cloud.normals = std::move(normals);
    if (il >= 0) cloud.labels = std::move(labels);
  }
  return cloud;
}

RawCloud parse_obj(std::istream& in) {
  RawCloud cloud;
  std::vector<Vec3> normals;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto tokens = split(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "v" || tokens[0] == "vn") {
      if (tokens.size() < 4) fail_at(number, "expected three coordinates");
      const Vec3 v(to_double(tokens[1], number), to_double(tokens[2], number),
                   to_double(tokens[3], number));
      (tokens[0] == "v" ? cloud.points : normals).push_back(v);
    }
  }
  if (!normals.empty() && normals.size() == cloud.points.size()) {
    cloud.normals = std::move(normals);
  }
  return cloud;
}

}  // namespace

RawCloud parse_pointcloud(std::istream& in, CloudFormat format) {
  switch (format) {
    case CloudFormat::Xyz: return parse_xyz(in);
    case CloudFormat::PlyAscii: return parse_ply(in);
    case CloudFormat::Obj: return parse_obj(in);
  }
  throw InvalidConfig("unknown point cloud format");
}

LoadedCloud load_pointcloud(const std::filesystem::path& path, CloudFormat format,
                            const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  RawCloud raw = parse_pointcloud(in, format);
  if (raw.points.empty()) throw InvalidInput("'" + path.string() + "' has no points");

  LoadedCloud out;
  out.cloud.points = std::move(raw.points);
  out.cloud.labels = std::move(raw.labels);
  if (options.normalize) {
    out.normalization = normalize(out.cloud);
    out.normalized = true;
  }
  if (raw.normals) {
    out.normals_source = NormalsSource::File;
    out.cloud.normals = std::move(*raw.normals);
    for (std::size_t i = 0; i < out.cloud.normals.size(); ++i) {
      const double n = out.cloud.normals[i].norm();
      if (!(n > 0)) throw InvalidInput("zero normal at point " + std::to_string(i));
      out.cloud.normals[i] /= n;
    }
  } else {
    if (out.cloud.size() < 4) {
      throw InvalidInput("at least 4 points are needed to estimate normals");
    }
    out.normals_source = NormalsSource::Estimated;
    const std::size_t k = std::min(options.normal_neighbors, out.cloud.size() - 1);
    out.cloud.normals = estimate_normals(out.cloud.points, std::max<std::size_t>(k, 3));
  }
  return out;
}

LoadedCloud load_pointcloud(const std::filesystem::path& path,
                            const LoadOptions& options) {
  return load_pointcloud(path, format_from_path(path), options);
}

void save_xyz(const std::filesystem::path& path, const PointCloud& pc) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const Vec3& p = pc.points[i];
    const Vec3& n = pc.normals[i];
    out << p.x() << ' ' << p.y() << ' ' << p.z() << ' ' << n.x() << ' ' << n.y() << ' '
        << n.z();
    if (pc.labels) out << ' ' << (*pc.labels)[i];
    out << '\n';
  }
}

void save_ply(const std::filesystem::path& path, const PointCloud& pc) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  out << "ply\nformat ascii 1.0\nelement vertex " << pc.size() << '\n';
  for (const char* name : {"x", "y", "z", "nx", "ny", "nz"}) {
    out << "property double " << name << '\n';
  }
  if (pc.labels) out << "property int label\n";
  out << "end_header\n" << std::setprecision(17);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const Vec3& p = pc.points[i];
    const Vec3& n = pc.normals[i];
    out << p.x() << ' ' << p.y() << ' ' << p.z() << ' ' << n.x() << ' ' << n.y() << ' '
        << n.z();
    if (pc.labels) out << ' ' << (*pc.labels)[i];
    out << '\n';
  }
}

void save_pointcloud(const std::filesystem::path& path, const PointCloud& pc) {
  switch (format_from_path(path)) {
    case CloudFormat::PlyAscii:
      save_ply(path, pc);
      return;
    case CloudFormat::Xyz:
      save_xyz(path, pc);
      return;
    case CloudFormat::Obj:
      throw InvalidConfig("OBJ output carries no normals; use .xyz or .ply");
  }
}

ResultDocument make_document(const AbstractionResult& result,
                             const FitConfig& config,
                             const Provenance& provenance) {
  ResultDocument doc;
  doc.config = config;
  for (std::size_t m = 0; m < result.cuboids.size(); ++m) {
    const Cuboid& c = result.cuboids[m];
    const Vec3 h = c.half_extents();
    CuboidRecord rec;
    rec.t = {c.t.x(), c.t.y(), c.t.z()};
    rec.r = {c.r.w, c.r.x, c.r.y, c.r.z};
    rec.s = {h.x(), h.y(), h.z()};
    rec.delta = c.existence();
    rec.exists = result.exists[m] != 0;
    rec.coverage = result.coverage[static_cast<Eigen::Index>(m)];
    doc.cuboids.push_back(rec);
  }
  doc.labels = result.labels;
  doc.final_loss = result.final_loss;
  doc.active_count = result.active_count;
  doc.trace = result.trace;
  doc.provenance = provenance;
  return doc;
}

AbstractionResult result_from_document(const ResultDocument& doc) {
  AbstractionResult result;
  const auto m_count = static_cast<Eigen::Index>(doc.cuboids.size());
  result.coverage = CoverageVector(m_count);
  for (std::size_t m = 0; m < doc.cuboids.size(); ++m) {
    const CuboidRecord& rec = doc.cuboids[m];
    // Clamp delta away from {0, 1} so the logit stays finite.
    const double delta = std::clamp(rec.delta, 1e-300, 1.0 - 1e-16);
    result.cuboids.push_back(Cuboid::from_half_extents(
        Vec3(rec.t[0], rec.t[1], rec.t[2]), Quaternion{rec.r[0], rec.r[1], rec.r[2], rec.r[3]},
        Vec3(rec.s[0], rec.s[1], rec.s[2]), std::log(delta / (1.0 - delta))));
    result.exists.push_back(rec.exists ? 1 : 0);
    result.coverage[static_cast<Eigen::Index>(m)] = rec.coverage;
  }
  result.labels = doc.labels;
  for (int label : doc.labels) {
    if (label < 0 || label >= m_count) throw InvalidInput("label out of range in result");
  }
  result.assignment = one_hot(doc.labels, m_count);
  result.active_count = doc.active_count;
  result.trace = doc.trace;
  result.final_loss = doc.final_loss;
  return result;
}

namespace {

json loss_to_json(const LossBreakdown& l) {
  return {{"recons", l.recons}, {"compact", l.compact}, {"exist", l.exist}, {"total", l.total}};
}

json config_to_json(const FitConfig& c) {
  json j;
  j["cuboids"] = c.cuboids;
  j["steps"] = c.steps;
  j["lr"] = c.lr;
  j["logit_lr"] = c.logit_lr;
  j["adam_beta1"] = c.adam_beta1;
  j["adam_beta2"] = c.adam_beta2;
  j["adam_eps"] = c.adam_eps;
  j["lambda1"] = c.lambda1;
  j["lambda2"] = c.lambda2;
  j["sigma_s"] = c.sigma_s;
  j["eps_sps"] = c.eps_sps;
  j["eps_ext"] = c.eps_ext;
  j["variant"] = std::string(to_string(c.variant));
  j["projection"] = std::string(to_string(c.projection));
  j["seed"] = c.seed;
  j["batch_points"] = c.batch_points ? json(*c.batch_points) : json(nullptr);
  return j;
}

/// Field lookup that reports the full path of a missing field.
const json& field(const json& j, const std::string& path, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw InvalidInput("missing field '" + path + key + "'");
  }
  return j.at(key);
}

template <typename T>
T get(const json& j, const std::string& path, const char* key) {
  const json& v = field(j, path, key);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw InvalidInput("invalid value for field '" + path + key + "'");
  }
}

LossBreakdown loss_from_json(const json& j, const std::string& path) {
  return {get<double>(j, path, "recons"), get<double>(j, path, "compact"),
          get<double>(j, path, "exist"), get<double>(j, path, "total")};
}

FitConfig config_from_json(const json& j) {
  const std::string p = "config.";
  FitConfig c;
  c.cuboids = get<int>(j, p, "cuboids");
  c.steps = get<int>(j, p, "steps");
  c.lr = get<double>(j, p, "lr");
  c.logit_lr = get<double>(j, p, "logit_lr");
  c.adam_beta1 = get<double>(j, p, "adam_beta1");
  c.adam_beta2 = get<double>(j, p, "adam_beta2");
  c.adam_eps = get<double>(j, p, "adam_eps");
  c.lambda1 = get<double>(j, p, "lambda1");
  c.lambda2 = get<double>(j, p, "lambda2");
  c.sigma_s = get<double>(j, p, "sigma_s");
  c.eps_sps = get<double>(j, p, "eps_sps");
  c.eps_ext = get<double>(j, p, "eps_ext");
  try {
    c.variant = parse_variant(get<std::string>(j, p, "variant"));
    c.projection = parse_projection(get<std::string>(j, p, "projection"));
  } catch (const InvalidConfig& e) {
    throw InvalidInput(e.what());
  }
  c.seed = get<std::uint64_t>(j, p, "seed");
  const json& batch = field(j, p, "batch_points");
  if (!batch.is_null()) c.batch_points = get<std::size_t>(j, p, "batch_points");
  return c;
}

}  // namespace

std::string serialize_result(const ResultDocument& doc) {
  json j;
  j["version"] = doc.version;
  j["config"] = config_to_json(doc.config);
  json cuboids = json::array();
  for (const CuboidRecord& c : doc.cuboids) {
    cuboids.push_back({{"t", c.t},
                       {"r", c.r},
                       {"s", c.s},
                       {"delta", c.delta},
                       {"exists", c.exists},
                       {"coverage", c.coverage}});
  }
  j["cuboids"] = std::move(cuboids);
  j["labels"] = doc.labels;
  j["metrics"] = {{"final_loss", loss_to_json(doc.final_loss)},
                  {"active_count", doc.active_count}};
  json trace = {{"recons", json::array()},
                {"compact", json::array()},
                {"exist", json::array()},
                {"total", json::array()}};
  for (const LossBreakdown& l : doc.trace) {
    trace["recons"].push_back(l.recons);
    trace["compact"].push_back(l.compact);
    trace["exist"].push_back(l.exist);
    trace["total"].push_back(l.total);
  }
  j["trace"] = std::move(trace);
  const Provenance& p = doc.provenance;
  j["provenance"] = {
      {"input", p.input},
      {"seed", p.seed},
      {"normals", std::string(to_string(p.normals))},
      {"normalized", p.normalized},
      {"normalization",
       {{"center", {p.normalization.center.x(), p.normalization.center.y(),
                    p.normalization.center.z()}},
        {"scale", p.normalization.scale}}}};
  return j.dump(2) + "\n";
}

ResultDocument parse_result(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("result is not valid JSON: ") + e.what());
  }
  ResultDocument doc;
  doc.version = get<std::string>(j, "", "version");
  if (doc.version != kResultVersion) {
    throw InvalidInput("unsupported result version '" + doc.version + "', expected '" +
                       std::string(kResultVersion) + "'");
  }
  doc.config = config_from_json(field(j, "", "config"));

  const json& cuboids = field(j, "", "cuboids");
  if (!cuboids.is_array()) throw InvalidInput("invalid value for field 'cuboids'");
  for (std::size_t i = 0; i < cuboids.size(); ++i) {
    const std::string p = "cuboids[" + std::to_string(i) + "].";
    const json& c = cuboids[i];
    CuboidRecord rec;
    rec.t = get<std::array<double, 3>>(c, p, "t");
    rec.r = get<std::array<double, 4>>(c, p, "r");
    rec.s = get<std::array<double, 3>>(c, p, "s");
    rec.delta = get<double>(c, p, "delta");
    rec.exists = get<bool>(c, p, "exists");
    rec.coverage = get<double>(c, p, "coverage");
    if (!(rec.delta >= 0 && rec.delta <= 1)) {
      throw InvalidInput("field '" + p + "delta' must lie in [0, 1]");
    }
    if (!std::all_of(rec.s.begin(), rec.s.end(), [](double s) { return s > 0; })) {
      throw InvalidInput("field '" + p + "s' must be positive");
    }
    doc.cuboids.push_back(rec);
  }
  doc.labels = get<std::vector<int>>(j, "", "labels");

  const json& metrics = field(j, "", "metrics");
  doc.final_loss = loss_from_json(field(metrics, "metrics.", "final_loss"),
                                  "metrics.final_loss.");
  doc.active_count = get<int>(metrics, "metrics.", "active_count");

  const json& trace = field(j, "", "trace");
  const auto recons = get<std::vector<double>>(trace, "trace.", "recons");
  const auto compact = get<std::vector<double>>(trace, "trace.", "compact");
  const auto exist = get<std::vector<double>>(trace, "trace.", "exist");
  const auto total = get<std::vector<double>>(trace, "trace.", "total");
  if (compact.size() != recons.size() || exist.size() != recons.size() ||
      total.size() != recons.size()) {
    throw InvalidInput("trace columns differ in length");
  }
  for (std::size_t i = 0; i < recons.size(); ++i) {
    doc.trace.push_back({recons[i], compact[i], exist[i], total[i]});
  }

  const json& prov = field(j, "", "provenance");
  const std::string pp = "provenance.";
  doc.provenance.input = get<std::string>(prov, pp, "input");
  doc.provenance.seed = get<std::uint64_t>(prov, pp, "seed");
  const auto normals = get<std::string>(prov, pp, "normals");
  if (normals == "file") {
    doc.provenance.normals = NormalsSource::File;
  } else if (normals == "estimated") {
    doc.provenance.normals = NormalsSource::Estimated;
  } else {
    throw InvalidInput("invalid value for field 'provenance.normals'");
  }
  doc.provenance.normalized = get<bool>(prov, pp, "normalized");
  const json& norm = field(prov, pp, "normalization");
  const auto center = get<std::array<double, 3>>(norm, pp + "normalization.", "center");
  doc.provenance.normalization.center = Vec3(center[0], center[1], center[2]);
  doc.provenance.normalization.scale = get<double>(norm, pp + "normalization.", "scale");
  return doc;
}

void save_result(const std::filesystem::path& path, const ResultDocument& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  out << serialize_result(doc);
}

ResultDocument load_result(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_result(buf.str());
}

std::string metrics_to_json(const MetricsReport& report) {
  json j;
  j["chamfer"] = report.chamfer;
  j["normal_consistency"] = report.normal_consistency;
  j["n_ac"] = report.n_ac;
  j["iou_pooling"] = "pooled";
  json labels = json::array();
  for (const LabelIou& l : report.per_label) labels.push_back({{"label", l.label}, {"iou", l.iou}});
  j["per_label_iou"] = std::move(labels);
  j["miou"] = report.miou ? json(*report.miou) : json(nullptr);
  return j.dump(2) + "\n";
}

void export_obj(std::ostream& out, std::span<const Cuboid> cuboids,
                std::span<const std::uint8_t> active) {
  const auto count = std::count_if(active.begin(), active.end(),
                                   [](std::uint8_t f) { return f != 0; });
  out << "# cuboidfit abstraction: " << count << " active cuboids\n";
  out << std::setprecision(17);
  std::size_t base = 1;
  for (std::size_t m = 0; m < cuboids.size(); ++m) {
    if (!active[m]) continue;
    const TriangleMesh mesh = cuboid_mesh(cuboids[m]);
    out << "g cuboid_" << m << '\n';
    for (const Vec3& v : mesh.vertices) {
      out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    }
    for (const auto& tri : mesh.triangles) {
      out << "f " << base + tri[0] << ' ' << base + tri[1] << ' ' << base + tri[2] << '\n';
    }
    base += mesh.vertices.size();
  }
}

void export_obj(const std::filesystem::path& path, const ResultDocument& doc) {
  const AbstractionResult result = result_from_document(doc);
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  export_obj(out, result.cuboids, result.exists);
}

std::string serialize_parts(std::string_view kind, std::uint64_t seed,
                            std::span<const Cuboid> parts) {
  json j;
  j["kind"] = std::string(kind);
  j["seed"] = seed;
  json list = json::array();
  for (const Cuboid& c : parts) {
    const Vec3 h = c.half_extents();
    list.push_back({{"t", {c.t.x(), c.t.y(), c.t.z()}},
                    {"r", {c.r.w, c.r.x, c.r.y, c.r.z}},
                    {"s", {h.x(), h.y(), h.z()}}});
  }
  j["parts"] = std::move(list);
  return j.dump(2) + "\n";
}

}  // namespace cuboidfit
