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

#include "nsnn/model_io.h"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nsnn/errors.h"

namespace nsnn {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    rows.push_back(Vector(m.row(r).begin(), m.row(r).end()));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, std::size_t cols_if_empty) {
  if (!j.is_array()) throw FormatError("matrix must be an array of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& r : j) rows.push_back(r.get<std::vector<double>>());
  if (rows.empty()) return Matrix(0, cols_if_empty);
  return Matrix::from_rows(rows);
}

}  // namespace

std::string serialize_model(const Network& net, const ModelProvenance* provenance) {
  net.validate();
  json doc;
  doc["format_version"] = kModelFormatVersion;
  doc["loss_mode"] = to_string(net.loss_mode);
  json layers = json::array();
  for (const auto& l : net.layers) {
    layers.push_back({
        {"weights", matrix_to_json(l.weights)},
        {"bias", l.bias},
        {"tau", l.lif.tau},
        {"v_th", l.lif.v_th},
        {"u_reset", l.lif.u_reset},
        {"noise", {{"family", to_string(l.noise.family)}, {"scale", l.noise.scale}}},
        {"input_scale", l.input_scale},
        {"input_shift", l.input_shift},
    });
  }
  doc["layers"] = layers;
  doc["readout"] = {{"weights", matrix_to_json(net.readout.weights)},
                    {"bias", net.readout.bias}};
  if (provenance) {
    doc["provenance"] = {{"seed", provenance->seed},
                         {"config_hash", provenance->config_hash}};
  }
  return doc.dump(2) + "\n";
}

Network parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  }
  try {
    if (!doc.is_object() || !doc.contains("format_version")) {
      throw FormatError("model file lacks format_version");
    }
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw VersionError("model format_version " + std::to_string(version) +
                         " is not supported (expected " +
                         std::to_string(kModelFormatVersion) + ")");
    }
    Network net;
    net.loss_mode = loss_mode_from_string(doc.at("loss_mode").get<std::string>());
    for (const auto& jl : doc.at("layers")) {
      LayerSpec l;
      l.bias = jl.at("bias").get<Vector>();
      l.weights = matrix_from_json(jl.at("weights"), 0);
      l.lif.tau = jl.at("tau").get<double>();
      l.lif.v_th = jl.at("v_th").get<double>();
      l.lif.u_reset = jl.at("u_reset").get<double>();
      l.noise.family = noise_family_from_string(jl.at("noise").at("family").get<std::string>());
      l.noise.scale = jl.at("noise").at("scale").get<double>();
      l.input_scale = jl.value("input_scale", 1.0);
      l.input_shift = jl.value("input_shift", 0.0);
      net.layers.push_back(std::move(l));
    }
    if (net.layers.empty()) throw FormatError("model has no layers");
    net.readout.bias = doc.at("readout").at("bias").get<Vector>();
    net.readout.weights = matrix_from_json(doc.at("readout").at("weights"),
                                           net.layers.back().out_dim());
    net.validate();
    for (const auto& l : net.layers) l.validate();
    return net;
  } catch (const FormatError&) {
    throw;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  } catch (const Error& e) {
    throw FormatError(std::string("invalid model: ") + e.what());
  }
}

void save_model(const Network& net, const std::filesystem::path& path,
                const ModelProvenance* provenance) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << serialize_model(net, provenance);
  if (!out) throw Error("failed writing " + path.string());
}

Network load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read model file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

}  // namespace nsnn
