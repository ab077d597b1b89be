#include "opsurv/model_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "opsurv/errors.hpp"

namespace opsurv {

namespace {

constexpr const char* kMagic = "opsurv-model";
constexpr int kVersion = 1;

void put(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += ' ';
  out += buf;
}

void serialize_mlp(std::string& out, const char* name, const Mlp& mlp) {
  out += std::string("head ") + name + " " + std::to_string(mlp.layers.size()) +
         "\n";
  for (const auto& layer : mlp.layers) {
    out += "layer " + std::to_string(layer.weights.rows) + " " +
           std::to_string(layer.weights.cols) + "\n";
    out += "w";
    for (double v : layer.weights.data) put(out, v);
    out += "\nb";
    for (double v : layer.bias) put(out, v);
    out += "\n";
  }
}

struct TokenReader {
  std::istringstream in;
  explicit TokenReader(const std::string& text) : in(text) {}

  std::string word() {
    std::string w;
    if (!(in >> w)) throw DataError("model file truncated");
    return w;
  }
  void expect(const std::string& token) {
    const std::string w = word();
    if (w != token) {
      throw DataError("model file: expected '" + token + "', got '" + w + "'");
    }
  }
  long integer() {
    long v = 0;
    if (!(in >> v)) throw DataError("model file: expected an integer");
    return v;
  }
  double real() {
    double v = 0.0;
    if (!(in >> v)) throw DataError("model file: expected a number");
    return v;
  }
};

Mlp read_mlp(TokenReader& r, const char* name) {
  r.expect("head");
  r.expect(name);
  const long n_layers = r.integer();
  Mlp mlp;
  for (long l = 0; l < n_layers; ++l) {
    r.expect("layer");
    const long rows = r.integer();
    const long cols = r.integer();
    if (rows <= 0 || cols <= 0) throw DataError("model file: bad layer shape");
    DenseLayer layer;
    layer.weights = Matrix(static_cast<std::size_t>(rows),
                           static_cast<std::size_t>(cols));
    r.expect("w");
    for (double& v : layer.weights.data) v = r.real();
    r.expect("b");
    layer.bias.resize(static_cast<std::size_t>(rows));
    for (double& v : layer.bias) v = r.real();
    mlp.layers.push_back(std::move(layer));
  }
  return mlp;
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
  std::string out;
  out += std::string(kMagic) + " " + std::to_string(kVersion) + "\n";
  out += "n_features " + std::to_string(model.config.n_features) + "\n";
  out += "n_events " + std::to_string(model.config.n_events) + "\n";
  out += "max_degree " + std::to_string(model.config.max_degree) + "\n";
  out += "quad_order " + std::to_string(model.config.quad_order) + "\n";
  out += "hidden " + std::to_string(model.config.hidden_sizes.size());
  for (int h : model.config.hidden_sizes) out += " " + std::to_string(h);
  out += "\ntime_scale";
  put(out, model.time_scale.t_max);
  out += ' ' + std::to_string(model.time_scale.quad_order);
  put(out, model.time_scale.top_node);
  put(out, model.time_scale.factor);
  out += "\nfeature_mean " + std::to_string(model.scaler.mean.size());
  for (double v : model.scaler.mean) put(out, v);
  out += "\nfeature_std " + std::to_string(model.scaler.stddev.size());
  for (double v : model.scaler.stddev) put(out, v);
  out += "\n";
  serialize_mlp(out, "coeff", model.params.coeff_head);
  serialize_mlp(out, "alpha", model.params.alpha_head);
  out += "end\n";
  return out;
}

TrainedModel deserialize_model(const std::string& text) {
  TokenReader r(text);
  r.expect(kMagic);
  const long version = r.integer();
  if (version != kVersion) {
    throw DataError("unsupported model version " + std::to_string(version));
  }
  TrainedModel model;
  r.expect("n_features");
  model.config.n_features = static_cast<int>(r.integer());
  r.expect("n_events");
  model.config.n_events = static_cast<int>(r.integer());
  r.expect("max_degree");
  model.config.max_degree = static_cast<int>(r.integer());
  r.expect("quad_order");
  model.config.quad_order = static_cast<int>(r.integer());
  r.expect("hidden");
  const long n_hidden = r.integer();
  model.config.hidden_sizes.clear();
  for (long i = 0; i < n_hidden; ++i) {
    model.config.hidden_sizes.push_back(static_cast<int>(r.integer()));
  }
  r.expect("time_scale");
  model.time_scale.t_max = r.real();
  model.time_scale.quad_order = static_cast<int>(r.integer());
  model.time_scale.top_node = r.real();
  model.time_scale.factor = r.real();
  r.expect("feature_mean");
  const long n_mean = r.integer();
  model.scaler.mean.resize(static_cast<std::size_t>(n_mean));
  for (double& v : model.scaler.mean) v = r.real();
  r.expect("feature_std");
  const long n_std = r.integer();
  model.scaler.stddev.resize(static_cast<std::size_t>(n_std));
  for (double& v : model.scaler.stddev) v = r.real();
  model.params.coeff_head = read_mlp(r, "coeff");
  model.params.alpha_head = read_mlp(r, "alpha");
  r.expect("end");
  validate(model.config);
  if (model.scaler.mean.size() != static_cast<std::size_t>(model.config.n_features) ||
      model.scaler.stddev.size() != model.scaler.mean.size()) {
    throw DataError("model file: scaler size does not match n_features");
  }
  return model;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + tmp.string() + "'");
    out.write(contents.data(),
              static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw DataError("cannot move '" + tmp.string() + "' to '" + path + "': " +
                    ec.message());
  }
}

void save_model(const TrainedModel& model, const std::string& path) {
  write_file_atomic(path, serialize_model(model));
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

}  // namespace opsurv
