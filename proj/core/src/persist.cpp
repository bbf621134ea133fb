#include "armlet/persist.hpp"

#include <fstream>
#include <sstream>

#include "armlet/error.hpp"
#include "armlet/schema.hpp"

namespace armlet {

using nlohmann::json;

json config_to_json(const ArmConfig& cfg) {
  return {{"n_e", cfg.n_e},
          {"K", cfg.heads},
          {"o", cfg.neurons},
          {"alpha", cfg.alpha},
          {"mlp_widths", cfg.mlp_widths},
          {"n_h", cfg.n_h},
          {"n_p", cfg.n_p},
          {"exp_clamp", cfg.exp_clamp},
          {"dnn_widths", cfg.dnn_widths},
          {"dropout", cfg.dropout},
          {"fm_neurons", cfg.fm_neurons}};
}

ArmConfig config_from_json(const json& j, ArmConfig cfg) {
  try {
    cfg.n_e = j.value("n_e", cfg.n_e);
    cfg.heads = j.value("K", cfg.heads);
    cfg.neurons = j.value("o", cfg.neurons);
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.mlp_widths = j.value("mlp_widths", cfg.mlp_widths);
    cfg.n_h = j.value("n_h", cfg.n_h);
    cfg.n_p = j.value("n_p", cfg.n_p);
    cfg.exp_clamp = j.value("exp_clamp", cfg.exp_clamp);
    cfg.dnn_widths = j.value("dnn_widths", cfg.dnn_widths);
    cfg.dropout = j.value("dropout", cfg.dropout);
    cfg.fm_neurons = j.value("fm_neurons", cfg.fm_neurons);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("config: ") + e.what());
  }
  return cfg;
}

json model_to_json(const Model& model, Precision precision) {
  json tensors = json::object();
  for (const auto& p : model.params()) {
    json rows = json::array();
    for (std::size_t r = 0; r < p.value.rows(); ++r) {
      json row = json::array();
      for (double v : p.value.row(r)) {
        if (precision == Precision::kFloat32) row.push_back(static_cast<float>(v));
        else row.push_back(v);
      }
      rows.push_back(std::move(row));
    }
    tensors[p.name] = {{"rows", p.value.rows()}, {"cols", p.value.cols()}, {"data", rows}};
  }
  return {{"format_version", kModelFormatVersion},
          {"model_kind", to_string(model.kind())},
          {"precision", precision == Precision::kFloat32 ? "float32" : "float64"},
          {"config", config_to_json(model.config())},
          {"schema", json::parse(schema_to_json(*model.schema(), -1))},
          {"train_step", model.params().step()},
          {"tensors", tensors}};
}

std::unique_ptr<Model> model_from_json(const json& doc) {
  try {
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      throw Error(ErrorKind::kParse, "unsupported model format_version " + std::to_string(version));
    const auto kind = parse_model_kind(doc.at("model_kind").get<std::string>());
    const auto cfg = config_from_json(doc.at("config"));
    auto schema = std::make_shared<const Schema>(parse_schema(doc.at("schema").dump()));
    auto model = make_model(kind, cfg, schema, 0);
    const auto& tensors = doc.at("tensors");
    for (auto& p : model->params()) {
      if (!tensors.contains(p.name))
        throw Error(ErrorKind::kParse, "model file lacks tensor '" + p.name + "'");
      const auto& jt = tensors[p.name];
      const auto rows = jt.at("rows").get<std::size_t>();
      const auto cols = jt.at("cols").get<std::size_t>();
      if (rows != p.value.rows() || cols != p.value.cols())
        throw Error(ErrorKind::kShape, "tensor '" + p.name + "' has the wrong shape");
      const auto& data = jt.at("data");
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) p.value(r, c) = data.at(r).at(c).get<double>();
    }
    model->params().set_step(doc.value("train_step", std::int64_t{0}));
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("model file: ") + e.what());
  }
}

void save_model(const Model& model, const std::filesystem::path& path, Precision precision) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write model file '" + path.string() + "'");
  out << model_to_json(model, precision).dump() << '\n';
}

std::unique_ptr<Model> load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open model file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("model file: ") + e.what());
  }
  return model_from_json(doc);
}

}  // namespace armlet
