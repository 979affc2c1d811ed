#include "mekan/serialize.hpp"

#include <fstream>

namespace mekan {

using nlohmann::json;

namespace {

json layer_to_json(const KanLayer& layer) {
  json acts = json::array();
  for (int j = 0; j < layer.out_width; ++j)
    for (int i = 0; i < layer.in_width; ++i) {
      const auto& a = layer.at(j, i);
      acts.push_back({{"j", j},
                      {"i", i},
                      {"base", std::string(to_string(a.base_kind))},
                      {"grid",
                       {{"intervals", a.grid.num_intervals()},
                        {"order", a.grid.order()},
                        {"lo", a.grid.lo()},
                        {"hi", a.grid.hi()}}},
                      {"coeffs", a.coeffs}});
    }
  return {{"in", layer.in_width}, {"out", layer.out_width}, {"activations", std::move(acts)}};
}

KanLayer layer_from_json(const json& doc, int in_width, int out_width) {
  if (doc.at("in").get<int>() != in_width || doc.at("out").get<int>() != out_width)
    throw ShapeError("model file: layer widths do not match the shape");
  const auto& acts = doc.at("activations");
  if (acts.size() != static_cast<std::size_t>(in_width * out_width))
    throw ShapeError("model file: wrong activation count in a layer");
  KanLayer layer{in_width, out_width, {}};
  for (const auto& a : acts) {
    const auto& g = a.at("grid");
    SplineGrid grid(g.at("intervals").get<int>(), g.at("order").get<int>(), g.at("lo").get<double>(),
                    g.at("hi").get<double>());
    layer.acts.emplace_back(std::move(grid), a.at("coeffs").get<std::vector<double>>(),
                            parse_base_kind(a.at("base").get<std::string>()));
  }
  return layer;
}

}  // namespace

json model_to_json(const MultiExitKan& model) {
  json trunk = json::array();
  for (const auto& l : model.trunk) trunk.push_back(layer_to_json(l));
  json exits = json::array();
  for (const auto& l : model.exits) exits.push_back(layer_to_json(l));
  return {{"format", "mekan-model"},
          {"format_version", kModelFormatVersion},
          {"shape", model.shape.widths},
          {"multi_exit", model.multi_exit},
          {"trunk", std::move(trunk)},
          {"exits", std::move(exits)}};
}

MultiExitKan model_from_json(const json& doc) {
  try {
    if (doc.at("format_version").get<int>() != kModelFormatVersion)
      throw ShapeError("model file: unsupported format_version");
    MultiExitKan model;
    model.shape.widths = doc.at("shape").get<std::vector<int>>();
    model.shape.validate();
    model.multi_exit = doc.at("multi_exit").get<bool>();
    const int depth = model.shape.depth();
    const auto& trunk = doc.at("trunk");
    if (trunk.size() != static_cast<std::size_t>(depth)) throw ShapeError("model file: trunk depth mismatch");
    for (int l = 0; l < depth; ++l)
      model.trunk.push_back(layer_from_json(trunk[l], model.shape.widths[l], model.shape.widths[l + 1]));
    const auto& exits = doc.at("exits");
    const std::size_t expected_exits = model.multi_exit ? static_cast<std::size_t>(depth - 1) : 0;
    if (exits.size() != expected_exits) throw ShapeError("model file: exit count mismatch");
    for (std::size_t k = 0; k < exits.size(); ++k)
      model.exits.push_back(layer_from_json(exits[k], model.shape.widths[k], model.shape.output_dim()));
    return model;
  } catch (const json::exception& e) {
    throw ShapeError(std::string("model file: ") + e.what());
  }
}

void save_model(const MultiExitKan& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write model file " + path.string());
  out << model_to_json(model).dump(1) << '\n';
}

MultiExitKan load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ShapeError("model file " + path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

std::string activation_file_name(const ActivationSite& site) {
  const std::string where = site.is_exit ? "exit" + std::to_string(site.layer) : "L" + std::to_string(site.layer);
  return "act_" + where + "_J" + std::to_string(site.j) + "_I" + std::to_string(site.i) + ".csv";
}

std::vector<std::string> export_activations(const MultiExitKan& model, const std::filesystem::path& out_dir,
                                            int samples_per_act) {
  if (samples_per_act < 1) throw DataError("samples_per_act must be positive");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  std::ofstream index(out_dir / "index.csv");
  if (ec || !index) throw Error("cannot write to directory " + out_dir.string());
  index << "file,kind,layer,j,i\n";

  std::vector<std::string> names;
  for_each_activation(model, [&](const ActivationSite& site, const SplineActivation& act) {
    const std::string name = activation_file_name(site);
    std::ofstream out(out_dir / name);
    if (!out) throw Error("cannot write " + (out_dir / name).string());
    out.precision(17);
    out << "x,phi_x\n";
    for (int s = 0; s < samples_per_act; ++s) {
      const double x = samples_per_act == 1
                           ? 0.5 * (act.grid.lo() + act.grid.hi())
                           : act.grid.lo() + (act.grid.hi() - act.grid.lo()) * s / (samples_per_act - 1);
      out << x << ',' << eval_activation(act, x) << '\n';
    }
    index << name << ',' << (site.is_exit ? "exit" : "trunk") << ',' << site.layer << ',' << site.j << ',' << site.i
          << '\n';
    names.push_back(name);
  });
  return names;
}

}  // namespace mekan
