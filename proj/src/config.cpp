#include "spheresteer/config.hpp"

#include "spheresteer/error.hpp"

#include <fstream>
#include <set>

namespace spheresteer {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::ParseError, "config: " + what); }

template <typename T>
T read(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception&) {
    bad(std::string("'") + key + "' has the wrong type");
  }
}

std::uint64_t read_seed(const json& doc, const char* key, std::uint64_t fallback) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) bad(std::string("'") + key + "' must be a non-negative integer");
  return doc.at(key).get<std::uint64_t>();
}

}  // namespace

json RunConfig::to_json() const {
  json j;
  j["dataset"] = dataset;
  j["per_class"] = per_class;
  j["dataset_seed"] = dataset_seed;
  j["hidden_units"] = train.hidden_units;
  j["epochs"] = train.epochs;
  j["learning_rate"] = train.learning_rate;
  j["adam_beta1"] = train.adam_beta1;
  j["adam_beta2"] = train.adam_beta2;
  j["adam_eps"] = train.adam_eps;
  j["seed"] = train.seed;
  j["anchors"] = anchors ? json(*anchors) : json(nullptr);
  j["split"] = split ? json{{"train", split->train}, {"validation", split->validation}, {"test", split->test}}
                     : json(nullptr);
  j["split_seed"] = split_seed;
  return j;
}

RunConfig parse_run_config(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) bad("top level must be a JSON object");
  static const std::set<std::string> known = {"dataset",    "per_class",  "dataset_seed", "hidden_units",
                                              "epochs",     "learning_rate", "adam_beta1", "adam_beta2",
                                              "adam_eps",   "seed",       "anchors",      "split",
                                              "split_seed"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.contains(key)) bad("unknown key '" + key + "'");
  }
  RunConfig c;
  c.dataset = read<std::string>(doc, "dataset", c.dataset);
  if (!c.dataset.starts_with("builtin:") && !base_dir.empty() && std::filesystem::path(c.dataset).is_relative()) {
    c.dataset = (base_dir / c.dataset).lexically_normal().string();
  }
  c.per_class = read<std::size_t>(doc, "per_class", c.per_class);
  c.dataset_seed = read_seed(doc, "dataset_seed", c.dataset_seed);
  c.train.hidden_units = read<std::size_t>(doc, "hidden_units", c.train.hidden_units);
  c.train.epochs = read<int>(doc, "epochs", c.train.epochs);
  c.train.learning_rate = read<double>(doc, "learning_rate", c.train.learning_rate);
  c.train.adam_beta1 = read<double>(doc, "adam_beta1", c.train.adam_beta1);
  c.train.adam_beta2 = read<double>(doc, "adam_beta2", c.train.adam_beta2);
  c.train.adam_eps = read<double>(doc, "adam_eps", c.train.adam_eps);
  c.train.seed = read_seed(doc, "seed", c.train.seed);
  if (doc.contains("anchors") && !doc.at("anchors").is_null()) {
    c.anchors = read<AnchorIndices>(doc, "anchors", {});
  }
  if (doc.contains("split") && !doc.at("split").is_null()) {
    const json& s = doc.at("split");
    if (!s.is_object()) bad("'split' must be an object with train, validation and test");
    SplitFractions f;
    f.train = read<double>(s, "train", f.train);
    f.validation = read<double>(s, "validation", f.validation);
    f.test = read<double>(s, "test", f.test);
    c.split = f;
  }
  c.split_seed = read_seed(doc, "split_seed", c.split_seed);
  try {
    c.train.validate();
  } catch (const Error& e) {
    bad(e.detail());
  }
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": not valid JSON: " + e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

PreparedData prepare_data(const RunConfig& config) {
  Dataset data;
  if (config.dataset == "builtin:tetris") {
    data = tetris_dataset();
  } else if (config.dataset == "builtin:skeleton") {
    data = synthetic_skeleton_dataset(config.per_class, config.dataset_seed);
  } else if (config.dataset.starts_with("builtin:")) {
    throw Error(ErrorCode::ParseError, "unknown built-in dataset '" + config.dataset + "'");
  } else {
    data = load_dataset(config.dataset);
  }
  if (config.anchors) data = canonicalize_dataset(data, *config.anchors);

  PreparedData out;
  if (config.split) {
    out.split = split_dataset(data, *config.split, config.split_seed);
  } else {
    out.split.train = data;
    for (Dataset* part : {&out.split.validation, &out.split.test}) {
      part->class_names = data.class_names;
      part->points_per_shape = data.points_per_shape;
      part->units = data.units;
    }
  }
  out.all = std::move(data);
  return out;
}

const Dataset& select_part(const PreparedData& data, const std::string& part) {
  if (part == "all") return data.all;
  if (part == "train") return data.split.train;
  if (part == "validation") return data.split.validation;
  if (part == "test") return data.split.test;
  throw Error(ErrorCode::InvalidArgument, "unknown dataset part '" + part + "'");
}

}  // namespace spheresteer
