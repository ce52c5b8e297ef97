#include "spheresteer/checkpoint.hpp"

#include "spheresteer/error.hpp"
#include "spheresteer/number_format.hpp"

#include <fstream>
#include <sstream>

namespace spheresteer {

using nlohmann::json;

std::string_view to_string(ModelKind kind) noexcept {
  return kind == ModelKind::Ancestor ? "ancestor" : "steerable";
}

const MLGPParams& Checkpoint::ancestor() const {
  if (const auto* p = std::get_if<MLGPParams>(&model)) return *p;
  throw Error(ErrorCode::SchemaMismatch, "checkpoint holds a steerable model, expected an ancestor");
}

const SteerableModel& Checkpoint::steerable() const {
  if (const auto* m = std::get_if<SteerableModel>(&model)) return *m;
  throw Error(ErrorCode::SchemaMismatch, "checkpoint holds an ancestor model, expected a steerable model");
}

namespace {

template <typename Derived>
json hex_array(const Eigen::DenseBase<Derived>& values) {
  json out = json::array();
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) out.push_back(format_hex(values(r, c)));
  }
  return out;
}

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::ParseError, "checkpoint: " + what); }

const json& field(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) bad(std::string("missing field '") + key + "'");
  return obj.at(key);
}

// Reads a row-major array of exactly rows×cols hex floats.
template <int Rows, int Cols>
Eigen::Matrix<double, Rows, Cols, (Cols == 1 ? Eigen::ColMajor : Eigen::RowMajor)> read_fixed(
    const json& arr, const std::string& what) {
  if (!arr.is_array() || arr.size() != static_cast<std::size_t>(Rows * Cols)) {
    bad(what + " must have " + std::to_string(Rows * Cols) + " entries");
  }
  Eigen::Matrix<double, Rows, Cols, (Cols == 1 ? Eigen::ColMajor : Eigen::RowMajor)> m;
  for (int i = 0; i < Rows * Cols; ++i) {
    if (!arr[static_cast<std::size_t>(i)].is_string()) bad(what + " entries must be hex float strings");
    m.data()[i] = parse_double(arr[static_cast<std::size_t>(i)].get<std::string>(), what);
  }
  return m;
}

Eigen::VectorXd read_vector(const json& arr, std::size_t n, const std::string& what) {
  if (!arr.is_array() || arr.size() != n) bad(what + " must have " + std::to_string(n) + " entries");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!arr[i].is_string()) bad(what + " entries must be hex float strings");
    v[static_cast<Eigen::Index>(i)] = parse_double(arr[i].get<std::string>(), what);
  }
  return v;
}

std::size_t read_count(const json& obj, const char* key) {
  const json& v = field(obj, key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) bad(std::string(key) + " must be a non-negative integer");
  return v.get<std::size_t>();
}

json output_json(const OutputLayer& output) {
  json out = json::array();
  for (const auto& s : output) out.push_back(hex_array(s));
  return out;
}

OutputLayer read_output(const json& arr, std::size_t classes, std::size_t hidden) {
  if (!arr.is_array() || arr.size() != classes) bad("output must list one sphere per class");
  OutputLayer out;
  for (std::size_t c = 0; c < classes; ++c) {
    out.push_back(read_vector(arr[c], hidden + 2, "output[" + std::to_string(c) + "]"));
  }
  return out;
}

json ancestor_json(const MLGPParams& p) {
  json m;
  m["points_per_shape"] = p.points_per_shape();
  m["hidden_units"] = p.hidden_units();
  m["classes"] = p.classes();
  m["units"] = p.units;
  json hidden = json::array();
  for (const auto& neuron : p.hidden) {
    json spheres = json::array();
    for (const auto& s : neuron.spheres) spheres.push_back(hex_array(s.v));
    hidden.push_back(std::move(spheres));
  }
  m["hidden"] = std::move(hidden);
  m["output"] = output_json(p.output);
  return m;
}

MLGPParams read_ancestor(const json& m) {
  const std::size_t k = read_count(m, "points_per_shape");
  const std::size_t h = read_count(m, "hidden_units");
  const std::size_t c = read_count(m, "classes");
  MLGPParams p = MLGPParams::zeros(k, h, c);
  p.units = field(m, "units").get<std::string>();
  const json& hidden = field(m, "hidden");
  if (!hidden.is_array() || hidden.size() != h) bad("hidden must list one neuron per hidden unit");
  for (std::size_t i = 0; i < h; ++i) {
    if (!hidden[i].is_array() || hidden[i].size() != k) bad("each hidden neuron must list K spheres");
    for (std::size_t j = 0; j < k; ++j) {
      p.hidden[i].spheres[j].v = read_fixed<5, 1>(hidden[i][j], "hidden sphere");
    }
  }
  p.output = read_output(field(m, "output"), c, h);
  try {
    p.validate();
  } catch (const Error& e) {
    bad(e.detail());
  }
  return p;
}

json steerable_json(const SteerableModel& s) {
  json m;
  m["points_per_shape"] = s.points_per_shape();
  m["hidden_units"] = s.hidden_units();
  m["classes"] = s.classes();
  m["units"] = s.units();
  json banks = json::array();
  json coeffs = json::array();
  for (std::size_t h = 0; h < s.hidden_units(); ++h) {
    json bank_row = json::array();
    json coeff_row = json::array();
    for (std::size_t k = 0; k < s.points_per_shape(); ++k) {
      const FilterBank& b = s.bank(h, k);
      json jb;
      jb["gamma"] = format_hex(b.gamma);
      jb["origin_rotation"] = hex_array(b.origin_rotation.matrix());
      jb["rows"] = hex_array(b.rows);
      bank_row.push_back(std::move(jb));
      coeff_row.push_back(hex_array(s.coeffs()[h][k]));
    }
    banks.push_back(std::move(bank_row));
    coeffs.push_back(std::move(coeff_row));
  }
  m["banks"] = std::move(banks);
  m["coeffs"] = std::move(coeffs);
  m["output"] = output_json(s.output());
  return m;
}

SteerableModel read_steerable(const json& m) {
  const std::size_t k = read_count(m, "points_per_shape");
  const std::size_t h = read_count(m, "hidden_units");
  const std::size_t c = read_count(m, "classes");
  const json& banks = field(m, "banks");
  const json& coeffs = field(m, "coeffs");
  if (!banks.is_array() || banks.size() != h || !coeffs.is_array() || coeffs.size() != h) {
    bad("banks and coeffs must list one row per hidden unit");
  }
  auto grid = std::make_shared<SteerableModel::BankGrid>(h);
  SteerableModel::CoeffGrid coeff_grid(h);
  std::array<Rotation3, 4> tetra;
  for (std::size_t i = 0; i < 4; ++i) tetra[i] = tetra_rotation(i);
  for (std::size_t i = 0; i < h; ++i) {
    if (!banks[i].is_array() || banks[i].size() != k || !coeffs[i].is_array() || coeffs[i].size() != k) {
      bad("each bank/coeff row must have K entries");
    }
    for (std::size_t j = 0; j < k; ++j) {
      const json& jb = banks[i][j];
      FilterBank b;
      b.gamma = parse_double(field(jb, "gamma").get<std::string>(), "gamma");
      try {
        b.origin_rotation = Rotation3::from_matrix(read_fixed<3, 3>(field(jb, "origin_rotation"), "origin_rotation"));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::ParseError) throw;
        bad("origin_rotation: " + e.detail());
      }
      b.rows = read_fixed<4, 5>(field(jb, "rows"), "bank rows");
      b.tetra_rotations = tetra;
      (*grid)[i].push_back(b);
      coeff_grid[i].push_back(read_fixed<4, 1>(coeffs[i][j], "coeffs"));
    }
  }
  OutputLayer output = read_output(field(m, "output"), c, h);
  try {
    return SteerableModel(std::move(grid), std::move(output), std::move(coeff_grid),
                          field(m, "units").get<std::string>());
  } catch (const Error& e) {
    bad(e.detail());
  }
}

}  // namespace

std::string format_checkpoint(const Checkpoint& ckpt) {
  json doc;
  doc["schema"] = kCheckpointSchema;
  doc["version"] = ckpt.schema_version;
  doc["kind"] = to_string(ckpt.kind());
  doc["seed"] = ckpt.seed;
  doc["class_names"] = ckpt.class_names;
  doc["config"] = ckpt.config;
  doc["model"] = ckpt.kind() == ModelKind::Ancestor ? ancestor_json(ckpt.ancestor())
                                                    : steerable_json(ckpt.steerable());
  return doc.dump(1) + "\n";
}

Checkpoint parse_checkpoint(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("checkpoint is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object() || doc.value("schema", "") != kCheckpointSchema) {
      throw Error(ErrorCode::SchemaMismatch, "not a spheresteer checkpoint");
    }
    const json& version = field(doc, "version");
    if (!version.is_number_integer() || version.get<int>() != kCheckpointVersion) {
      throw Error(ErrorCode::SchemaMismatch, "unsupported checkpoint version " + version.dump());
    }
    const std::string kind = field(doc, "kind").get<std::string>();
    Checkpoint ckpt;
    ckpt.schema_version = kCheckpointVersion;
    ckpt.seed = field(doc, "seed").get<std::uint64_t>();
    ckpt.class_names = field(doc, "class_names").get<std::vector<std::string>>();
    ckpt.config = field(doc, "config");
    if (kind == "ancestor") {
      ckpt.model = read_ancestor(field(doc, "model"));
    } else if (kind == "steerable") {
      ckpt.model = read_steerable(field(doc, "model"));
    } else {
      throw Error(ErrorCode::SchemaMismatch, "unknown model kind '" + kind + "'");
    }
    const std::size_t classes = std::visit([](const auto& m) { return m.classes(); }, ckpt.model);
    if (!ckpt.class_names.empty() && ckpt.class_names.size() != classes) {
      bad("class_names does not match the number of output spheres");
    }
    return ckpt;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string text = format_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::InvalidArgument, "failed writing " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open checkpoint " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_checkpoint(buf.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

}  // namespace spheresteer
