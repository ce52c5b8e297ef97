#pragma once

#include "spheresteer/mlgp.hpp"
#include "spheresteer/steer.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace spheresteer {

inline constexpr std::string_view kCheckpointSchema = "spheresteer-checkpoint";
inline constexpr int kCheckpointVersion = 1;

enum class ModelKind { Ancestor, Steerable };

std::string_view to_string(ModelKind kind) noexcept;

/// A serialized model together with the class names it predicts, the seed it
/// was produced with and an echo of the producing configuration.
struct Checkpoint {
  int schema_version = kCheckpointVersion;
  std::variant<MLGPParams, SteerableModel> model;
  std::vector<std::string> class_names;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();

  ModelKind kind() const {
    return std::holds_alternative<MLGPParams>(model) ? ModelKind::Ancestor : ModelKind::Steerable;
  }
  const MLGPParams& ancestor() const;      // throws SchemaMismatch for other kinds
  const SteerableModel& steerable() const;  // throws SchemaMismatch for other kinds
};

// JSON document with every float parameter encoded as a hexadecimal float
// string; see docs/FORMATS.md. Output is deterministic (sorted keys).
std::string format_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(std::string_view text);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace spheresteer
