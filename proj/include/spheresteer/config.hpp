#pragma once

#include "spheresteer/data.hpp"
#include "spheresteer/train.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace spheresteer {

/// Everything needed to reproduce a training run. Read from a JSON object
/// whose keys are listed in docs/FORMATS.md; unknown keys are rejected so a
/// typo cannot silently fall back to a default.
struct RunConfig {
  /// A dataset file path, or one of the built-in sources "builtin:tetris" and
  /// "builtin:skeleton".
  std::string dataset = "builtin:tetris";
  std::size_t per_class = 20;        // builtin:skeleton only
  std::uint64_t dataset_seed = 0;    // builtin:skeleton only
  TrainConfig train;
  std::optional<AnchorIndices> anchors;  // canonicalize poses before anything else
  std::optional<SplitFractions> split;   // absent: train on everything
  std::uint64_t split_seed = 0;

  nlohmann::json to_json() const;
};

/// Relative dataset paths are resolved against `base_dir`. Throws ParseError
/// for malformed values and unknown keys.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

struct PreparedData {
  Dataset all;  // after canonicalization
  DatasetSplit split;  // everything in `train` when no split is configured
};

/// Loads or generates the dataset, canonicalizes it if anchors are set and
/// splits it.
PreparedData prepare_data(const RunConfig& config);

/// Selects "all", "train", "validation" or "test". Throws InvalidArgument.
const Dataset& select_part(const PreparedData& data, const std::string& part);

}  // namespace spheresteer
