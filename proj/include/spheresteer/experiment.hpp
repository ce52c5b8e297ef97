#pragma once

#include "spheresteer/data.hpp"
#include "spheresteer/mlgp.hpp"
#include "spheresteer/steer.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace spheresteer {

struct KnownRotationConfig {
  std::vector<double> noise_levels = {0.0, 0.05, 0.1, 0.2, 0.3, 0.5};
  int runs = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = hardware concurrency; results do not depend on it
};

/// Outcome of one run at one noise level.
struct RunOutcome {
  double steerable_accuracy = 0.0;  // percent
  double ancestor_accuracy = 0.0;   // percent
  double steerable_l1 = 0.0;        // mean over shapes of ‖h_steered − h_truth‖₁
  double ancestor_l1 = 0.0;         // mean over shapes of ‖h_ancestor − h_truth‖₁
  std::size_t prediction_mismatches = 0;  // shapes where the two models disagree
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over runs
};

MeanStd mean_std(const std::vector<double>& values);

struct NoiseLevelRow {
  double noise = 0.0;
  int runs = 0;
  std::uint64_t seed = 0;
  MeanStd steerable_accuracy;
  MeanStd ancestor_accuracy;
  MeanStd steerable_l1;
  MeanStd ancestor_l1;
  std::size_t mismatched_runs = 0;  // runs whose per-shape predictions differ anywhere
};

struct ExperimentReport {
  std::vector<NoiseLevelRow> rows;
  std::vector<std::vector<RunOutcome>> runs;  // [noise level][run]

  /// Stable column order, shortest round-trip numbers; see docs/FORMATS.md.
  std::string to_csv() const;
  /// Mirrors the CSV rows losslessly under "rows".
  nlohmann::json to_json() const;
  /// Human-readable table with accuracies at one decimal.
  std::string to_table() const;
};

inline constexpr const char* kReportCsvHeader =
    "noise,runs,seed,steerable_acc_mean,steerable_acc_std,ancestor_acc_mean,ancestor_acc_std,"
    "steerable_l1_mean,steerable_l1_std,ancestor_l1_mean,ancestor_l1_std,mismatched_runs";

/// Throws InvalidArgument unless `steerable` is exactly what build_steerable
/// produces from `ancestor` (coefficients aside).
void require_same_lineage(const SteerableModel& steerable, const MLGPParams& ancestor);

/// Known-rotation experiment. Per run: sample R, rotate every shape, add
/// U(−a, a) noise to the rotated points, steer with set_rotation(R) and
/// classify. The ancestor sees the same noisy shape de-rotated by Rᵀ; both are
/// compared against the ancestor's hidden activations on the clean canonical
/// shapes.
ExperimentReport known_rotation(const SteerableModel& steerable, const MLGPParams& ancestor,
                                const Dataset& data, const KnownRotationConfig& config);

}  // namespace spheresteer
