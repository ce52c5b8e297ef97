#pragma once

#include "spheresteer/steer.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace spheresteer {

/// Result of one randomized property. `max_error` is the worst value of the
/// property's metric over all trials; the property passes when it stays below
/// `tolerance`. The first failing trial (or, if none fails, nothing) is
/// described in `counterexample` together with the inputs needed to replay it.
struct PropertyResult {
  std::string name;
  int trials = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = true;
  std::string counterexample;
};

struct VerifyReport {
  std::uint64_t seed = 0;
  std::vector<PropertyResult> properties;

  bool all_passed() const;
  const PropertyResult& find(const std::string& name) const;  // throws InvalidArgument
  nlohmann::json to_json() const;
  std::string to_table() const;
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  int trials = 100;
  /// Basis used by the steering code under test. Tests pass a deliberately
  /// corrupted basis to make sure the suite notices.
  TetraBasis basis = TetraBasis::canonical();
};

/// Names of all properties, in the order run_property_suite reports them.
const std::vector<std::string>& property_names();

/// Runs every property with `trials` random trials each. Each property draws
/// from its own engine seeded by (seed, property index), so results for one
/// property do not depend on the others.
VerifyReport run_property_suite(const VerifyOptions& options);

/// Runs a single property by name. Throws InvalidArgument for unknown names.
PropertyResult run_property(const std::string& name, const VerifyOptions& options);

/// Basis with one sign flipped in its second column: still orthogonal, but no
/// longer the tetrahedron the banks were built from.
TetraBasis corrupted_basis();

}  // namespace spheresteer
