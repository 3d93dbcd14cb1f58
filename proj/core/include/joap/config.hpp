#pragma once

// JSON experiment configuration. See docs/config_schema.md for the schema.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "joap/model.hpp"
#include "joap/queueing.hpp"
#include "joap/scenario.hpp"

namespace joap {

inline constexpr int kConfigSchemaVersion = 1;

struct RunOptions {
  std::uint64_t seed = 1;
  int reps = 200;
  std::optional<double> horizon;  // min; defaults to each scenario's duration
  unsigned threads = 0;
};

struct AdmissionGrid {
  std::vector<int> sub_processes{3, 4, 5};
  std::vector<double> arrival_rates{0.001, 0.002, 0.004, 0.006,
                                    0.008, 0.01,  0.015, 0.02};  // 1/min
  std::vector<double> demands{35.0};                             // kWh
  std::uint64_t arrivals_per_point = 1000000;
};

struct WaitGrid {
  std::vector<int> sub_processes{5, 6, 8};
  std::vector<double> arrival_rates{0.05, 0.1, 0.2, 0.3};
  std::vector<double> demands{1.0, 2.0, 5.0, 10.0};
  double horizon = 60000.0;  // min per replication
  SecondMomentTarget second_moment = SecondMomentTarget::kVarianceAsStated;
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  StationParams station;  // lambda is overridden per scenario
  EconomicParams econ{0.05, 100.0, 100.0, 0.06, 0.4};
  std::vector<Scenario> scenarios;
  RunOptions run;
  std::vector<double> tau_grid{1.01, 1.05, 1.1, 1.2, 1.5, 2.0};
  AdmissionGrid admission;
  WaitGrid wait;
};

/// Parses and validates. Throws ConfigParseError (with line and column) for
/// malformed JSON and ConfigValidationError listing every violation,
/// including unknown keys. Prices are given in $/MWh and stored in $/kWh.
ExperimentConfig parse_config(std::string_view text,
                              std::string_view source = "<config>");

/// Throws ConfigValidationError naming the path when the file is missing.
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace joap
