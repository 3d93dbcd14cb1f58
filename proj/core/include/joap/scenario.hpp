#pragma once

#include <string>

#include "joap/model.hpp"

namespace joap {

/// One operating period of the station: arrival rate and electricity price
/// are carried inside `station` and `econ` so there is a single source.
struct Scenario {
  std::string name;
  StationParams station;
  EconomicParams econ;
  double duration = 240.0;  // min

  double lambda() const noexcept { return station.lambda; }
  double p_e() const noexcept { return econ.p_e(); }
  double c() const noexcept { return econ.c(); }
};

}  // namespace joap
