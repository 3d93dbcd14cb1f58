#include "joap/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "joap/errors.hpp"

namespace joap {
namespace {

using nlohmann::json;

class Reader {
 public:
  explicit Reader(std::vector<std::string>& violations)
      : violations_(violations) {}

  void fail(const std::string& path, const std::string& what) {
    violations_.push_back(path + ": " + what);
  }

  bool expect_object(const json& node, const std::string& path) {
    if (node.is_object()) return true;
    fail(path, "expected an object");
    return false;
  }

  void allow_only(const json& node, const std::string& path,
                  const std::set<std::string>& allowed) {
    for (const auto& [key, value] : node.items())
      if (!allowed.contains(key)) fail(join(path, key), "unknown key");
  }

  std::optional<double> number(const json& node, const std::string& path,
                               const std::string& key, bool required) {
    const auto it = node.find(key);
    if (it == node.end()) {
      if (required) fail(join(path, key), "missing required key");
      return std::nullopt;
    }
    if (!it->is_number()) {
      fail(join(path, key), "expected a number");
      return std::nullopt;
    }
    return it->get<double>();
  }

  std::optional<long long> integer(const json& node, const std::string& path,
                                   const std::string& key, bool required) {
    const auto it = node.find(key);
    if (it == node.end()) {
      if (required) fail(join(path, key), "missing required key");
      return std::nullopt;
    }
    if (!it->is_number_integer()) {
      fail(join(path, key), "expected an integer");
      return std::nullopt;
    }
    return it->get<long long>();
  }

  template <typename T>
  std::optional<std::vector<T>> array(const json& node, const std::string& path,
                                      const std::string& key) {
    const auto it = node.find(key);
    if (it == node.end()) return std::nullopt;
    const std::string here = join(path, key);
    if (!it->is_array() || it->empty()) {
      fail(here, "expected a non-empty array");
      return std::nullopt;
    }
    std::vector<T> out;
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& v = (*it)[i];
      const bool ok = std::is_integral_v<T> ? v.is_number_integer()
                                            : v.is_number();
      if (!ok) {
        fail(here + "[" + std::to_string(i) + "]", "expected a number");
        return std::nullopt;
      }
      out.push_back(v.get<T>());
    }
    return out;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  std::vector<std::string>& violations_;
};

template <typename T, typename Pred>
void check_each(Reader& r, const std::string& path, const std::vector<T>& v,
                Pred ok, const char* what) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!ok(v[i])) r.fail(path + "[" + std::to_string(i) + "]", what);
}

std::string locate(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return fmt::format("line {}, column {}", line, column);
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, std::string_view source) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigParseError(fmt::format("{}: {}: {}", source,
                                       locate(text, e.byte), e.what()));
  }

  std::vector<std::string> violations;
  Reader r(violations);
  ExperimentConfig cfg;
  if (!r.expect_object(root, "<root>")) throw ConfigValidationError(violations);
  r.allow_only(root, "",
               {"schema_version", "station", "economics", "scenarios", "run",
                "tau_grid", "admission_grid", "wait_grid"});

  if (auto v = r.integer(root, "", "schema_version", true)) {
    cfg.schema_version = static_cast<int>(*v);
    if (*v != kConfigSchemaVersion)
      r.fail("schema_version",
             fmt::format("unsupported version {} (expected {})", *v,
                         kConfigSchemaVersion));
  }

  // station
  if (!root.contains("station")) {
    r.fail("station", "missing required key");
  } else if (const json& st = root["station"]; r.expect_object(st, "station")) {
    r.allow_only(st, "station",
                 {"ports", "charging_power_kw", "parking_capacity", "tau"});
    if (auto v = r.integer(st, "station", "ports", true)) {
      cfg.station.m = static_cast<int>(*v);
      if (*v < 1) r.fail("station.ports", "must be >= 1");
    }
    if (auto v = r.number(st, "station", "charging_power_kw", true)) {
      cfg.station.alpha = *v;
      if (!(*v > 0.0)) r.fail("station.charging_power_kw", "must be > 0");
    }
    if (auto v = r.integer(st, "station", "parking_capacity", true)) {
      cfg.station.parking_capacity = static_cast<int>(*v);
      if (*v < cfg.station.m)
        r.fail("station.parking_capacity", "must be >= ports");
    }
    if (auto v = r.number(st, "station", "tau", true)) {
      cfg.station.tau = *v;
      if (!(*v > 1.0)) r.fail("station.tau", "must be > 1");
    }
  }

  // economics
  double beta = 0.05, phi = 100.0, u_phi = 100.0, c = 0.4;
  bool econ_ok = true;
  if (!root.contains("economics")) {
    r.fail("economics", "missing required key");
    econ_ok = false;
  } else if (const json& ec = root["economics"];
             r.expect_object(ec, "economics")) {
    r.allow_only(ec, "economics",
                 {"beta", "battery_kwh", "max_utility", "penalty_per_min"});
    const auto positive = [&](const char* key, double& slot) {
      if (auto v = r.number(ec, "economics", key, true)) {
        slot = *v;
        if (!(*v > 0.0)) {
          r.fail(std::string("economics.") + key, "must be > 0");
          econ_ok = false;
        }
      } else {
        econ_ok = false;
      }
    };
    positive("beta", beta);
    positive("battery_kwh", phi);
    positive("max_utility", u_phi);
    if (auto v = r.number(ec, "economics", "penalty_per_min", true)) {
      c = *v;
      if (!(*v >= 0.0)) {
        r.fail("economics.penalty_per_min", "must be >= 0");
        econ_ok = false;
      }
    } else {
      econ_ok = false;
    }
  } else {
    econ_ok = false;
  }
  if (econ_ok) cfg.econ = EconomicParams(beta, phi, u_phi, 0.0, c);

  // scenarios
  if (!root.contains("scenarios")) {
    r.fail("scenarios", "missing required key");
  } else if (const json& sc = root["scenarios"];
             !sc.is_array() || sc.empty()) {
    r.fail("scenarios", "expected a non-empty array");
  } else {
    for (std::size_t i = 0; i < sc.size(); ++i) {
      const std::string path = "scenarios[" + std::to_string(i) + "]";
      const json& s = sc[i];
      if (!r.expect_object(s, path)) continue;
      r.allow_only(s, path,
                   {"name", "arrival_rate_per_min", "electricity_price_per_mwh",
                    "duration_min"});
      std::string name = "scenario-" + std::to_string(i);
      if (auto it = s.find("name"); it != s.end()) {
        if (it->is_string())
          name = it->get<std::string>();
        else
          r.fail(path + ".name", "expected a string");
      }
      auto lambda = r.number(s, path, "arrival_rate_per_min", true);
      auto price = r.number(s, path, "electricity_price_per_mwh", true);
      auto duration = r.number(s, path, "duration_min", false);
      bool ok = lambda && price;
      if (lambda && !(*lambda > 0.0)) {
        r.fail(path + ".arrival_rate_per_min", "must be > 0");
        ok = false;
      }
      if (price && !(*price > 0.0)) {
        r.fail(path + ".electricity_price_per_mwh", "must be > 0");
        ok = false;
      }
      if (duration && !(*duration > 0.0)) {
        r.fail(path + ".duration_min", "must be > 0");
        ok = false;
      }
      if (!ok || !econ_ok) continue;
      StationParams station = cfg.station;
      station.lambda = *lambda;
      cfg.scenarios.push_back(
          Scenario{name, station, cfg.econ.with_electricity_price(*price / 1000.0),
                   duration.value_or(240.0)});
    }
  }

  // run
  if (auto it = root.find("run"); it != root.end() && r.expect_object(*it, "run")) {
    r.allow_only(*it, "run", {"seed", "reps", "horizon_min", "threads"});
    if (auto v = r.integer(*it, "run", "seed", false)) {
      if (*v < 0) r.fail("run.seed", "must be >= 0");
      cfg.run.seed = static_cast<std::uint64_t>(*v);
    }
    if (auto v = r.integer(*it, "run", "reps", false)) {
      if (*v < 1) r.fail("run.reps", "must be >= 1");
      cfg.run.reps = static_cast<int>(*v);
    }
    if (auto v = r.number(*it, "run", "horizon_min", false)) {
      if (!(*v > 0.0)) r.fail("run.horizon_min", "must be > 0");
      cfg.run.horizon = *v;
    }
    if (auto v = r.integer(*it, "run", "threads", false)) {
      if (*v < 0) r.fail("run.threads", "must be >= 0");
      cfg.run.threads = static_cast<unsigned>(*v);
    }
  }

  if (auto v = r.array<double>(root, "", "tau_grid")) {
    check_each(r, "tau_grid", *v, [](double t) { return t > 1.0; },
               "must be > 1");
    cfg.tau_grid = *v;
  }

  const auto positive_d = [](double x) { return x > 0.0; };
  const auto positive_i = [](int x) { return x >= 1; };

  if (auto it = root.find("admission_grid");
      it != root.end() && r.expect_object(*it, "admission_grid")) {
    const std::string path = "admission_grid";
    r.allow_only(*it, path,
                 {"sub_processes", "arrival_rates_per_min", "demands_kwh",
                  "arrivals_per_point"});
    if (auto v = r.array<int>(*it, path, "sub_processes")) {
      check_each(r, path + ".sub_processes", *v, positive_i, "must be >= 1");
      cfg.admission.sub_processes = *v;
    }
    if (auto v = r.array<double>(*it, path, "arrival_rates_per_min")) {
      check_each(r, path + ".arrival_rates_per_min", *v, positive_d,
                 "must be > 0");
      cfg.admission.arrival_rates = *v;
    }
    if (auto v = r.array<double>(*it, path, "demands_kwh")) {
      check_each(r, path + ".demands_kwh", *v,
                 [&](double d) { return d > 0.0 && d <= phi; },
                 "must lie in (0, battery_kwh]");
      cfg.admission.demands = *v;
    }
    if (auto v = r.integer(*it, path, "arrivals_per_point", false)) {
      if (*v < 1) r.fail(path + ".arrivals_per_point", "must be >= 1");
      cfg.admission.arrivals_per_point = static_cast<std::uint64_t>(*v);
    }
  }

  if (auto it = root.find("wait_grid");
      it != root.end() && r.expect_object(*it, "wait_grid")) {
    const std::string path = "wait_grid";
    r.allow_only(*it, path,
                 {"sub_processes", "arrival_rates_per_min", "demands_kwh",
                  "horizon_min", "second_moment"});
    if (auto v = r.array<int>(*it, path, "sub_processes")) {
      check_each(r, path + ".sub_processes", *v, positive_i, "must be >= 1");
      cfg.wait.sub_processes = *v;
    }
    if (auto v = r.array<double>(*it, path, "arrival_rates_per_min")) {
      check_each(r, path + ".arrival_rates_per_min", *v, positive_d,
                 "must be > 0");
      cfg.wait.arrival_rates = *v;
    }
    if (auto v = r.array<double>(*it, path, "demands_kwh")) {
      check_each(r, path + ".demands_kwh", *v,
                 [&](double d) { return d > 0.0 && d <= phi; },
                 "must lie in (0, battery_kwh]");
      cfg.wait.demands = *v;
    }
    if (auto v = r.number(*it, path, "horizon_min", false)) {
      if (!(*v > 0.0)) r.fail(path + ".horizon_min", "must be > 0");
      cfg.wait.horizon = *v;
    }
    if (auto m = it->find("second_moment"); m != it->end()) {
      if (*m == "as_stated")
        cfg.wait.second_moment = SecondMomentTarget::kVarianceAsStated;
      else if (*m == "true")
        cfg.wait.second_moment = SecondMomentTarget::kTrueSecondMoment;
      else
        r.fail(path + ".second_moment", R"(expected "as_stated" or "true")");
    }
  }

  if (!violations.empty()) {
    for (auto& v : violations) v = std::string(source) + ": " + v;
    throw ConfigValidationError(std::move(violations));
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigValidationError(
        {"cannot open configuration file: " + path.string()});
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

}  // namespace joap
