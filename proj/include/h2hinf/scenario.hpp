#pragma once

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "h2hinf/disturbance.hpp"
#include "h2hinf/model.hpp"
#include "h2hinf/time_grid.hpp"

namespace h2hinf {

struct Scenario {
    SystemModel model;
    TimeGrid grid;
    // "disturbance": [{"from": 0, "to": 1, "mode": "constant", "value": [...]}, ...]
    // with mode one of zero | constant | worst-case.
    std::optional<DisturbancePolicy> disturbance;
};

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unreadable file or malformed JSON / matrix literal.
class ScenarioParseError : public ScenarioError {
public:
    using ScenarioError::ScenarioError;
};

class DimensionError : public ScenarioError {
public:
    DimensionError(std::string field, const std::string& what) : ScenarioError(what), field_(std::move(field)) {}
    [[nodiscard]] const std::string& field() const { return field_; }

private:
    std::string field_;
};

// A standing assumption fails (F invertible, N1 orthonormal, Sigma0 PSD, gamma > 0, ...).
class AssumptionError : public ScenarioError {
public:
    AssumptionError(CheckResult check, const std::string& what) : ScenarioError(what), check_(std::move(check)) {}
    [[nodiscard]] const CheckResult& check() const { return check_; }

private:
    CheckResult check_;
};

// Parses and checks dimensions only. Optional fields default to D = n x 0,
// b = 0, beta = 0, Sigma0 = 0, xhat0 = x0.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario read_scenario(const std::filesystem::path& path);

// read_scenario followed by validate(); throws AssumptionError on the first failed check.
Scenario load_scenario(const std::filesystem::path& path);

// Constant coefficients only; throws ScenarioError for sampled signals.
nlohmann::json to_json(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

} // namespace h2hinf
