#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "h2hinf/synthesis.hpp"

namespace h2hinf {

enum ExitCode : int {
    kExitPass = 0,
    kExitValidation = 1,
    kExitIO = 2,
    kExitNotSolvable = 3,
    kExitVerification = 4,
};

struct RunConfig {
    std::string command;
    std::filesystem::path scenario;
    std::optional<double> gamma;
    std::optional<double> horizon;
    std::optional<std::size_t> steps;
    std::optional<std::size_t> paths;
    std::uint64_t seed = 42;
    std::filesystem::path out = ".";
    OutputVariant variant = OutputVariant::ControlAugmented;
};

int cmd_validate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_synthesize(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_reproduce_uav(const RunConfig& config, std::ostream& out, std::ostream& err);

int run_command(const RunConfig& config, std::ostream& out, std::ostream& err);

// Parses argv and dispatches; usage errors return kExitIO.
int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err);

std::filesystem::path bundled_scenario_dir();

} // namespace h2hinf
