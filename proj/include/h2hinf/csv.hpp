#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "h2hinf/evaluate.hpp"
#include "h2hinf/monte_carlo.hpp"
#include "h2hinf/simulate.hpp"
#include "h2hinf/synthesis.hpp"
#include "h2hinf/time_grid.hpp"

namespace h2hinf {

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shortest round-tripping form ("%.17g").
std::string format_double(double value);

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// t, x1..xn, xhat1..xhatn, y1..yr, u1..us, v1..vm, z1..z(n+s)
void write_trajectory(const std::filesystem::path& path, const SimResult& result, const TimeGrid& grid);

// t, U_ij (row-major), U0_i, V_ij, V0_i
void write_gains(const std::filesystem::path& path, const GainSchedule& gains, const TimeGrid& grid);

// t, P1_ij, P2_ij (row-major), eta1_i, eta2_i
void write_riccati(const std::filesystem::path& path, const RiccatiPair& riccati, const AffinePair& affine,
                   const TimeGrid& grid);

// path, seed, metric columns; failed paths carry the message instead.
void write_ensemble(const std::filesystem::path& path, const Ensemble& ensemble, std::uint64_t base_seed,
                    const std::vector<std::string>& metric_names);

// name, estimate, reference, stderr, pass
void write_report(const std::filesystem::path& path, const std::vector<ReportRow>& rows);

} // namespace h2hinf
