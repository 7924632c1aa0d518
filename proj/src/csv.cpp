#include "h2hinf/csv.hpp"

#include <cstdio>
#include <fstream>

namespace h2hinf {

std::string format_double(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw CsvError("cannot open " + path.string() + " for writing");
    const auto line = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                out << ',';
            out << cells[i];
        }
        out << '\n';
    };
    line(header);
    for (const auto& r : rows)
        line(r);
    if (!out)
        throw CsvError("write to " + path.string() + " failed");
}

namespace {

void add_columns(std::vector<std::string>& header, const std::string& prefix, Eigen::Index count) {
    for (Eigen::Index i = 1; i <= count; ++i)
        header.push_back(prefix + std::to_string(i));
}

void add_matrix_columns(std::vector<std::string>& header, const std::string& prefix, Eigen::Index rows,
                        Eigen::Index cols) {
    for (Eigen::Index i = 1; i <= rows; ++i)
        for (Eigen::Index j = 1; j <= cols; ++j)
            header.push_back(prefix + "_" + std::to_string(i) + std::to_string(j));
}

void append(std::vector<std::string>& row, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(format_double(m(i, j)));
}

} // namespace

void write_trajectory(const std::filesystem::path& path, const SimResult& r, const TimeGrid& grid) {
    std::vector<std::string> header{"t"};
    add_columns(header, "x", r.x.rows());
    add_columns(header, "xhat", r.xhat.rows());
    add_columns(header, "y", r.y.rows());
    add_columns(header, "u", r.u.rows());
    add_columns(header, "v", r.v.rows());
    add_columns(header, "z", r.z.rows());

    std::vector<std::vector<std::string>> rows;
    rows.reserve(grid.nodes());
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        std::vector<std::string> row{format_double(grid.time(k))};
        append(row, r.x.col(kk));
        append(row, r.xhat.col(kk));
        append(row, r.y.col(kk));
        append(row, r.u.col(kk));
        append(row, r.v.col(kk));
        append(row, r.z.col(kk));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

void write_gains(const std::filesystem::path& path, const GainSchedule& g, const TimeGrid& grid) {
    std::vector<std::string> header{"t"};
    add_matrix_columns(header, "U", g.U.rows(), g.U.cols());
    add_columns(header, "U0_", g.U0.rows());
    add_matrix_columns(header, "V", g.V.rows(), g.V.cols());
    add_columns(header, "V0_", g.V0.rows());
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        std::vector<std::string> row{format_double(grid.time(k))};
        append(row, g.U.at_node(k));
        append(row, g.U0.at_node(k));
        append(row, g.V.at_node(k));
        append(row, g.V0.at_node(k));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

void write_riccati(const std::filesystem::path& path, const RiccatiPair& p, const AffinePair& a,
                   const TimeGrid& grid) {
    std::vector<std::string> header{"t"};
    add_matrix_columns(header, "P1", p.P1.rows(), p.P1.cols());
    add_matrix_columns(header, "P2", p.P2.rows(), p.P2.cols());
    add_columns(header, "eta1_", a.eta1.rows());
    add_columns(header, "eta2_", a.eta2.rows());
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < grid.nodes(); ++k) {
        std::vector<std::string> row{format_double(grid.time(k))};
        append(row, p.P1.at_node(k));
        append(row, p.P2.at_node(k));
        append(row, a.eta1.at_node(k));
        append(row, a.eta2.at_node(k));
        rows.push_back(std::move(row));
    }
    write_csv(path, header, rows);
}

void write_ensemble(const std::filesystem::path& path, const Ensemble& ens, std::uint64_t base_seed,
                    const std::vector<std::string>& metric_names) {
    std::vector<std::string> header{"path", "seed"};
    header.insert(header.end(), metric_names.begin(), metric_names.end());
    header.push_back("status");
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < ens.values.size(); ++i) {
        std::vector<std::string> row{std::to_string(i), std::to_string(base_seed + i)};
        const auto& v = ens.values[i];
        for (std::size_t j = 0; j < metric_names.size(); ++j)
            row.push_back(j < v.size() ? format_double(v[j]) : "nan");
        row.push_back(v.empty() ? "failed" : "ok");
        rows.push_back(std::move(row));
    }
    const auto summary = [&](const std::string& label, const std::vector<double>& values) {
        std::vector<std::string> row{label, ""};
        for (std::size_t j = 0; j < metric_names.size(); ++j)
            row.push_back(j < values.size() ? format_double(values[j]) : "nan");
        row.push_back(std::to_string(ens.stats.count) + "/" + std::to_string(ens.values.size()));
        rows.push_back(std::move(row));
    };
    summary("mean", ens.stats.mean);
    summary("stderr", ens.stats.stderr_of_mean);
    write_csv(path, header, rows);
}

void write_report(const std::filesystem::path& path, const std::vector<ReportRow>& rows) {
    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows)
        cells.push_back({r.name, format_double(r.estimate), format_double(r.reference),
                         format_double(r.stderr_of_estimate), r.pass ? "true" : "false"});
    write_csv(path, {"name", "estimate", "reference", "stderr", "pass"}, cells);
}

} // namespace h2hinf
