#include "h2hinf/model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace h2hinf {

Dimensions SystemModel::dims() const {
    return Dimensions{A.rows(), B1.cols(), B2.cols(), E.rows(), D.cols()};
}

Eigen::MatrixXd symmetric_part(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

namespace {

struct Shape {
    const char* field;
    Eigen::Index rows, cols;
    Eigen::Index want_rows, want_cols;
};

std::string shape_error(const Shape& s) {
    std::ostringstream os;
    os << s.field << ": expected " << s.want_rows << "x" << s.want_cols << ", got " << s.rows << "x" << s.cols;
    return os.str();
}

bool all_finite(const MatrixSignal& sig) {
    for (std::size_t k = 0; k < sig.samples(); ++k)
        if (!sig.at_node(k).allFinite())
            return false;
    return true;
}

} // namespace

std::vector<std::string> dimension_errors(const SystemModel& model) {
    const auto d = model.dims();
    const Shape shapes[] = {
        {"A", model.A.rows(), model.A.cols(), d.n, d.n},
        {"B1", model.B1.rows(), model.B1.cols(), d.n, d.m},
        {"B2", model.B2.rows(), model.B2.cols(), d.n, d.s},
        {"C", model.C.rows(), model.C.cols(), d.n, d.r},
        {"D", model.D.rows(), model.D.cols(), d.n, d.p},
        {"b", model.b.rows(), model.b.cols(), d.n, 1},
        {"E", model.E.rows(), model.E.cols(), d.r, d.n},
        {"F", model.F.rows(), model.F.cols(), d.r, d.r},
        {"beta", model.beta.rows(), model.beta.cols(), d.r, 1},
        {"Q", model.Q.rows(), model.Q.cols(), d.n, d.n},
        {"N1", model.N1.rows(), model.N1.cols(), d.s, d.s},
        {"x0", model.x0.rows(), model.x0.cols(), d.n, 1},
        {"xhat0", model.xhat0.rows(), model.xhat0.cols(), d.n, 1},
        {"Sigma0", model.Sigma0.rows(), model.Sigma0.cols(), d.n, d.n},
    };
    std::vector<std::string> errors;
    for (const auto& s : shapes)
        if (s.rows != s.want_rows || s.cols != s.want_cols)
            errors.push_back(shape_error(s));
    return errors;
}

bool ValidationReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

const CheckResult* ValidationReport::first_failure() const {
    for (const auto& c : checks)
        if (!c.passed)
            return &c;
    return nullptr;
}

const CheckResult* ValidationReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name)
            return &c;
    return nullptr;
}

ValidationReport validate(const SystemModel& model, const TimeGrid& grid, const ValidationOptions& opts) {
    ValidationReport report;

    {
        CheckResult c;
        c.name = "grid";
        c.worst_value = grid.step();
        c.passed = grid.step() > 0.0 && grid.time(grid.steps()) == grid.horizon();
        report.checks.push_back(c);
    }

    const auto dim_errors = dimension_errors(model);
    {
        CheckResult c;
        c.name = "dimensions";
        c.passed = dim_errors.empty();
        c.worst_value = static_cast<double>(dim_errors.size());
        for (const auto& e : dim_errors)
            c.detail += (c.detail.empty() ? "" : "; ") + e;
        report.checks.push_back(c);
    }

    const MatrixSignal* signals[] = {&model.A, &model.B1, &model.B2, &model.C, &model.D, &model.b,
                                     &model.E, &model.F,  &model.beta, &model.Q, &model.N1};
    {
        CheckResult c;
        c.name = "sampled-alignment";
        for (const auto* s : signals)
            if (!s->is_constant() && s->samples() != grid.nodes()) {
                c.passed = false;
                c.detail = "sampled coefficient has " + std::to_string(s->samples()) + " samples, grid has " +
                           std::to_string(grid.nodes()) + " nodes";
            }
        report.checks.push_back(c);
    }
    {
        CheckResult c;
        c.name = "finite";
        for (const auto* s : signals)
            c.passed = c.passed && all_finite(*s);
        c.passed = c.passed && model.x0.allFinite() && model.xhat0.allFinite() && model.Sigma0.allFinite();
        report.checks.push_back(c);
    }
    {
        CheckResult c;
        c.name = "gamma-positive";
        c.worst_value = model.gamma;
        c.passed = model.gamma > 0.0 && std::isfinite(model.gamma);
        report.checks.push_back(c);
    }

    // The remaining checks need consistent shapes.
    const bool shapes_ok = dim_errors.empty() && report.find("sampled-alignment")->passed;
    const auto node_count = [&](const MatrixSignal& s) { return s.is_constant() ? std::size_t{1} : grid.nodes(); };

    {
        CheckResult c;
        c.name = "F-invertible";
        c.passed = shapes_ok;
        if (shapes_ok) {
            for (std::size_t k = 0; k < node_count(model.F); ++k) {
                const Eigen::MatrixXd& F = model.F.at_node(k);
                double cond = std::numeric_limits<double>::infinity();
                if (F.size() > 0) {
                    Eigen::JacobiSVD<Eigen::MatrixXd> svd(F);
                    const auto& sv = svd.singularValues();
                    const double smin = sv(sv.size() - 1);
                    if (smin > 0.0)
                        cond = sv(0) / smin;
                } else {
                    cond = 1.0;
                }
                if (!c.worst_node || cond > c.worst_value) {
                    c.worst_value = cond;
                    c.worst_node = k;
                }
            }
            c.passed = c.worst_value < opts.max_condition_F;
            if (!c.passed)
                c.detail = "observation noise F singular or ill-conditioned (cond " + std::to_string(c.worst_value) +
                           ") at node " + std::to_string(*c.worst_node);
        } else {
            c.detail = "skipped: inconsistent dimensions";
        }
        report.checks.push_back(c);
    }
    {
        CheckResult c;
        c.name = "N1-orthonormal";
        c.passed = shapes_ok;
        if (shapes_ok) {
            for (std::size_t k = 0; k < node_count(model.N1); ++k) {
                const Eigen::MatrixXd& N1 = model.N1.at_node(k);
                const Eigen::MatrixXd residual = N1.transpose() * N1 - Eigen::MatrixXd::Identity(N1.cols(), N1.cols());
                const double r = residual.size() ? residual.cwiseAbs().maxCoeff() : 0.0;
                if (!c.worst_node || r > c.worst_value) {
                    c.worst_value = r;
                    c.worst_node = k;
                }
            }
            c.passed = c.worst_value <= opts.orthonormal_tol;
            if (!c.passed)
                c.detail = "N1^T N1 != I (max residual " + std::to_string(c.worst_value) + ") at node " +
                           std::to_string(*c.worst_node);
        } else {
            c.detail = "skipped: inconsistent dimensions";
        }
        report.checks.push_back(c);
    }
    {
        CheckResult c;
        c.name = "Sigma0-psd";
        c.passed = shapes_ok;
        if (shapes_ok && model.Sigma0.size() > 0) {
            const double asym = (model.Sigma0 - model.Sigma0.transpose()).cwiseAbs().maxCoeff();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(symmetric_part(model.Sigma0));
            const double min_eig = eig.eigenvalues().minCoeff();
            c.worst_value = min_eig;
            c.passed = asym <= opts.psd_tol && min_eig >= -opts.psd_tol;
            if (!c.passed)
                c.detail = "Sigma0 not symmetric PSD (min eigenvalue " + std::to_string(min_eig) + ", asymmetry " +
                           std::to_string(asym) + ")";
        }
        report.checks.push_back(c);
    }
    return report;
}

} // namespace h2hinf
