#include "h2hinf/scenario.hpp"

#include <fstream>
#include <sstream>

namespace h2hinf {

namespace {

using nlohmann::json;

// Scalar -> 1x1, flat array -> column vector, array of arrays -> row-major matrix.
Eigen::MatrixXd parse_matrix(const json& value, const std::string& field) {
    const auto fail = [&](const std::string& why) { throw ScenarioParseError("field '" + field + "': " + why); };
    if (value.is_number())
        return Eigen::MatrixXd::Constant(1, 1, value.get<double>());
    if (!value.is_array())
        fail("expected a number or array");
    if (value.empty())
        return Eigen::MatrixXd(0, 0);
    if (value.front().is_number()) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(value.size()), 1);
        for (std::size_t i = 0; i < value.size(); ++i) {
            if (!value[i].is_number())
                fail("mixed numbers and arrays");
            m(static_cast<Eigen::Index>(i), 0) = value[i].get<double>();
        }
        return m;
    }
    const std::size_t rows = value.size();
    const std::size_t cols = value.front().is_array() ? value.front().size() : 0;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        const auto& row = value[i];
        if (!row.is_array())
            fail("row " + std::to_string(i) + " is not an array");
        if (row.size() != cols)
            fail("ragged rows (row " + std::to_string(i) + " has " + std::to_string(row.size()) + " entries, expected " +
                 std::to_string(cols) + ")");
        for (std::size_t j = 0; j < cols; ++j) {
            if (!row[j].is_number())
                fail("non-numeric entry at (" + std::to_string(i) + "," + std::to_string(j) + ")");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j].get<double>();
        }
    }
    return m;
}

Eigen::MatrixXd required(const json& doc, const char* key) {
    if (!doc.contains(key))
        throw ScenarioParseError(std::string("missing required field '") + key + "'");
    return parse_matrix(doc.at(key), key);
}

Eigen::VectorXd as_vector(const Eigen::MatrixXd& m, const std::string& field, Eigen::Index n) {
    if (m.cols() == 1 && m.rows() == n)
        return m.col(0);
    if (m.rows() == 1 && m.cols() == n)
        return m.row(0).transpose();
    std::ostringstream os;
    os << field << ": expected a vector of length " << n << ", got " << m.rows() << "x" << m.cols();
    throw DimensionError(field, os.str());
}

json matrix_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_json(const Eigen::MatrixXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        out.push_back(v(i));
    return out;
}

const Eigen::MatrixXd& constant_value(const MatrixSignal& s, const char* field) {
    if (!s.is_constant())
        throw ScenarioError(std::string("field '") + field + "': sampled signals cannot be written to a scenario file");
    return s.at_node(0);
}

DisturbancePolicy parse_disturbance(const json& value, Eigen::Index m) {
    if (!value.is_array() || value.empty())
        throw ScenarioParseError("field 'disturbance': expected a non-empty array of segments");
    std::vector<DisturbanceSegment> segments;
    for (std::size_t i = 0; i < value.size(); ++i) {
        const json& seg = value[i];
        const std::string where = "disturbance[" + std::to_string(i) + "]";
        if (!seg.is_object() || !seg.contains("from") || !seg.contains("to") || !seg.contains("mode") ||
            !seg.at("from").is_number() || !seg.at("to").is_number() || !seg.at("mode").is_string())
            throw ScenarioParseError("field '" + where + "': needs numeric 'from', 'to' and a string 'mode'");
        DisturbanceSegment out;
        out.start = seg.at("from").get<double>();
        out.end = seg.at("to").get<double>();
        const std::string mode = seg.at("mode").get<std::string>();
        if (mode == "zero") {
            out.mode = DisturbanceMode::Zero;
        } else if (mode == "worst-case") {
            out.mode = DisturbanceMode::WorstCase;
        } else if (mode == "constant") {
            out.mode = DisturbanceMode::Constant;
            if (!seg.contains("value"))
                throw ScenarioParseError("field '" + where + "': constant mode needs 'value'");
            out.value = as_vector(parse_matrix(seg.at("value"), where + ".value"), where + ".value", m);
        } else {
            throw ScenarioParseError("field '" + where + "': unknown mode '" + mode + "'");
        }
        segments.push_back(std::move(out));
    }
    try {
        return DisturbancePolicy(std::move(segments));
    } catch (const std::invalid_argument& e) {
        throw ScenarioParseError(std::string("field 'disturbance': ") + e.what());
    }
}

json disturbance_json(const DisturbancePolicy& policy) {
    json out = json::array();
    for (const auto& s : policy.segments()) {
        json seg;
        seg["from"] = s.start;
        seg["to"] = s.end;
        switch (s.mode) {
        case DisturbanceMode::Zero:
            seg["mode"] = "zero";
            break;
        case DisturbanceMode::WorstCase:
            seg["mode"] = "worst-case";
            break;
        case DisturbanceMode::Constant:
            seg["mode"] = "constant";
            seg["value"] = vector_json(s.value);
            break;
        }
        out.push_back(std::move(seg));
    }
    return out;
}

} // namespace

Scenario parse_scenario(const json& doc) {
    if (!doc.is_object())
        throw ScenarioParseError("scenario must be a JSON object");
    for (const char* key : {"horizon", "steps", "gamma"})
        if (!doc.contains(key) || !doc.at(key).is_number())
            throw ScenarioParseError(std::string("missing or non-numeric field '") + key + "'");

    const double horizon = doc.at("horizon").get<double>();
    const auto steps_value = doc.at("steps");
    if (!steps_value.is_number_integer() || steps_value.get<long long>() < 1)
        throw ScenarioParseError("field 'steps' must be a positive integer");
    std::optional<TimeGrid> grid;
    try {
        grid.emplace(horizon, static_cast<std::size_t>(steps_value.get<long long>()));
    } catch (const std::invalid_argument& e) {
        throw ScenarioParseError(e.what());
    }

    const Eigen::MatrixXd A = required(doc, "A");
    const Eigen::Index n = A.rows();
    const Eigen::MatrixXd E = required(doc, "E");
    const Eigen::Index r = E.rows();

    SystemModel model;
    model.gamma = doc.at("gamma").get<double>();
    model.A = MatrixSignal::constant(A);
    model.B1 = MatrixSignal::constant(required(doc, "B1"));
    model.B2 = MatrixSignal::constant(required(doc, "B2"));
    model.C = MatrixSignal::constant(required(doc, "C"));
    model.E = MatrixSignal::constant(E);
    model.F = MatrixSignal::constant(required(doc, "F"));
    model.Q = MatrixSignal::constant(required(doc, "Q"));
    model.N1 = MatrixSignal::constant(required(doc, "N1"));

    if (doc.contains("D")) {
        Eigen::MatrixXd D = parse_matrix(doc.at("D"), "D");
        if (D.size() == 0)
            D.resize(n, 0);
        model.D = MatrixSignal::constant(D);
    } else {
        model.D = MatrixSignal::zeros(n, 0);
    }
    model.b = MatrixSignal::constant(doc.contains("b") ? as_vector(parse_matrix(doc.at("b"), "b"), "b", n)
                                                       : Eigen::VectorXd::Zero(n));
    model.beta = MatrixSignal::constant(doc.contains("beta") ? as_vector(parse_matrix(doc.at("beta"), "beta"), "beta", r)
                                                             : Eigen::VectorXd::Zero(r));
    model.x0 = as_vector(required(doc, "x0"), "x0", n);
    model.xhat0 = doc.contains("xhat0") ? as_vector(parse_matrix(doc.at("xhat0"), "xhat0"), "xhat0", n) : model.x0;
    if (doc.contains("Sigma0")) {
        model.Sigma0 = parse_matrix(doc.at("Sigma0"), "Sigma0");
        if (n == 0 && model.Sigma0.size() == 0)
            model.Sigma0.resize(0, 0);
    } else {
        model.Sigma0 = Eigen::MatrixXd::Zero(n, n);
    }

    const auto errors = dimension_errors(model);
    if (!errors.empty()) {
        const std::string field = errors.front().substr(0, errors.front().find(':'));
        throw DimensionError(field, "dimension mismatch: " + errors.front());
    }
    std::optional<DisturbancePolicy> disturbance;
    if (doc.contains("disturbance"))
        disturbance = parse_disturbance(doc.at("disturbance"), model.dims().m);
    return Scenario{std::move(model), *grid, std::move(disturbance)};
}

Scenario read_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw std::filesystem::filesystem_error("cannot open scenario file", path,
                                                std::make_error_code(std::errc::no_such_file_or_directory));
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ScenarioParseError(path.string() + ": " + e.what());
    }
    return parse_scenario(doc);
}

Scenario load_scenario(const std::filesystem::path& path) {
    Scenario scenario = read_scenario(path);
    const ValidationReport report = validate(scenario.model, scenario.grid);
    if (const CheckResult* failure = report.first_failure())
        throw AssumptionError(*failure, "assumption violated: " + failure->name +
                                            (failure->detail.empty() ? "" : " (" + failure->detail + ")"));
    return scenario;
}

json to_json(const Scenario& scenario) {
    const auto& m = scenario.model;
    json doc;
    doc["horizon"] = scenario.grid.horizon();
    doc["steps"] = scenario.grid.steps();
    doc["gamma"] = m.gamma;
    doc["A"] = matrix_json(constant_value(m.A, "A"));
    doc["B1"] = matrix_json(constant_value(m.B1, "B1"));
    doc["B2"] = matrix_json(constant_value(m.B2, "B2"));
    doc["C"] = matrix_json(constant_value(m.C, "C"));
    doc["D"] = matrix_json(constant_value(m.D, "D"));
    doc["b"] = vector_json(constant_value(m.b, "b"));
    doc["E"] = matrix_json(constant_value(m.E, "E"));
    doc["F"] = matrix_json(constant_value(m.F, "F"));
    doc["beta"] = vector_json(constant_value(m.beta, "beta"));
    doc["Q"] = matrix_json(constant_value(m.Q, "Q"));
    doc["N1"] = matrix_json(constant_value(m.N1, "N1"));
    doc["x0"] = vector_json(m.x0);
    doc["xhat0"] = vector_json(m.xhat0);
    doc["Sigma0"] = matrix_json(m.Sigma0);
    if (scenario.disturbance)
        doc["disturbance"] = disturbance_json(*scenario.disturbance);
    return doc;
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw std::filesystem::filesystem_error("cannot write scenario file", path,
                                                std::make_error_code(std::errc::permission_denied));
    out << to_json(scenario).dump(2) << '\n';
}

} // namespace h2hinf
