#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "h2hinf/model.hpp"
#include "h2hinf/scenario.hpp"

namespace testing {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd mat(double v) { return MatrixXd::Constant(1, 1, v); }

// dx = (a x + b1 v + b2 u) dt + c dW + d dW~,  dy = e x dt + f dW,  z = [q x; u]
struct Scalar {
    double a = 0.0, b1 = 0.0, b2 = 0.0, c = 0.0, d = 0.0, e = 1.0, f = 1.0, q = 1.0;
    double drift = 0.0, bias = 0.0, x0 = 0.0, sigma0 = 0.0, gamma = 1.0;

    [[nodiscard]] h2hinf::SystemModel model() const {
        using h2hinf::MatrixSignal;
        h2hinf::SystemModel m;
        m.A = MatrixSignal::constant(mat(a));
        m.B1 = MatrixSignal::constant(mat(b1));
        m.B2 = MatrixSignal::constant(mat(b2));
        m.C = MatrixSignal::constant(mat(c));
        m.D = d != 0.0 ? MatrixSignal::constant(mat(d)) : MatrixSignal::zeros(1, 0);
        m.b = MatrixSignal::constant(mat(drift));
        m.E = MatrixSignal::constant(mat(e));
        m.F = MatrixSignal::constant(mat(f));
        m.beta = MatrixSignal::constant(mat(bias));
        m.Q = MatrixSignal::constant(mat(q));
        m.N1 = MatrixSignal::constant(mat(1.0));
        m.gamma = gamma;
        m.x0 = VectorXd::Constant(1, x0);
        m.xhat0 = m.x0;
        m.Sigma0 = mat(sigma0);
        return m;
    }
};

inline std::string scenario_path(const std::string& name) {
    return std::string(H2HINF_SCENARIO_DIR) + "/" + name;
}

inline h2hinf::Scenario uav() { return h2hinf::load_scenario(scenario_path("uav.json")); }

// Classical RK4 on a scalar pair, written out independently of the library integrator.
template <class F>
void rk4_pair_backward(F&& f, double T, int steps, double& y1, double& y2) {
    const double h = T / steps;
    y1 = 0.0;
    y2 = 0.0;
    for (int i = steps; i > 0; --i) {
        const double t = i * h;
        double a1, a2, b1, b2, c1, c2, d1, d2;
        f(t, y1, y2, a1, a2);
        f(t - h / 2, y1 - h / 2 * a1, y2 - h / 2 * a2, b1, b2);
        f(t - h / 2, y1 - h / 2 * b1, y2 - h / 2 * b2, c1, c2);
        f(t - h, y1 - h * c1, y2 - h * c2, d1, d2);
        y1 -= h / 6 * (a1 + 2 * b1 + 2 * c1 + d1);
        y2 -= h / 6 * (a2 + 2 * b2 + 2 * c2 + d2);
    }
}

} // namespace testing
