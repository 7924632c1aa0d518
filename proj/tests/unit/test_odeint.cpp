#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>

#include "h2hinf/odeint.hpp"

using namespace h2hinf;
using Eigen::MatrixXd;

namespace {

MatrixXd scalar(double v) { return MatrixXd::Constant(1, 1, v); }

OdeProblem decay(Direction dir, double boundary) {
    return {[](double, const MatrixXd& m) -> MatrixXd { return -m; }, scalar(boundary), dir};
}

} // namespace

TEST_CASE("forward exponential decay") {
    const TimeGrid g(1.0, 100);
    const MatrixSignal s = integrate(decay(Direction::Forward, 1.0), g);
    CHECK(s.at_node(0)(0, 0) == 1.0);
    CHECK(s.at_node(100)(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
}

TEST_CASE("backward solve is stored in ascending time") {
    const TimeGrid g(1.0, 100);
    const MatrixSignal s = integrate(decay(Direction::Backward, 1.0), g);
    CHECK(s.at_node(100)(0, 0) == 1.0);
    CHECK(s.at_node(0)(0, 0) == doctest::Approx(std::exp(1.0)).epsilon(1e-9));
}

TEST_CASE("RK4 shows fourth-order convergence") {
    const OdeProblem p{[](double t, const MatrixXd& m) -> MatrixXd { return std::cos(t) * m; }, scalar(1.0),
                       Direction::Forward};
    const auto est = convergence_order(p, TimeGrid(2.0, 20), [](double t) { return scalar(std::exp(std::sin(t))); });
    REQUIRE(est.order.has_value());
    CHECK(*est.order > 3.8);
    CHECK(*est.order < 4.3);
    const auto self = convergence_order(p, TimeGrid(2.0, 20));
    REQUIRE(self.order.has_value());
    CHECK(*self.order > 3.7);
}

TEST_CASE("exact integration reports no order") {
    const OdeProblem p{[](double, const MatrixXd&) -> MatrixXd { return scalar(1.0); }, scalar(0.0),
                       Direction::Forward};
    const auto est = convergence_order(p, TimeGrid(1.0, 10), [](double t) { return scalar(t); });
    CHECK(est.error_coarse < 1e-14);
    CHECK_FALSE(est.order.has_value());
}

TEST_CASE("tangent blow-up is a finite escape near pi/2") {
    const OdeProblem p{[](double, const MatrixXd& m) -> MatrixXd { return scalar(1.0) + m * m; }, scalar(0.0),
                       Direction::Forward};
    const TimeGrid g(2.0, 2000);
    try {
        integrate(p, g);
        FAIL("expected FiniteEscape");
    } catch (const FiniteEscape& e) {
        CHECK(e.time() == doctest::Approx(std::numbers::pi / 2).epsilon(2e-3));
        CHECK(e.node() == g.left_node(e.time()));
    }
}

TEST_CASE("NaN from a finite state is NonFinite") {
    const OdeProblem p{[](double t, const MatrixXd& m) -> MatrixXd {
                           return t > 0.5 ? scalar(std::numeric_limits<double>::quiet_NaN()) : m;
                       },
                       scalar(1.0), Direction::Forward};
    CHECK_THROWS_AS(integrate(p, TimeGrid(1.0, 10)), NonFinite);
}

TEST_CASE("symmetrize treats side-by-side blocks separately") {
    const OdeProblem p{[](double, const MatrixXd& m) -> MatrixXd { return MatrixXd::Zero(m.rows(), m.cols()); },
                       (MatrixXd(2, 4) << 1, 2, 5, 6, 0, 1, 8, 5).finished(), Direction::Forward};
    const MatrixSignal s = integrate(p, TimeGrid(1.0, 2), {true, 1e9});
    const MatrixXd& m = s.at_node(2);
    CHECK(m(0, 1) == 1.0);
    CHECK(m(1, 0) == 1.0);
    CHECK(m(0, 3) == 7.0);
    CHECK(m(1, 2) == 7.0);
}

TEST_CASE("centered residual of an exact solution is small") {
    const TimeGrid g(1.0, 1000);
    const MatrixSignal s = integrate(decay(Direction::Forward, 2.0), g);
    const double r = centered_residual(s, g, [&](std::size_t k) -> MatrixXd { return -s.at_node(k); });
    CHECK(r < 1e-5);
    const double wrong = centered_residual(s, g, [&](std::size_t k) -> MatrixXd { return s.at_node(k); });
    CHECK(wrong > 1.0);
}

TEST_CASE("Hermite reconstruction is exact for cubics") {
    const TimeGrid g(1.0, 4);
    const auto f = [](double t) { return t * t * t - 2 * t; };
    const auto df = [](double t) { return 3 * t * t - 2; };
    const auto values = MatrixSignal::generate(g, [&](std::size_t k) { return scalar(f(g.time(k))); });
    const HermiteSignal h(values, g, [&](std::size_t k) { return scalar(df(g.time(k))); });
    for (double t : {0.0, 0.1, 0.37, 0.5, 0.99, 1.0})
        CHECK(h(t)(0, 0) == doctest::Approx(f(t)).epsilon(1e-12));
}
