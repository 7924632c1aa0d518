#include "doctest.h"

#include <stdexcept>

#include "h2hinf/matrix_signal.hpp"
#include "h2hinf/time_grid.hpp"

using namespace h2hinf;

TEST_CASE("grid nodes and spacing") {
    const TimeGrid g(20.0, 2000);
    CHECK(g.nodes() == 2001);
    CHECK(g.step() == doctest::Approx(0.01));
    CHECK(g.time(0) == 0.0);
    CHECK(g.time(2000) == 20.0);
    CHECK(g.time(100) == doctest::Approx(1.0));
}

TEST_CASE("grid rejects bad horizons and step counts") {
    CHECK_THROWS_AS(TimeGrid(0.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(-1.0, 10), std::invalid_argument);
    CHECK_THROWS_AS(TimeGrid(1.0, 0), std::invalid_argument);
}

TEST_CASE("left node lookup") {
    const TimeGrid g(1.0, 10);
    CHECK(g.left_node(0.0) == 0);
    CHECK(g.left_node(0.15) == 1);
    CHECK(g.left_node(0.3) == 3);
    CHECK(g.left_node(1.0) == 10);
    CHECK(g.left_node(5.0) == 10);
    CHECK(g.left_node(-1.0) == 0);
}

TEST_CASE("refined grid keeps the horizon") {
    const TimeGrid g(2.0, 8);
    const TimeGrid f = g.refined(4);
    CHECK(f.steps() == 32);
    CHECK(f.horizon() == 2.0);
    CHECK(f.time(4) == doctest::Approx(g.time(1)));
}

TEST_CASE("constant signal") {
    const auto s = MatrixSignal::constant(Eigen::MatrixXd::Identity(2, 2));
    CHECK(s.is_constant());
    CHECK(s.at(0.7).isIdentity());
    CHECK(s.interpolate(0.3).isIdentity());
    CHECK(s.max_norm() == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("sampled signal holds left values and interpolates linearly") {
    const TimeGrid g(1.0, 4);
    const auto s = MatrixSignal::generate(g, [&](std::size_t k) {
        return Eigen::MatrixXd::Constant(1, 1, static_cast<double>(k));
    });
    CHECK(s.samples() == 5);
    CHECK(s.at(0.3)(0, 0) == 1.0);
    CHECK(s.interpolate(0.375)(0, 0) == doctest::Approx(1.5));
    CHECK(s.interpolate(1.0)(0, 0) == doctest::Approx(4.0));
}

TEST_CASE("sampled signal validates count and shape") {
    const TimeGrid g(1.0, 2);
    std::vector<Eigen::MatrixXd> two(2, Eigen::MatrixXd::Zero(1, 1));
    CHECK_THROWS_AS(MatrixSignal::sampled(g, two), std::invalid_argument);
    std::vector<Eigen::MatrixXd> ragged{Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(2, 1),
                                        Eigen::MatrixXd::Zero(1, 1)};
    CHECK_THROWS_AS(MatrixSignal::sampled(g, ragged), std::invalid_argument);
}

TEST_CASE("max_distance between signals") {
    const TimeGrid g(1.0, 2);
    const auto a = MatrixSignal::constant(Eigen::MatrixXd::Zero(1, 1));
    const auto b = MatrixSignal::generate(g, [](std::size_t k) { return Eigen::MatrixXd::Constant(1, 1, 0.5 * k); });
    CHECK(max_distance(a, b, g) == doctest::Approx(1.0));
}
