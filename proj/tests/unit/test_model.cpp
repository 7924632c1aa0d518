#include "doctest.h"

#include "support.hpp"

using namespace h2hinf;
using testing::Scalar;

TEST_CASE("well-posed scalar model validates") {
    Scalar s;
    s.b1 = 1.0;
    s.b2 = 1.0;
    const auto report = validate(s.model(), TimeGrid(1.0, 10));
    CHECK(report.passed());
    CHECK(report.first_failure() == nullptr);
    for (const char* name : {"grid", "dimensions", "finite", "gamma-positive", "F-invertible", "N1-orthonormal",
                             "Sigma0-psd"})
        CHECK(report.find(name) != nullptr);
}

TEST_CASE("dimension mismatch is named by field") {
    auto m = Scalar{}.model();
    m.B2 = MatrixSignal::constant(Eigen::MatrixXd::Zero(2, 1));
    const auto errors = dimension_errors(m);
    REQUIRE(errors.size() == 1);
    CHECK(errors[0].rfind("B2:", 0) == 0);
    const auto report = validate(m, TimeGrid(1.0, 10));
    CHECK_FALSE(report.passed());
    CHECK(report.first_failure()->name == "dimensions");
}

TEST_CASE("singular F fails the invertibility check") {
    Scalar s;
    s.f = 0.0;
    const auto report = validate(s.model(), TimeGrid(1.0, 10));
    CHECK(report.first_failure()->name == "F-invertible");
}

TEST_CASE("N1 = 2I has orthonormality residual 3") {
    auto m = Scalar{}.model();
    m.N1 = MatrixSignal::constant(2.0 * Eigen::MatrixXd::Identity(1, 1));
    const auto report = validate(m, TimeGrid(1.0, 10));
    const CheckResult* c = report.find("N1-orthonormal");
    REQUIRE(c != nullptr);
    CHECK_FALSE(c->passed);
    CHECK(c->worst_value == doctest::Approx(3.0));
}

TEST_CASE("indefinite Sigma0 and nonpositive gamma are rejected") {
    Scalar s;
    s.sigma0 = -0.5;
    CHECK(validate(s.model(), TimeGrid(1.0, 10)).first_failure()->name == "Sigma0-psd");
    Scalar g;
    g.gamma = 0.0;
    CHECK(validate(g.model(), TimeGrid(1.0, 10)).first_failure()->name == "gamma-positive");
}

TEST_CASE("NaN coefficients fail the finite check") {
    auto m = Scalar{}.model();
    m.A = MatrixSignal::constant(testing::mat(std::nan("")));
    const auto report = validate(m, TimeGrid(1.0, 10));
    CHECK_FALSE(report.find("finite")->passed);
}

TEST_CASE("dims come from the coefficient shapes") {
    const auto sc = testing::uav();
    const auto d = sc.model.dims();
    CHECK(d.n == 4);
    CHECK(d.m == 2);
    CHECK(d.s == 2);
    CHECK(d.r == 2);
    CHECK(d.p == 0);
}
