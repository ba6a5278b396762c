#include <doctest.h>

#include <random>

#include "xva/errors.hpp"
#include "xva/regression.hpp"

using namespace xva;

namespace {
Eigen::MatrixXd uniform_features(int n, int cols, unsigned seed) {
    std::mt19937_64 g(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Eigen::MatrixXd f(n, cols);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < cols; ++j) f(i, j) = u(g);
    return f;
}
}  // namespace

TEST_CASE("polynomial design size") {
    const auto f = uniform_features(50, 2, 1);
    CHECK(polynomial_design(f, 0).cols() == 1);
    CHECK(polynomial_design(f, 1).cols() == 3);
    CHECK(polynomial_design(f, 3).cols() == 10);
    // constant columns are dropped
    Eigen::MatrixXd c = f;
    c.col(1).setConstant(4.0);
    CHECK(polynomial_design(c, 2).cols() == 3);
}

TEST_CASE("projection reproduces polynomials") {
    const auto f = uniform_features(400, 1, 2);
    Eigen::VectorXd y = 1.0 + 2.0 * f.col(0).array() - 0.5 * f.col(0).array().cube();
    RegressionBasis b;
    Projector p(f, Eigen::MatrixXd(400, 0), b, 0);
    CHECK((p.fit(y) - y).cwiseAbs().maxCoeff() < 1e-9);
    // constants are reproduced exactly
    Eigen::VectorXd k = Eigen::VectorXd::Constant(400, 3.25);
    CHECK((p.fit(k) - k).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("extras enter linearly") {
    const auto f = uniform_features(300, 1, 3);
    const auto e = uniform_features(300, 1, 4);
    Eigen::VectorXd y = f.col(0).array().square() + 7.0 * e.col(0).array();
    RegressionBasis b;
    b.degree = 2;
    Projector p(f, e, b, 0);
    CHECK((p.fit(y) - y).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("collinear columns are tolerated") {
    auto f = uniform_features(200, 1, 5);
    Eigen::MatrixXd e(200, 1);
    e.col(0) = 2.0 * f.col(0).array() + 1.0;
    RegressionBasis b;
    Projector p(f, e, b, 3);
    CHECK(p.rank() < p.n_functions());
    Eigen::VectorXd y = f.col(0);
    CHECK((p.fit(y) - y).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("bundled regression is piecewise") {
    const auto f = uniform_features(4000, 1, 6);
    Eigen::VectorXd y = f.col(0).array().abs();  // kink at 0, linear on each side
    RegressionBasis b;
    b.bundles = 2;
    Projector p(f, Eigen::MatrixXd(4000, 0), b, 0);
    CHECK(p.n_bundles() == 2);
    // the split falls near 0, so each piece is nearly linear
    CHECK((p.fit(y) - y).cwiseAbs().mean() < 0.02);
}

TEST_CASE("regression errors name the slice") {
    RegressionBasis b;
    b.degree = 3;
    const auto f = uniform_features(3, 1, 7);
    try {
        Projector p(f, Eigen::MatrixXd(3, 0), b, 17);
        FAIL("expected a degeneracy error");
    } catch (const DegeneracyError& e) {
        CHECK(std::string(e.what()).find("17") != std::string::npos);
    }
    Eigen::MatrixXd bad = uniform_features(20, 1, 8);
    bad(3, 0) = std::nan("");
    CHECK_THROWS_AS(Projector(bad, Eigen::MatrixXd(20, 0), b, 1), DegeneracyError);
    b.bundles = 10;
    CHECK_THROWS_AS(Projector(uniform_features(20, 1, 9), Eigen::MatrixXd(20, 0), b, 1), DegeneracyError);
    b.bundles = 0;
    CHECK_THROWS_AS(Projector(uniform_features(20, 1, 9), Eigen::MatrixXd(20, 0), b, 1), ConfigError);
    b.bundles = 2;
    b.bundle_key = 5;
    CHECK_THROWS_AS(Projector(uniform_features(20, 1, 9), Eigen::MatrixXd(20, 0), b, 1), ConfigError);
    RegressionBasis ok;
    Projector p(uniform_features(20, 1, 9), Eigen::MatrixXd(20, 0), ok, 1);
    CHECK_THROWS_AS(p.fit(Eigen::VectorXd(Eigen::VectorXd::Zero(19))), ArgumentError);
}
