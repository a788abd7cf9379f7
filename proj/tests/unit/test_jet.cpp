#include <doctest.h>

#include <cmath>

#include "gamla/error.hpp"
#include "gamla/geometry.hpp"
#include "gamla/jet.hpp"
#include "gamla/nn.hpp"

using namespace gamla;

namespace {

template <class T>
T expr(const std::vector<T>& x) {
    using std::cos;
    using std::sin;
    using std::tanh;
    return tanh(x[0] * x[1]) + sin(x[2]) * x[0] - cos(x[1]) * 2.0 + 0.5;
}

double expr_value(const Eigen::Vector3d& p) { return expr(std::vector<double>{p(0), p(1), p(2)}); }

} // namespace

TEST_CASE("seeding") {
    const Jet c = Jet::constant(2.5, 3, 2);
    CHECK(c.value() == 2.5);
    CHECK(c.gradient().isZero());
    CHECK(c.hessian().isZero());
    const Jet v = Jet::variable(-1.0, 1, 3, 1);
    CHECK(v.gradient() == Eigen::Vector3d(0, 1, 0));
    CHECK(v.hessian().size() == 0);
    CHECK_THROWS_AS(Jet::constant(0, 2, 3), ContractError);
}

TEST_CASE("product and chain rules against closed forms") {
    const Eigen::Vector2d p(0.3, -0.7);
    const std::vector<Jet> x = Jet::variables(p, 2);
    const Jet f = tanh(x[0] * x[1]);
    const double u = p(0) * p(1);
    const double s = 1.0 - std::tanh(u) * std::tanh(u); // sech^2
    CHECK(f.value() == doctest::Approx(std::tanh(u)).epsilon(1e-15));
    CHECK(f.gradient()(0) == doctest::Approx(s * p(1)).epsilon(1e-14));
    CHECK(f.gradient()(1) == doctest::Approx(s * p(0)).epsilon(1e-14));
    const double d2 = -2.0 * std::tanh(u) * s;
    CHECK(f.hessian()(0, 0) == doctest::Approx(d2 * p(1) * p(1)).epsilon(1e-13));
    CHECK(f.hessian()(0, 1) == doctest::Approx(d2 * p(0) * p(1) + s).epsilon(1e-13));
    CHECK(f.hessian()(1, 0) == f.hessian()(0, 1));
    CHECK(f.hessian()(1, 1) == doctest::Approx(d2 * p(0) * p(0)).epsilon(1e-13));
}

TEST_CASE("mixed expression against finite differences") {
    const Eigen::Vector3d p(0.4, -0.2, 1.1);
    const Jet f = expr(Jet::variables(p, 2));
    CHECK(f.value() == doctest::Approx(expr_value(p)).epsilon(1e-15));
    const double h = 1e-5;
    for (int i = 0; i < 3; ++i) {
        const Eigen::Vector3d e = Eigen::Vector3d::Unit(i) * h;
        const double fd = (expr_value(p + e) - expr_value(p - e)) / (2 * h);
        CHECK(f.gradient()(i) == doctest::Approx(fd).epsilon(1e-8));
        for (int j = 0; j < 3; ++j) {
            const Eigen::Vector3d d = Eigen::Vector3d::Unit(j) * h;
            const double fd2 = (expr_value(p + e + d) - expr_value(p + e - d) - expr_value(p - e + d) +
                                expr_value(p - e - d)) / (4 * h * h);
            CHECK(std::abs(f.hessian()(i, j) - fd2) < 1e-5);
        }
    }
}

TEST_CASE("affine accumulates bias first") {
    const std::vector<Jet> x = Jet::variables(Eigen::Vector2d(1.0, 2.0), 1);
    const std::vector<double> w{3.0, -1.0};
    const Jet y = affine(w, x, 0.25);
    CHECK(y.value() == 1.25);
    CHECK(y.gradient() == Eigen::Vector2d(3.0, -1.0));
}

TEST_CASE("network jets match the network forward pass and finite differences") {
    const MlpNetwork net = MlpNetwork::glorot({3, 5, 4, 2}, {Activation::Tanh, Activation::Tanh, Activation::Identity}, 17);
    const Eigen::Vector3d p(0.2, -0.5, 0.9);
    const std::vector<Jet> y = forward_jets(net, 3, 0, 2, Jet::variables(p, 2));
    const Eigen::VectorXd ref = net.forward(p);
    REQUIRE(y.size() == 2);
    const double h = 1e-5;
    for (int k = 0; k < 2; ++k) {
        CHECK(y[static_cast<std::size_t>(k)].value() == ref(k));
        for (int i = 0; i < 3; ++i) {
            const Eigen::Vector3d e = Eigen::Vector3d::Unit(i) * h;
            const double fd = (net.forward(p + e)(k) - net.forward(p - e)(k)) / (2 * h);
            CHECK(y[static_cast<std::size_t>(k)].gradient()(i) == doctest::Approx(fd).epsilon(1e-8));
        }
    }

    // a head stopping at an inner layer keeps the selected rows of that layer
    const std::vector<Jet> inner = forward_jets(net, 2, 1, 3, Jet::variables(p, 1));
    const Eigen::MatrixXd mid = net.forward_range(p.transpose(), 0, 2);
    CHECK(inner.size() == 2);
    CHECK(inner[0].value() == mid(0, 1));
    CHECK(inner[1].value() == mid(0, 2));
}
