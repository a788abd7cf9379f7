#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace gamla {

/// Second-order truncated Taylor expansion of a scalar function of n
/// variables: value, gradient, and (for order 2) Hessian. Arithmetic follows
/// the exact composition rules, so derivatives are exact up to rounding.
class Jet {
public:
    Jet() = default;

    static Jet constant(double value, std::size_t dim, int order);
    /// The coordinate function x_index evaluated at `value`.
    static Jet variable(double value, std::size_t index, std::size_t dim, int order);
    /// Seeds one jet per coordinate of x.
    static std::vector<Jet> variables(const Eigen::VectorXd& x, int order);

    double value() const { return value_; }
    const Eigen::VectorXd& gradient() const { return gradient_; }
    /// Empty for order-1 jets.
    const Eigen::MatrixXd& hessian() const { return hessian_; }
    int order() const { return order_; }
    std::size_t dim() const { return static_cast<std::size_t>(gradient_.size()); }

    /// Chain rule for a scalar function f with f(v), f'(v), f''(v) given.
    Jet compose(double f, double df, double d2f) const;

    Jet& operator+=(const Jet& other);
    Jet& operator-=(const Jet& other);
    Jet& operator*=(double s);
    Jet& operator+=(double s) { value_ += s; return *this; }
    Jet& operator-=(double s) { value_ -= s; return *this; }
    /// this += s * other
    Jet& add_scaled(double s, const Jet& other);

    friend Jet operator+(Jet a, const Jet& b) { return a += b; }
    friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
    friend Jet operator+(Jet a, double s) { return a += s; }
    friend Jet operator+(double s, Jet a) { return a += s; }
    friend Jet operator-(Jet a, double s) { return a -= s; }
    friend Jet operator-(double s, const Jet& a) { return (a * -1.0) + s; }
    friend Jet operator*(Jet a, double s) { return a *= s; }
    friend Jet operator*(double s, Jet a) { return a *= s; }
    friend Jet operator-(const Jet& a) { return a * -1.0; }
    friend Jet operator*(const Jet& a, const Jet& b);

private:
    double value_ = 0.0;
    Eigen::VectorXd gradient_;
    Eigen::MatrixXd hessian_;
    int order_ = 1;
};

Jet tanh(const Jet& x);
Jet sin(const Jet& x);
Jet cos(const Jet& x);

/// bias + sum_j weights[j] * inputs[j], accumulated in index order.
Jet affine(std::span<const double> weights, std::span<const Jet> inputs, double bias);

} // namespace gamla
