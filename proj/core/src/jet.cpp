#include "gamla/jet.hpp"

#include <cmath>

#include "gamla/error.hpp"

namespace gamla {

Jet Jet::constant(double value, std::size_t dim, int order) {
    detail::require(order == 1 || order == 2, "jet order must be 1 or 2");
    Jet j;
    j.value_ = value;
    j.order_ = order;
    j.gradient_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    if (order == 2) j.hessian_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    return j;
}

Jet Jet::variable(double value, std::size_t index, std::size_t dim, int order) {
    detail::require(index < dim, "jet variable index out of range");
    Jet j = constant(value, dim, order);
    j.gradient_(static_cast<Eigen::Index>(index)) = 1.0;
    return j;
}

std::vector<Jet> Jet::variables(const Eigen::VectorXd& x, int order) {
    std::vector<Jet> out;
    out.reserve(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i)
        out.push_back(variable(x(i), static_cast<std::size_t>(i), static_cast<std::size_t>(x.size()), order));
    return out;
}

Jet Jet::compose(double f, double df, double d2f) const {
    Jet out;
    out.order_ = order_;
    out.value_ = f;
    out.gradient_ = df * gradient_;
    if (order_ == 2) out.hessian_ = df * hessian_ + d2f * (gradient_ * gradient_.transpose());
    return out;
}

Jet& Jet::operator+=(const Jet& other) {
    detail::require(dim() == other.dim() && order_ == other.order_, "jet shape mismatch");
    value_ += other.value_;
    gradient_ += other.gradient_;
    if (order_ == 2) hessian_ += other.hessian_;
    return *this;
}

Jet& Jet::operator-=(const Jet& other) {
    detail::require(dim() == other.dim() && order_ == other.order_, "jet shape mismatch");
    value_ -= other.value_;
    gradient_ -= other.gradient_;
    if (order_ == 2) hessian_ -= other.hessian_;
    return *this;
}

Jet& Jet::operator*=(double s) {
    value_ *= s;
    gradient_ *= s;
    if (order_ == 2) hessian_ *= s;
    return *this;
}

Jet& Jet::add_scaled(double s, const Jet& other) {
    detail::require(dim() == other.dim() && order_ == other.order_, "jet shape mismatch");
    value_ += s * other.value_;
    gradient_ += s * other.gradient_;
    if (order_ == 2) hessian_ += s * other.hessian_;
    return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
    detail::require(a.dim() == b.dim() && a.order() == b.order(), "jet shape mismatch");
    Jet out;
    out.order_ = a.order_;
    out.value_ = a.value_ * b.value_;
    out.gradient_ = a.value_ * b.gradient_ + b.value_ * a.gradient_;
    if (a.order_ == 2) {
        const Eigen::MatrixXd cross = a.gradient_ * b.gradient_.transpose();
        out.hessian_ = a.value_ * b.hessian_ + b.value_ * a.hessian_ + cross + cross.transpose();
    }
    return out;
}

Jet tanh(const Jet& x) {
    const double t = std::tanh(x.value());
    const double dt = 1.0 - t * t;
    return x.compose(t, dt, -2.0 * t * dt);
}

Jet sin(const Jet& x) {
    const double s = std::sin(x.value());
    return x.compose(s, std::cos(x.value()), -s);
}

Jet cos(const Jet& x) {
    const double c = std::cos(x.value());
    return x.compose(c, -std::sin(x.value()), -c);
}

Jet affine(std::span<const double> weights, std::span<const Jet> inputs, double bias) {
    detail::require(weights.size() == inputs.size() && !inputs.empty(), "affine jet: weight/input count mismatch");
    Jet out = Jet::constant(bias, inputs.front().dim(), inputs.front().order());
    for (std::size_t j = 0; j < inputs.size(); ++j) out.add_scaled(weights[j], inputs[j]);
    return out;
}

} // namespace gamla
