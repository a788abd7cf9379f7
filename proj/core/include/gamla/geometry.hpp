#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gamla/gamla.hpp"
#include "gamla/jet.hpp"
#include "gamla/nn.hpp"
#include "gamla/point_cloud.hpp"

namespace gamla {

/// An analytic map R: R^n -> R^k whose zero set is the surface of interest.
/// Evaluates plain values (batched) and second-order jets.
class ImplicitHead {
public:
    using ValueFn = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;
    using JetFn = std::function<std::vector<Jet>(const std::vector<Jet>&)>;

    ImplicitHead(std::size_t input_dim, std::size_t output_dim, ValueFn values, JetFn jets);

    /// Builds a head from one generic callable `f(const std::vector<T>&) ->
    /// std::vector<T>` instantiated for both T = double and T = Jet.
    template <class F>
    static ImplicitHead from_expression(std::size_t input_dim, std::size_t output_dim, F f) {
        ValueFn values = [f, output_dim](const Eigen::MatrixXd& points) {
            Eigen::MatrixXd out(points.rows(), static_cast<Eigen::Index>(output_dim));
            std::vector<double> x(static_cast<std::size_t>(points.cols()));
            for (Eigen::Index r = 0; r < points.rows(); ++r) {
                for (Eigen::Index c = 0; c < points.cols(); ++c) x[static_cast<std::size_t>(c)] = points(r, c);
                const std::vector<double> y = f(x);
                for (Eigen::Index c = 0; c < out.cols(); ++c) out(r, c) = y.at(static_cast<std::size_t>(c));
            }
            return out;
        };
        JetFn jets = [f](const std::vector<Jet>& x) { return f(x); };
        return ImplicitHead(input_dim, output_dim, std::move(values), std::move(jets));
    }

    /// Rows [row_begin, row_end) of layer `layers-1` of `net`, after running
    /// layers [0, layers). The network is copied into the head.
    static ImplicitHead from_network(const MlpNetwork& net, std::size_t layers, std::size_t row_begin, std::size_t row_end);

    std::size_t input_dim() const { return input_dim_; }
    std::size_t output_dim() const { return output_dim_; }

    Eigen::VectorXd value(const Eigen::VectorXd& x) const;
    /// Rows are points.
    Eigen::MatrixXd values(const Eigen::MatrixXd& points) const;
    std::vector<Jet> jets(const Eigen::VectorXd& x, int order) const;

    /// c * R, same zero set.
    ImplicitHead scaled(double c) const;

private:
    std::size_t input_dim_ = 0;
    std::size_t output_dim_ = 0;
    ValueFn values_;
    JetFn jets_;
};

/// The learned complementary head z~ = R(x) of a model after round 2.
ImplicitHead complementary_head(const GamlaModel& model);

/// Propagates jets through layers [0, layers) of `net`, keeping only rows
/// [row_begin, row_end) of the last one.
std::vector<Jet> forward_jets(const MlpNetwork& net, std::size_t layers, std::size_t row_begin, std::size_t row_end,
                              const std::vector<Jet>& inputs);

/// Value, gradient and (order 2) Hessian of every component of R at x.
std::vector<Jet> eval_with_derivatives(const ImplicitHead& head, const Eigen::VectorXd& x, int order);

struct SurfacePointOptions {
    /// Gradients with norm at or below this are treated as singular.
    double gradient_floor = 1e-8;
    /// When set, |R(x)| must be below it (x must lie on the level set).
    std::optional<double> level_eps;
};

/// grad R / |grad R| for a codimension-1 head. Orientation is the one R induces.
Eigen::VectorXd normal_vector(const ImplicitHead& head, const Eigen::VectorXd& x, const SurfacePointOptions& options = {});

/// Gaussian curvature of the surface R = 0 in R^3 at x:
/// K = grad^T adj(H) grad / |grad|^4.
double gaussian_curvature(const ImplicitHead& head, const Eigen::VectorXd& x, const SurfacePointOptions& options = {});

/// Adjugate (transposed cofactor matrix) of a 3x3 matrix.
Eigen::Matrix3d adjugate(const Eigen::Matrix3d& m);

struct LevelSetSpec {
    double eps = 1e-3;
    Hyperrectangle box;
    std::size_t count = 100000;

    void validate() const;
};

/// Uniform samples in the box kept iff max_i |R_i(x)| < eps. Returns an
/// empty cloud (with a warning) when nothing survives.
PointCloud filter_level_set(const ImplicitHead& head, const LevelSetSpec& spec, std::uint64_t seed);

/// Bivariate cubic x3 = f(x1, x2) in the monomial order
/// 1, x1, x2, x1^2, x1*x2, x2^2, x1^3, x1^2*x2, x1*x2^2, x2^3.
struct TaylorPoly2D {
    static constexpr std::size_t kTerms = 10;
    static const std::array<const char*, kTerms> kMonomials;
    static const std::array<std::pair<int, int>, kTerms> kPowers;

    std::array<double, kTerms> raw{};    // least-squares coefficients
    std::array<double, kTerms> coefficients{}; // raw with |c| < threshold zeroed
    double threshold = 0.0;
    Eigen::Vector2d expansion_point = Eigen::Vector2d::Zero();
    std::size_t grid_points = 0;
    std::size_t newton_failures = 0;

    /// Coefficient of x1^p x2^q after thresholding.
    double coefficient(int p, int q) const;
    std::vector<std::string> surviving_monomials() const;
    std::map<std::string, double> surviving() const;
};

struct TaylorFitOptions {
    double half_width = 0.3;
    std::size_t grid = 21;
    int max_iterations = 50;
    double tolerance = 1e-10;
    double max_failure_fraction = 0.05;
    /// Newton starting value for x3 at (x1, x2); zero when unset.
    std::function<double(double, double)> initial_guess;
};

/// Solves R(x1, x2, x3) = 0 for x3 on a grid around the origin with Newton's
/// method, fits a full bivariate cubic by least squares, and suppresses
/// coefficients below `tau`. Requires n = 3 and a scalar head.
TaylorPoly2D fit_implicit_taylor(const ImplicitHead& head, double tau, const TaylorFitOptions& options = {});

/// Initial guesses for the Taylor fit taken from the model's projection.
TaylorFitOptions taylor_options_for(const GamlaModel& model, TaylorFitOptions base = {});

nlohmann::json to_json(const TaylorPoly2D& poly);

} // namespace gamla
