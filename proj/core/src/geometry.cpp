#include "gamla/geometry.hpp"

#include <cmath>
#include <memory>

#include "gamla/error.hpp"

namespace gamla {

ImplicitHead::ImplicitHead(std::size_t input_dim, std::size_t output_dim, ValueFn values, JetFn jets)
    : input_dim_(input_dim), output_dim_(output_dim), values_(std::move(values)), jets_(std::move(jets)) {
    detail::require(input_dim_ > 0 && output_dim_ > 0, "implicit head dimensions must be positive");
    detail::require(static_cast<bool>(values_) && static_cast<bool>(jets_), "implicit head needs both evaluators");
}

std::vector<Jet> forward_jets(const MlpNetwork& net, std::size_t layers, std::size_t row_begin, std::size_t row_end,
                              const std::vector<Jet>& inputs) {
    detail::require(layers >= 1 && layers <= net.layer_count(), "jet propagation layer count out of range");
    detail::require(inputs.size() == net.input_dim(), "jet input width does not match the network");
    std::vector<Jet> current = inputs;
    for (std::size_t l = 0; l < layers; ++l) {
        const DenseLayer& layer = net.layer(l);
        const bool last = l + 1 == layers;
        const std::size_t begin = last ? row_begin : 0;
        const std::size_t end = last ? row_end : layer.out_dim();
        detail::require(begin < end && end <= layer.out_dim(), "jet output rows out of range");
        std::vector<Jet> next;
        next.reserve(end - begin);
        std::vector<double> row(layer.in_dim());
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t j = 0; j < layer.in_dim(); ++j)
                row[j] = layer.weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            Jet pre = affine(row, current, layer.biases(static_cast<Eigen::Index>(i)));
            next.push_back(layer.activation == Activation::Tanh ? tanh(pre) : std::move(pre));
        }
        current = std::move(next);
    }
    return current;
}

ImplicitHead ImplicitHead::from_network(const MlpNetwork& net, std::size_t layers, std::size_t row_begin,
                                        std::size_t row_end) {
    detail::require(layers >= 1 && layers <= net.layer_count(), "head layer count out of range");
    detail::require(row_begin < row_end && row_end <= net.layer(layers - 1).out_dim(), "head rows out of range");
    auto shared = std::make_shared<const MlpNetwork>(net);
    ValueFn values = [shared, layers, row_begin, row_end](const Eigen::MatrixXd& points) {
        const Eigen::MatrixXd out = shared->forward_range(points, 0, layers);
        return Eigen::MatrixXd(out.middleCols(static_cast<Eigen::Index>(row_begin),
                                              static_cast<Eigen::Index>(row_end - row_begin)));
    };
    JetFn jets = [shared, layers, row_begin, row_end](const std::vector<Jet>& x) {
        return forward_jets(*shared, layers, row_begin, row_end, x);
    };
    return ImplicitHead(net.input_dim(), row_end - row_begin, std::move(values), std::move(jets));
}

Eigen::VectorXd ImplicitHead::value(const Eigen::VectorXd& x) const {
    return values(x.transpose()).row(0).transpose();
}

Eigen::MatrixXd ImplicitHead::values(const Eigen::MatrixXd& points) const {
    if (static_cast<std::size_t>(points.cols()) != input_dim_)
        throw ContractError("point dimension " + std::to_string(points.cols()) + " does not match head input " +
                            std::to_string(input_dim_));
    return values_(points);
}

std::vector<Jet> ImplicitHead::jets(const Eigen::VectorXd& x, int order) const {
    if (static_cast<std::size_t>(x.size()) != input_dim_)
        throw ContractError("point dimension " + std::to_string(x.size()) + " does not match head input " +
                            std::to_string(input_dim_));
    std::vector<Jet> out = jets_(Jet::variables(x, order));
    detail::require(out.size() == output_dim_, "head returned the wrong number of components");
    return out;
}

ImplicitHead ImplicitHead::scaled(double c) const {
    ValueFn values = [inner = values_, c](const Eigen::MatrixXd& points) { return Eigen::MatrixXd(c * inner(points)); };
    JetFn jets = [inner = jets_, c](const std::vector<Jet>& x) {
        std::vector<Jet> out = inner(x);
        for (auto& j : out) j *= c;
        return out;
    };
    return ImplicitHead(input_dim_, output_dim_, std::move(values), std::move(jets));
}

ImplicitHead complementary_head(const GamlaModel& model) {
    if (model.phase() != Phase::AfterRound2) throw ContractError("the complementary head R exists only after round 2");
    return ImplicitHead::from_network(model.network(), model.encoder_layers(), model.intrinsic_dim(), model.ambient_dim());
}

std::vector<Jet> eval_with_derivatives(const ImplicitHead& head, const Eigen::VectorXd& x, int order) {
    if (order != 1 && order != 2)
        throw ContractError("derivative order " + std::to_string(order) + " is unsupported (1 or 2 only)");
    return head.jets(x, order);
}

namespace {

Jet scalar_surface_jet(const ImplicitHead& head, const Eigen::VectorXd& x, const SurfacePointOptions& options, int order) {
    if (head.output_dim() != 1) throw ContractError("surface normals and curvature need a codimension-1 head");
    Jet r = eval_with_derivatives(head, x, order).front();
    if (options.level_eps && !(std::abs(r.value()) < *options.level_eps))
        throw ContractError("point is not on the level set: |R| = " + std::to_string(std::abs(r.value())));
    if (!(r.gradient().norm() > options.gradient_floor))
        throw SingularPointError("gradient of R vanishes at the query point");
    return r;
}

} // namespace

Eigen::VectorXd normal_vector(const ImplicitHead& head, const Eigen::VectorXd& x, const SurfacePointOptions& options) {
    const Jet r = scalar_surface_jet(head, x, options, 1);
    return r.gradient() / r.gradient().norm();
}

Eigen::Matrix3d adjugate(const Eigen::Matrix3d& m) {
    Eigen::Matrix3d adj;
    adj(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
    adj(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
    adj(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
    adj(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
    adj(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
    adj(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
    adj(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
    adj(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
    adj(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    return adj;
}

double gaussian_curvature(const ImplicitHead& head, const Eigen::VectorXd& x, const SurfacePointOptions& options) {
    if (head.input_dim() != 3) throw ContractError("Gaussian curvature is implemented for surfaces in R^3 only");
    const Jet r = scalar_surface_jet(head, x, options, 2);
    const Eigen::Vector3d g = r.gradient();
    const Eigen::Matrix3d h = r.hessian();
    const double g2 = g.squaredNorm();
    return g.dot(adjugate(h) * g) / (g2 * g2);
}

void LevelSetSpec::validate() const {
    if (!(eps > 0.0)) throw ContractError("level-set threshold must be positive");
    if (count == 0) throw ContractError("level-set sample count must be >= 1");
    box.validate();
}

PointCloud filter_level_set(const ImplicitHead& head, const LevelSetSpec& spec, std::uint64_t seed) {
    spec.validate();
    detail::require(spec.box.dim() == head.input_dim(), "level-set box dimension mismatch");
    const PointCloud samples = sample_ambient(spec.box, spec.count, seed);
    const Eigen::MatrixXd r = head.values(samples.points);
    std::vector<std::size_t> keep;
    for (Eigen::Index i = 0; i < r.rows(); ++i)
        if (r.row(i).cwiseAbs().maxCoeff() < spec.eps) keep.push_back(static_cast<std::size_t>(i));
    PointCloud out = samples.subset(keep);
    out.provenance = "level_set(eps=" + std::to_string(spec.eps) + ",count=" + std::to_string(spec.count) +
                     ",seed=" + std::to_string(seed) + ")";
    if (keep.empty()) warn("level-set filter kept no samples; try a larger eps or count");
    return out;
}

const std::array<const char*, TaylorPoly2D::kTerms> TaylorPoly2D::kMonomials = {
    "1", "x1", "x2", "x1^2", "x1*x2", "x2^2", "x1^3", "x1^2*x2", "x1*x2^2", "x2^3"};
const std::array<std::pair<int, int>, TaylorPoly2D::kTerms> TaylorPoly2D::kPowers = {
    {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}, {3, 0}, {2, 1}, {1, 2}, {0, 3}}};

double TaylorPoly2D::coefficient(int p, int q) const {
    for (std::size_t k = 0; k < kTerms; ++k)
        if (kPowers[k].first == p && kPowers[k].second == q) return coefficients[k];
    throw ContractError("monomial degree exceeds 3");
}

std::vector<std::string> TaylorPoly2D::surviving_monomials() const {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < kTerms; ++k)
        if (coefficients[k] != 0.0) out.emplace_back(kMonomials[k]);
    return out;
}

std::map<std::string, double> TaylorPoly2D::surviving() const {
    std::map<std::string, double> out;
    for (std::size_t k = 0; k < kTerms; ++k)
        if (coefficients[k] != 0.0) out.emplace(kMonomials[k], coefficients[k]);
    return out;
}

namespace {

struct NewtonResult {
    bool converged = false;
    double x3 = 0.0;
    Jet jet;
};

NewtonResult solve_x3(const ImplicitHead& head, double x1, double x2, double start, const TaylorFitOptions& options) {
    NewtonResult res;
    double x3 = start;
    for (int it = 0; it <= options.max_iterations; ++it) {
        const Jet r = head.jets(Eigen::Vector3d(x1, x2, x3), 1).front();
        if (!std::isfinite(r.value())) return res;
        if (std::abs(r.value()) < options.tolerance) {
            res.converged = true;
            res.x3 = x3;
            res.jet = r;
            return res;
        }
        const double slope = r.gradient()(2);
        if (!(std::abs(slope) > 1e-14) || it == options.max_iterations) return res;
        x3 -= r.value() / slope;
    }
    return res;
}

} // namespace

TaylorPoly2D fit_implicit_taylor(const ImplicitHead& head, double tau, const TaylorFitOptions& options) {
    if (head.input_dim() != 3 || head.output_dim() != 1)
        throw ContractError("implicit Taylor fitting needs a scalar head on R^3");
    detail::require(tau >= 0.0, "threshold must be non-negative");
    detail::require(options.grid >= 4 && options.half_width > 0.0, "Taylor grid too small");
    auto guess = [&](double x1, double x2) { return options.initial_guess ? options.initial_guess(x1, x2) : 0.0; };

    const NewtonResult origin = solve_x3(head, 0.0, 0.0, guess(0.0, 0.0), options);
    if (!origin.converged) throw DegenerateChartError("no solution of R(0,0,x3) = 0 near the origin");
    const double rx3 = std::abs(origin.jet.gradient()(2));
    if (!(rx3 > 1e-6 * std::max(1.0, origin.jet.gradient().norm())))
        throw DegenerateChartError("dR/dx3 vanishes at the origin; x3 is not a function of (x1, x2) there");

    const std::size_t g = options.grid;
    std::vector<std::array<double, 3>> samples;
    samples.reserve(g * g);
    std::size_t failures = 0;
    for (std::size_t i = 0; i < g; ++i) {
        for (std::size_t j = 0; j < g; ++j) {
            const double x1 = -options.half_width + 2.0 * options.half_width * static_cast<double>(i) / static_cast<double>(g - 1);
            const double x2 = -options.half_width + 2.0 * options.half_width * static_cast<double>(j) / static_cast<double>(g - 1);
            const NewtonResult r = solve_x3(head, x1, x2, guess(x1, x2), options);
            if (r.converged)
                samples.push_back({x1, x2, r.x3});
            else
                ++failures;
        }
    }
    if (static_cast<double>(failures) > options.max_failure_fraction * static_cast<double>(g * g))
        throw DegenerateChartError("Newton failed at " + std::to_string(failures) + " of " + std::to_string(g * g) +
                                   " grid points");

    Eigen::MatrixXd a(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(TaylorPoly2D::kTerms));
    Eigen::VectorXd b(static_cast<Eigen::Index>(samples.size()));
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const auto [x1, x2, x3] = samples[s];
        for (std::size_t k = 0; k < TaylorPoly2D::kTerms; ++k) {
            const auto [p, q] = TaylorPoly2D::kPowers[k];
            a(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)) = std::pow(x1, p) * std::pow(x2, q);
        }
        b(static_cast<Eigen::Index>(s)) = x3;
    }
    const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);

    TaylorPoly2D poly;
    poly.threshold = tau;
    poly.grid_points = g * g;
    poly.newton_failures = failures;
    for (std::size_t k = 0; k < TaylorPoly2D::kTerms; ++k) {
        poly.raw[k] = c(static_cast<Eigen::Index>(k));
        poly.coefficients[k] = std::abs(poly.raw[k]) >= tau ? poly.raw[k] : 0.0;
    }
    return poly;
}

TaylorFitOptions taylor_options_for(const GamlaModel& model, TaylorFitOptions base) {
    detail::require(model.ambient_dim() == 3, "Taylor fitting needs n = 3");
    auto shared = std::make_shared<const GamlaModel>(model);
    base.initial_guess = [shared](double x1, double x2) { return shared->project(Eigen::Vector3d(x1, x2, 0.0))(2); };
    return base;
}

nlohmann::json to_json(const TaylorPoly2D& poly) {
    nlohmann::json coeffs = nlohmann::json::object();
    nlohmann::json raw = nlohmann::json::object();
    for (std::size_t k = 0; k < TaylorPoly2D::kTerms; ++k) {
        raw[TaylorPoly2D::kMonomials[k]] = poly.raw[k];
        if (poly.coefficients[k] != 0.0) coeffs[TaylorPoly2D::kMonomials[k]] = poly.coefficients[k];
    }
    return {{"expansion_point", {poly.expansion_point(0), poly.expansion_point(1)}},
            {"threshold", poly.threshold},
            {"coefficients", coeffs},
            {"raw_coefficients", raw},
            {"grid_points", poly.grid_points},
            {"newton_failures", poly.newton_failures}};
}

} // namespace gamla
