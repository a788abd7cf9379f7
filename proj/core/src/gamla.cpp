#include "gamla/gamla.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <random>
#include <stdexcept>

#include "gamla/error.hpp"
#include "gamla/seeding.hpp"

namespace gamla {

GamlaArchitecture GamlaArchitecture::from_structure(std::size_t n, std::size_t m, std::size_t L, std::size_t C) {
    GamlaArchitecture arch;
    arch.ambient_dim = n;
    arch.intrinsic_dim = m;
    arch.hidden_dims.assign(L, C);
    return arch;
}

GamlaArchitecture GamlaArchitecture::from_layer_sizes(const std::vector<std::size_t>& sizes) {
    if (sizes.size() < 3 || sizes.size() % 2 == 0)
        throw ContractError("autoencoder layer list must have odd length >= 3");
    for (std::size_t i = 0; i < sizes.size() / 2; ++i)
        if (sizes[i] != sizes[sizes.size() - 1 - i]) throw ContractError("autoencoder layer list must be symmetric");
    GamlaArchitecture arch;
    arch.ambient_dim = sizes.front();
    arch.intrinsic_dim = sizes[sizes.size() / 2];
    arch.hidden_dims.assign(sizes.begin() + 1, sizes.begin() + static_cast<std::ptrdiff_t>(sizes.size() / 2));
    return arch;
}

std::vector<std::size_t> GamlaArchitecture::layer_sizes(std::size_t bottleneck) const {
    std::vector<std::size_t> sizes;
    sizes.push_back(ambient_dim);
    sizes.insert(sizes.end(), hidden_dims.begin(), hidden_dims.end());
    sizes.push_back(bottleneck);
    sizes.insert(sizes.end(), hidden_dims.rbegin(), hidden_dims.rend());
    sizes.push_back(ambient_dim);
    return sizes;
}

std::vector<Activation> GamlaArchitecture::activations() const {
    std::vector<Activation> acts;
    for (std::size_t i = 0; i < hidden_dims.size(); ++i) acts.push_back(Activation::Tanh);
    acts.push_back(Activation::Identity); // bottleneck
    for (std::size_t i = 0; i < hidden_dims.size(); ++i) acts.push_back(Activation::Tanh);
    acts.push_back(Activation::Identity); // output
    return acts;
}

void GamlaArchitecture::validate(bool allow_full_bottleneck) const {
    if (ambient_dim == 0) throw ContractError("ambient dimension must be positive");
    if (intrinsic_dim == 0) throw ContractError("intrinsic dimension must be positive");
    if (allow_full_bottleneck ? intrinsic_dim > ambient_dim : intrinsic_dim >= ambient_dim)
        throw ContractError("intrinsic dimension " + std::to_string(intrinsic_dim) + " must be below ambient dimension " +
                            std::to_string(ambient_dim));
    for (std::size_t w : hidden_dims)
        if (w < ambient_dim)
            throw ContractError("hidden width " + std::to_string(w) + " is below the ambient dimension " +
                                std::to_string(ambient_dim));
}

const char* to_string(Phase p) {
    switch (p) {
    case Phase::AfterRound1: return "AfterRound1";
    case Phase::Expanded: return "Expanded";
    case Phase::AfterRound2: return "AfterRound2";
    }
    return "AfterRound1";
}

Phase phase_from_string(const std::string& name) {
    if (name == "AfterRound1") return Phase::AfterRound1;
    if (name == "Expanded") return Phase::Expanded;
    if (name == "AfterRound2") return Phase::AfterRound2;
    throw SchemaError("unknown phase '" + name + "'");
}

GamlaModel::GamlaModel(GamlaArchitecture arch, MlpNetwork network, Phase phase, Hyperrectangle box)
    : arch_(std::move(arch)), network_(std::move(network)), phase_(phase), box_(std::move(box)) {
    arch_.validate();
    network_.validate();
    const auto sizes = arch_.layer_sizes(phase_ == Phase::AfterRound1 ? arch_.intrinsic_dim : arch_.ambient_dim);
    if (network_.layer_count() + 1 != sizes.size())
        throw ContractError("network depth does not match the architecture");
    for (std::size_t l = 0; l < network_.layer_count(); ++l)
        if (network_.layer(l).in_dim() != sizes[l] || network_.layer(l).out_dim() != sizes[l + 1])
            throw ContractError("network layer " + std::to_string(l) + " does not match the architecture");
    box_.validate();
    if (box_.dim() != arch_.ambient_dim) throw ContractError("ambient box dimension mismatch");
}

void GamlaModel::require_input(Eigen::Index width) const {
    if (static_cast<std::size_t>(width) != arch_.ambient_dim)
        throw ContractError("point dimension " + std::to_string(width) + " does not match ambient dimension " +
                            std::to_string(arch_.ambient_dim));
}

Eigen::MatrixXd GamlaModel::encode_batch(const Eigen::MatrixXd& points) const {
    require_input(points.cols());
    return network_.forward_range(points, 0, encoder_layers());
}

Eigen::MatrixXd GamlaModel::decode_batch(const Eigen::MatrixXd& latent) const {
    const auto width = static_cast<Eigen::Index>(network_.layer(encoder_layers()).in_dim());
    const auto m = static_cast<Eigen::Index>(arch_.intrinsic_dim);
    if (latent.cols() == width) return network_.forward_range(latent, encoder_layers(), network_.layer_count());
    if (latent.cols() == m) {
        Eigen::MatrixXd padded = Eigen::MatrixXd::Zero(latent.rows(), width);
        padded.leftCols(m) = latent;
        return network_.forward_range(padded, encoder_layers(), network_.layer_count());
    }
    throw ContractError("latent width " + std::to_string(latent.cols()) + " does not match the bottleneck");
}

Eigen::MatrixXd GamlaModel::reconstruct_batch(const Eigen::MatrixXd& points) const {
    require_input(points.cols());
    return network_.forward_batch(points);
}

Eigen::MatrixXd GamlaModel::project_batch(const Eigen::MatrixXd& points) const {
    Eigen::MatrixXd latent = encode_batch(points);
    const auto m = static_cast<Eigen::Index>(arch_.intrinsic_dim);
    latent.rightCols(latent.cols() - m).setZero();
    return decode_batch(latent);
}

Eigen::MatrixXd GamlaModel::complement_batch(const Eigen::MatrixXd& points) const {
    if (phase_ != Phase::AfterRound2) throw ContractError("the complementary head R exists only after round 2");
    const Eigen::MatrixXd latent = encode_batch(points);
    const auto m = static_cast<Eigen::Index>(arch_.intrinsic_dim);
    return latent.rightCols(latent.cols() - m);
}

LatentPoint GamlaModel::encode(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd latent = encode_batch(x.transpose()).row(0).transpose();
    const auto m = static_cast<Eigen::Index>(arch_.intrinsic_dim);
    return {latent.head(m), latent.tail(latent.size() - m)};
}

Eigen::VectorXd GamlaModel::decode(const LatentPoint& latent) const {
    if (static_cast<std::size_t>(latent.z.size()) != arch_.intrinsic_dim)
        throw ContractError("character coordinate width does not match m");
    if (latent.z_tilde.size() != 0 && static_cast<std::size_t>(latent.z_tilde.size()) != complement_dim())
        throw ContractError("complementary coordinate width does not match n-m");
    Eigen::RowVectorXd row(latent.z.size() + latent.z_tilde.size());
    row << latent.z.transpose(), latent.z_tilde.transpose();
    return decode_batch(row).row(0).transpose();
}

Eigen::VectorXd GamlaModel::reconstruct(const Eigen::VectorXd& x) const {
    return reconstruct_batch(x.transpose()).row(0).transpose();
}

Eigen::VectorXd GamlaModel::project(const Eigen::VectorXd& x) const {
    return project_batch(x.transpose()).row(0).transpose();
}

Eigen::VectorXd GamlaModel::complement(const Eigen::VectorXd& x) const {
    return complement_batch(x.transpose()).row(0).transpose();
}

double mean_squared_error(const Eigen::MatrixXd& points, const Eigen::MatrixXd& reconstructed) {
    detail::require(points.rows() == reconstructed.rows() && points.cols() == reconstructed.cols(),
                    "reconstruction shape mismatch");
    if (points.rows() == 0) return 0.0;
    return (points - reconstructed).rowwise().squaredNorm().mean();
}

GamlaModel train_round1(const PointCloud& cloud, const GamlaArchitecture& arch, const TrainConfig& cfg,
                        const Round1Options& options) {
    arch.validate();
    cloud.validate();
    detail::require(!cloud.empty(), "round 1 needs a non-empty cloud");
    if (cloud.dim() != arch.ambient_dim)
        throw ContractError("cloud dimension " + std::to_string(cloud.dim()) + " does not match ambient dimension " +
                            std::to_string(arch.ambient_dim));
    detail::require(options.xi > 0.0, "xi must be positive");

    MlpNetwork net = MlpNetwork::glorot(arch.layer_sizes(arch.intrinsic_dim), arch.activations(), cfg.seed);
    TrainReport report = train(net, cloud.points, cloud.points, cfg);

    GamlaModel model(arch, std::move(net), Phase::AfterRound1, Hyperrectangle::bounding(cloud.points, options.box_margin));
    model.round1_report = std::move(report);
    model.round1_config = cfg;
    model.xi = options.xi;
    model.round1_mse = mean_squared_error(cloud.points, model.reconstruct_batch(cloud.points));
    model.fully_reconstructed = model.round1_mse < options.xi;
    if (!model.fully_reconstructed && options.warn_if_incomplete)
        warn("round 1 mean squared error " + std::to_string(model.round1_mse) + " is above xi = " +
             std::to_string(options.xi) + "; the manifold is not fully reconstructed");
    return model;
}

GamlaModel expand_bottleneck(const GamlaModel& model, std::uint64_t seed) {
    if (model.phase() != Phase::AfterRound1) throw ContractError("bottleneck already expanded");
    const std::size_t n = model.ambient_dim();
    const std::size_t m = model.intrinsic_dim();
    const std::size_t k1 = model.architecture().bottleneck_layer();
    const auto extra = static_cast<Eigen::Index>(n - m);
    std::mt19937_64 rng(seed);

    MlpNetwork net = model.network();
    net.set_trainable(false);

    DenseLayer& enc = net.layer(k1);
    {
        const Eigen::Index in = enc.weights.cols();
        const Eigen::Index old_rows = enc.weights.rows();
        const double bound = std::sqrt(6.0 / static_cast<double>(in + static_cast<Eigen::Index>(n)));
        std::uniform_real_distribution<double> dist(-bound, bound);
        Eigen::MatrixXd w(old_rows + extra, in);
        w.topRows(old_rows) = enc.weights;
        for (Eigen::Index i = old_rows; i < old_rows + extra; ++i)
            for (Eigen::Index j = 0; j < in; ++j) w(i, j) = dist(rng);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(old_rows + extra);
        b.head(old_rows) = enc.biases;
        enc.weights = std::move(w);
        enc.biases = std::move(b);
        enc.trainable_weights = BoolMatrix::Constant(old_rows + extra, in, false);
        enc.trainable_weights.bottomRows(extra).setConstant(true);
        enc.trainable_biases = BoolVector::Constant(old_rows + extra, false);
        enc.trainable_biases.tail(extra).setConstant(true);
    }

    DenseLayer& dec = net.layer(k1 + 1);
    {
        const Eigen::Index out = dec.weights.rows();
        const Eigen::Index old_cols = dec.weights.cols();
        const double bound = std::sqrt(6.0 / static_cast<double>(out + static_cast<Eigen::Index>(n)));
        std::uniform_real_distribution<double> dist(-bound, bound);
        Eigen::MatrixXd w(out, old_cols + extra);
        w.leftCols(old_cols) = dec.weights;
        for (Eigen::Index i = 0; i < out; ++i)
            for (Eigen::Index j = old_cols; j < old_cols + extra; ++j) w(i, j) = dist(rng);
        dec.weights = std::move(w);
        dec.trainable_weights = BoolMatrix::Constant(out, old_cols + extra, false);
        dec.trainable_weights.rightCols(extra).setConstant(true);
    }

    GamlaModel expanded(model.architecture(), std::move(net), Phase::Expanded, model.ambient_box());
    expanded.round1_report = model.round1_report;
    expanded.round1_config = model.round1_config;
    expanded.round1_mse = model.round1_mse;
    expanded.fully_reconstructed = model.fully_reconstructed;
    expanded.xi = model.xi;
    return expanded;
}

PointCloud sample_ambient(const Hyperrectangle& box, std::size_t count, std::uint64_t seed) {
    box.validate();
    detail::require(count >= 1, "ambient sample count must be >= 1");
    std::mt19937_64 rng(seed);
    std::vector<std::uniform_real_distribution<double>> axes;
    for (Eigen::Index i = 0; i < box.low.size(); ++i) axes.emplace_back(box.low(i), box.high(i));
    PointCloud cloud;
    cloud.points.resize(static_cast<Eigen::Index>(count), box.low.size());
    for (Eigen::Index r = 0; r < cloud.points.rows(); ++r)
        for (Eigen::Index c = 0; c < cloud.points.cols(); ++c) cloud.points(r, c) = axes[static_cast<std::size_t>(c)](rng);
    cloud.provenance = "ambient(count=" + std::to_string(count) + ",seed=" + std::to_string(seed) + ")";
    return cloud;
}

namespace {

// Every entry whose trainability flag is false must be bitwise unchanged.
bool frozen_entries_unchanged(const MlpNetwork& before, const MlpNetwork& after) {
    for (std::size_t l = 0; l < before.layer_count(); ++l) {
        const DenseLayer& a = before.layer(l);
        const DenseLayer& b = after.layer(l);
        for (Eigen::Index i = 0; i < a.weights.rows(); ++i) {
            for (Eigen::Index j = 0; j < a.weights.cols(); ++j)
                if (!a.trainable_weights(i, j) && std::memcmp(&a.weights(i, j), &b.weights(i, j), sizeof(double)) != 0)
                    return false;
            if (!a.trainable_biases(i) && std::memcmp(&a.biases(i), &b.biases(i), sizeof(double)) != 0) return false;
        }
    }
    return true;
}

} // namespace

GamlaModel train_round2(const GamlaModel& expanded, const PointCloud& manifold, const Round2Options& options,
                        const TrainConfig& cfg) {
    if (expanded.phase() != Phase::Expanded) throw ContractError("round 2 requires an expanded model");
    detail::require(options.manifold_mix_fraction >= 0.0 && options.manifold_mix_fraction <= 1.0,
                    "manifold mix fraction must lie in [0,1]");
    const Hyperrectangle box = options.box.value_or(expanded.ambient_box());
    box.validate();
    detail::require(box.dim() == expanded.ambient_dim(), "ambient box dimension mismatch");
    if (!manifold.empty()) {
        manifold.validate();
        detail::require(manifold.dim() == expanded.ambient_dim(), "manifold cloud dimension mismatch");
    }
    const std::size_t count = options.ambient_count != 0 ? options.ambient_count : 2 * manifold.size();
    detail::require(count >= 1, "round 2 needs an ambient sample count or a manifold cloud to size it");

    const PointCloud ambient = sample_ambient(box, count, derive_seed(cfg.seed, 1));
    const auto mix = static_cast<std::size_t>(std::llround(options.manifold_mix_fraction * static_cast<double>(manifold.size())));
    Eigen::MatrixXd data(static_cast<Eigen::Index>(count + mix), static_cast<Eigen::Index>(expanded.ambient_dim()));
    data.topRows(static_cast<Eigen::Index>(count)) = ambient.points;
    if (mix > 0) {
        std::vector<std::size_t> idx(manifold.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::mt19937_64 rng(derive_seed(cfg.seed, 2));
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t r = 0; r < mix; ++r)
            data.row(static_cast<Eigen::Index>(count + r)) = manifold.points.row(static_cast<Eigen::Index>(idx[r]));
    }

    GamlaModel model = expanded;
    model.round2_report = train(model.network_, data, data, cfg);
    model.round2_config = cfg;
    if (!frozen_entries_unchanged(expanded.network(), model.network()))
        throw std::logic_error("round 2 modified a frozen round-1 parameter");
    model.phase_ = Phase::AfterRound2;
    model.box_ = box;
    return model;
}

} // namespace gamla
