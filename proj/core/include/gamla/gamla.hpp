#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gamla/nn.hpp"
#include "gamla/point_cloud.hpp"

namespace gamla {

/// Symmetric autoencoder layout: input n, encoder hidden widths, bottleneck
/// m, mirrored decoder hidden widths, output n. Hidden layers use tanh; the
/// bottleneck and output layers are affine.
struct GamlaArchitecture {
    std::size_t ambient_dim = 0;          // n
    std::size_t intrinsic_dim = 0;        // m
    std::vector<std::size_t> hidden_dims; // encoder side, input to bottleneck

    /// `(L, C)` structure: L hidden layers of width C on each side.
    static GamlaArchitecture from_structure(std::size_t n, std::size_t m, std::size_t L, std::size_t C);
    /// Full node-layer list such as (3,3,2,3,3); must be odd length and symmetric.
    static GamlaArchitecture from_layer_sizes(const std::vector<std::size_t>& sizes);

    /// Node-layer widths with the given bottleneck width.
    std::vector<std::size_t> layer_sizes(std::size_t bottleneck) const;
    std::vector<Activation> activations() const;
    /// Index of the dense layer that produces the bottleneck (k-1, zero based).
    std::size_t bottleneck_layer() const { return hidden_dims.size(); }

    /// m < n, every hidden width >= n. `allow_full_bottleneck` admits m == n.
    void validate(bool allow_full_bottleneck = false) const;
};

enum class Phase { AfterRound1, Expanded, AfterRound2 };

const char* to_string(Phase p);
Phase phase_from_string(const std::string& name);

/// Split of the bottleneck activation: character coordinates z (width m) and
/// complementary coordinates z~ (width n-m, empty before round 2).
struct LatentPoint {
    Eigen::VectorXd z;
    Eigen::VectorXd z_tilde;
};

struct Round1Options {
    double xi = 1e-4;         // full-reconstruction threshold on mean squared error
    double box_margin = 0.25; // ambient box = bounding box widened by this fraction per axis
    bool warn_if_incomplete = true;
};

struct Round2Options {
    /// Ambient sample count; 0 means twice the manifold cloud size.
    std::size_t ambient_count = 0;
    /// Fraction of the manifold cloud mixed into the ambient training set.
    double manifold_mix_fraction = 0.1;
    /// Overrides the box stored in the model.
    std::optional<Hyperrectangle> box;
};

class GamlaModel {
public:
    GamlaModel() = default;
    GamlaModel(GamlaArchitecture arch, MlpNetwork network, Phase phase, Hyperrectangle box);

    const GamlaArchitecture& architecture() const { return arch_; }
    const MlpNetwork& network() const { return network_; }
    MlpNetwork& network() { return network_; }
    Phase phase() const { return phase_; }
    const Hyperrectangle& ambient_box() const { return box_; }

    std::size_t ambient_dim() const { return arch_.ambient_dim; }
    std::size_t intrinsic_dim() const { return arch_.intrinsic_dim; }
    std::size_t complement_dim() const { return phase_ == Phase::AfterRound1 ? 0 : arch_.ambient_dim - arch_.intrinsic_dim; }
    /// Dense layers [0, encoder_layers()) form the encoder.
    std::size_t encoder_layers() const { return arch_.bottleneck_layer() + 1; }

    LatentPoint encode(const Eigen::VectorXd& x) const;
    /// z~ may be empty (treated as zero) or have width complement_dim().
    Eigen::VectorXd decode(const LatentPoint& latent) const;
    /// Full reconstruction: decode(encode(x)).
    Eigen::VectorXd reconstruct(const Eigen::VectorXd& x) const;
    /// Decode of (G(x), 0): image of x on the learned manifold.
    Eigen::VectorXd project(const Eigen::VectorXd& x) const;
    /// R(x), the complementary coordinates. Requires AfterRound2.
    Eigen::VectorXd complement(const Eigen::VectorXd& x) const;

    /// Batched variants, rows are samples. `encode_batch` returns the full
    /// bottleneck (z columns first, then z~).
    Eigen::MatrixXd encode_batch(const Eigen::MatrixXd& points) const;
    Eigen::MatrixXd decode_batch(const Eigen::MatrixXd& latent) const;
    Eigen::MatrixXd reconstruct_batch(const Eigen::MatrixXd& points) const;
    Eigen::MatrixXd project_batch(const Eigen::MatrixXd& points) const;
    Eigen::MatrixXd complement_batch(const Eigen::MatrixXd& points) const;

    // Training metadata.
    std::optional<TrainReport> round1_report;
    std::optional<TrainReport> round2_report;
    std::optional<TrainConfig> round1_config;
    std::optional<TrainConfig> round2_config;
    double round1_mse = 0.0;
    bool fully_reconstructed = false;
    double xi = 1e-4;

private:
    void require_input(Eigen::Index width) const;

    GamlaArchitecture arch_;
    MlpNetwork network_;
    Phase phase_ = Phase::AfterRound1;
    Hyperrectangle box_;

    friend GamlaModel expand_bottleneck(const GamlaModel&, std::uint64_t);
    friend GamlaModel train_round2(const GamlaModel&, const PointCloud&, const Round2Options&, const TrainConfig&);
};

/// Mean over points of ||x - x_hat||^2.
double mean_squared_error(const Eigen::MatrixXd& points, const Eigen::MatrixXd& reconstructed);

/// First round: trains the width-m autoencoder on the manifold cloud.
/// A model whose mean squared error stays above xi is still returned, with
/// `fully_reconstructed == false` and a warning.
GamlaModel train_round1(const PointCloud& cloud, const GamlaArchitecture& arch, const TrainConfig& cfg,
                        const Round1Options& options = {});

/// Adds n-m bottleneck nodes. Only the new rows of the bottleneck layer and
/// the new columns of the following layer are trainable; they are
/// Glorot-initialized from `seed`.
GamlaModel expand_bottleneck(const GamlaModel& model, std::uint64_t seed);

/// i.i.d. uniform samples from the box.
PointCloud sample_ambient(const Hyperrectangle& box, std::size_t count, std::uint64_t seed);

/// Second round: trains only the new blocks to reconstruct ambient samples.
/// `manifold` supplies the points mixed in per Round2Options (may be empty
/// when the mix fraction is zero).
GamlaModel train_round2(const GamlaModel& expanded, const PointCloud& manifold, const Round2Options& options,
                        const TrainConfig& cfg);

nlohmann::json to_json(const GamlaModel& model);
GamlaModel model_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const GamlaArchitecture& arch);
GamlaArchitecture architecture_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const Hyperrectangle& box);
Hyperrectangle hyperrectangle_from_json(const nlohmann::json& doc);

/// `metadata` is stored verbatim under the "metadata" key.
void save_model(const GamlaModel& model, const std::filesystem::path& path, const nlohmann::json& metadata = {});
GamlaModel load_model(const std::filesystem::path& path);

} // namespace gamla
