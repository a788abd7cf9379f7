#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace gamla {

enum class Activation { Tanh, Identity };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& name);

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;
using BoolVector = Eigen::Array<bool, Eigen::Dynamic, 1>;

/// Affine map followed by an elementwise activation. Each weight and bias
/// entry carries a trainability flag so that part of a layer can be frozen.
struct DenseLayer {
    Eigen::MatrixXd weights; // out_dim x in_dim
    Eigen::VectorXd biases;  // out_dim
    Activation activation = Activation::Identity;
    BoolMatrix trainable_weights;
    BoolVector trainable_biases;

    DenseLayer() = default;
    DenseLayer(std::size_t in_dim, std::size_t out_dim, Activation act);

    std::size_t in_dim() const { return static_cast<std::size_t>(weights.cols()); }
    std::size_t out_dim() const { return static_cast<std::size_t>(weights.rows()); }

    void set_trainable(bool trainable);
    std::size_t trainable_count() const;
    bool finite() const { return weights.allFinite() && biases.allFinite(); }
};

/// Chain of dense layers. Forward evaluation is purely functional; the
/// accumulation order of every affine map is fixed (bias first, then inputs
/// in index order) so single-sample and batched evaluation agree bitwise.
class MlpNetwork {
public:
    MlpNetwork() = default;
    explicit MlpNetwork(std::vector<DenseLayer> layers);

    /// Glorot-uniform weights, zero biases. `sizes` lists node-layer widths
    /// (input first), `activations` one entry per dense layer.
    static MlpNetwork glorot(const std::vector<std::size_t>& sizes, const std::vector<Activation>& activations,
                             std::uint64_t seed);

    std::size_t input_dim() const;
    std::size_t output_dim() const;
    std::size_t layer_count() const { return layers_.size(); }

    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }
    const DenseLayer& layer(std::size_t i) const { return layers_.at(i); }
    DenseLayer& layer(std::size_t i) { return layers_.at(i); }

    /// Throws ContractError if layer dimensions do not chain.
    void validate() const;

    std::size_t parameter_count() const;
    std::size_t trainable_parameter_count() const;
    void set_trainable(bool trainable);

    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
    /// Rows of `batch` are samples.
    Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& batch) const;
    /// Runs layers [first, last) only; input width must match layer `first`.
    Eigen::MatrixXd forward_range(const Eigen::MatrixXd& batch, std::size_t first, std::size_t last) const;

    /// All parameters flattened (weights row-major then biases, layer by layer).
    Eigen::VectorXd flatten() const;

    bool operator==(const MlpNetwork& other) const;

private:
    std::vector<DenseLayer> layers_;
};

/// Applies one layer to a batch (rows are samples).
void apply_layer(const DenseLayer& layer, const Eigen::MatrixXd& in, Eigen::MatrixXd& out);

/// Mean over samples of the Euclidean norm of (output - target).
double loss(const MlpNetwork& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets);

/// Per-sample Euclidean reconstruction residual norms.
Eigen::VectorXd residual_norms(const MlpNetwork& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets);

struct Gradients {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    double loss = 0.0;
};

/// Exact gradient of `loss()` on the batch. Entries of frozen parameters are
/// zero. Throws NumericError if the loss is not finite.
Gradients backward(const MlpNetwork& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets);

enum class Optimizer { Adam, Sgd };

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t epochs = 100;
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;
    Optimizer optimizer = Optimizer::Adam;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    /// Learning rate decays geometrically per epoch to this fraction of the
    /// initial rate by the last epoch; 1 keeps it constant.
    double final_lr_fraction = 1.0;

    void validate() const;
};

struct TrainReport {
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::vector<double> loss_curve; // mean minibatch loss per epoch
    std::size_t epochs = 0;
};

/// Minimizes `loss()` with minibatches drawn in a seed-determined order.
/// Only trainable entries change. On a non-finite loss the network is
/// restored to the state at the start of the failing epoch and
/// DivergenceError is thrown.
TrainReport train(MlpNetwork& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                  const TrainConfig& cfg);

nlohmann::json to_json(const MlpNetwork& net);
MlpNetwork network_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const TrainReport& report);
TrainReport train_report_from_json(const nlohmann::json& doc);

void save_network(const MlpNetwork& net, const std::filesystem::path& path);
MlpNetwork load_network(const std::filesystem::path& path);

/// Reads a whole file into a JSON document; IoError if missing, SchemaError
/// if it does not parse.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path);

} // namespace gamla
