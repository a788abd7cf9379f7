#include "gamla/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gamla/error.hpp"

namespace gamla {

const char* to_string(Activation a) {
    switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Identity: return "identity";
    }
    return "identity";
}

Activation activation_from_string(const std::string& name) {
    if (name == "tanh") return Activation::Tanh;
    if (name == "identity") return Activation::Identity;
    throw SchemaError("unknown activation '" + name + "'");
}

DenseLayer::DenseLayer(std::size_t in_dim, std::size_t out_dim, Activation act)
    : weights(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out_dim), static_cast<Eigen::Index>(in_dim))),
      biases(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out_dim))),
      activation(act),
      trainable_weights(BoolMatrix::Constant(static_cast<Eigen::Index>(out_dim), static_cast<Eigen::Index>(in_dim), true)),
      trainable_biases(BoolVector::Constant(static_cast<Eigen::Index>(out_dim), true)) {}

void DenseLayer::set_trainable(bool trainable) {
    trainable_weights.setConstant(trainable);
    trainable_biases.setConstant(trainable);
}

std::size_t DenseLayer::trainable_count() const {
    return static_cast<std::size_t>(trainable_weights.count() + trainable_biases.count());
}

MlpNetwork::MlpNetwork(std::vector<DenseLayer> layers) : layers_(std::move(layers)) { validate(); }

MlpNetwork MlpNetwork::glorot(const std::vector<std::size_t>& sizes, const std::vector<Activation>& activations,
                              std::uint64_t seed) {
    detail::require(sizes.size() >= 2, "a network needs at least an input and an output width");
    detail::require(activations.size() + 1 == sizes.size(), "one activation per dense layer required");
    std::mt19937_64 rng(seed);
    std::vector<DenseLayer> layers;
    layers.reserve(activations.size());
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        detail::require(sizes[l] > 0 && sizes[l + 1] > 0, "layer widths must be positive");
        DenseLayer layer(sizes[l], sizes[l + 1], activations[l]);
        const double bound = std::sqrt(6.0 / static_cast<double>(sizes[l] + sizes[l + 1]));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) layer.weights(i, j) = dist(rng);
        layers.push_back(std::move(layer));
    }
    return MlpNetwork(std::move(layers));
}

std::size_t MlpNetwork::input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim(); }
std::size_t MlpNetwork::output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim(); }

void MlpNetwork::validate() const {
    if (layers_.empty()) throw ContractError("network has no layers");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const DenseLayer& layer = layers_[l];
        if (layer.in_dim() == 0 || layer.out_dim() == 0) throw ContractError("layer " + std::to_string(l) + " is empty");
        if (static_cast<std::size_t>(layer.biases.size()) != layer.out_dim())
            throw ContractError("layer " + std::to_string(l) + " bias length mismatch");
        if (layer.trainable_weights.rows() != layer.weights.rows() || layer.trainable_weights.cols() != layer.weights.cols() ||
            layer.trainable_biases.size() != layer.biases.size())
            throw ContractError("layer " + std::to_string(l) + " trainability mask shape mismatch");
        if (l > 0 && layers_[l - 1].out_dim() != layer.in_dim())
            throw ContractError("layer " + std::to_string(l) + " input width " + std::to_string(layer.in_dim()) +
                                " does not match previous output width " + std::to_string(layers_[l - 1].out_dim()));
    }
}

std::size_t MlpNetwork::parameter_count() const {
    std::size_t count = 0;
    for (const auto& layer : layers_) count += static_cast<std::size_t>(layer.weights.size() + layer.biases.size());
    return count;
}

std::size_t MlpNetwork::trainable_parameter_count() const {
    std::size_t count = 0;
    for (const auto& layer : layers_) count += layer.trainable_count();
    return count;
}

void MlpNetwork::set_trainable(bool trainable) {
    for (auto& layer : layers_) layer.set_trainable(trainable);
}

void apply_layer(const DenseLayer& layer, const Eigen::MatrixXd& in, Eigen::MatrixXd& out) {
    const Eigen::Index out_dim = layer.weights.rows();
    const Eigen::Index in_dim = layer.weights.cols();
    out.resize(in.rows(), out_dim);
    for (Eigen::Index i = 0; i < out_dim; ++i) {
        auto col = out.col(i);
        col.setConstant(layer.biases(i));
        for (Eigen::Index j = 0; j < in_dim; ++j) col += layer.weights(i, j) * in.col(j);
    }
    if (layer.activation == Activation::Tanh) out = out.unaryExpr([](double v) { return std::tanh(v); });
}

Eigen::MatrixXd MlpNetwork::forward_range(const Eigen::MatrixXd& batch, std::size_t first, std::size_t last) const {
    detail::require(first <= last && last <= layers_.size(), "invalid layer range");
    if (first == last) return batch;
    if (static_cast<std::size_t>(batch.cols()) != layers_[first].in_dim())
        throw ContractError("input width " + std::to_string(batch.cols()) + " does not match expected " +
                            std::to_string(layers_[first].in_dim()));
    Eigen::MatrixXd a = batch;
    Eigen::MatrixXd b;
    for (std::size_t l = first; l < last; ++l) {
        apply_layer(layers_[l], a, b);
        std::swap(a, b);
    }
    return a;
}

Eigen::MatrixXd MlpNetwork::forward_batch(const Eigen::MatrixXd& batch) const {
    return forward_range(batch, 0, layers_.size());
}

Eigen::VectorXd MlpNetwork::forward(const Eigen::VectorXd& x) const {
    if (static_cast<std::size_t>(x.size()) != input_dim())
        throw ContractError("input length " + std::to_string(x.size()) + " does not match network input " +
                            std::to_string(input_dim()));
    return forward_batch(x.transpose()).row(0).transpose();
}

Eigen::VectorXd MlpNetwork::flatten() const {
    Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index k = 0;
    for (const auto& layer : layers_) {
        for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) flat(k++) = layer.weights(i, j);
        for (Eigen::Index i = 0; i < layer.biases.size(); ++i) flat(k++) = layer.biases(i);
    }
    return flat;
}

bool MlpNetwork::operator==(const MlpNetwork& other) const {
    if (layers_.size() != other.layers_.size()) return false;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& a = layers_[l];
        const auto& b = other.layers_[l];
        if (a.activation != b.activation || a.weights.rows() != b.weights.rows() || a.weights.cols() != b.weights.cols())
            return false;
        if (a.weights != b.weights || a.biases != b.biases) return false;
        if ((a.trainable_weights != b.trainable_weights).any() || (a.trainable_biases != b.trainable_biases).any())
            return false;
    }
    return true;
}

Eigen::VectorXd residual_norms(const MlpNetwork& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
    detail::require(inputs.rows() == targets.rows(), "inputs and targets must have the same row count");
    const Eigen::MatrixXd out = net.forward_batch(inputs);
    detail::require(out.cols() == targets.cols(), "target width does not match network output");
    return (out - targets).rowwise().norm();
}

double loss(const MlpNetwork& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
    if (inputs.rows() == 0) return 0.0;
    return residual_norms(net, inputs, targets).mean();
}

namespace {

struct Workspace {
    std::vector<Eigen::MatrixXd> activations; // activations[0] = input
    Eigen::MatrixXd delta;
    Eigen::MatrixXd next_delta;
};

void init_gradients(const MlpNetwork& net, Gradients& g) {
    g.weights.resize(net.layer_count());
    g.biases.resize(net.layer_count());
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        g.weights[l].setZero(net.layer(l).weights.rows(), net.layer(l).weights.cols());
        g.biases[l].setZero(net.layer(l).biases.size());
    }
}

// Fills `g` with the masked gradient of the mean residual norm. Returns false
// if the loss is not finite.
bool backward_into(const MlpNetwork& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets, Workspace& ws,
                   Gradients& g) {
    const std::size_t layers = net.layer_count();
    ws.activations.resize(layers + 1);
    ws.activations[0] = inputs;
    for (std::size_t l = 0; l < layers; ++l) apply_layer(net.layer(l), ws.activations[l], ws.activations[l + 1]);

    const Eigen::Index batch = inputs.rows();
    ws.delta = ws.activations[layers] - targets;
    const Eigen::VectorXd norms = ws.delta.rowwise().norm();
    g.loss = norms.mean();
    if (!std::isfinite(g.loss)) return false;

    const double inv_batch = 1.0 / static_cast<double>(batch);
    for (Eigen::Index r = 0; r < batch; ++r) {
        if (norms(r) > 0.0)
            ws.delta.row(r) *= inv_batch / norms(r);
        else
            ws.delta.row(r).setZero();
    }

    for (std::size_t l = layers; l-- > 0;) {
        const DenseLayer& layer = net.layer(l);
        if (layer.activation == Activation::Tanh)
            ws.delta.array() *= 1.0 - ws.activations[l + 1].array().square();
        g.weights[l].noalias() = ws.delta.transpose() * ws.activations[l];
        g.biases[l] = ws.delta.colwise().sum().transpose();
        g.weights[l] = layer.trainable_weights.select(g.weights[l], 0.0);
        g.biases[l] = layer.trainable_biases.select(g.biases[l], 0.0);
        if (l > 0) {
            ws.next_delta.noalias() = ws.delta * layer.weights;
            std::swap(ws.delta, ws.next_delta);
        }
    }
    return true;
}

} // namespace

Gradients backward(const MlpNetwork& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets) {
    net.validate();
    detail::require(inputs.rows() == targets.rows(), "inputs and targets must have the same row count");
    detail::require(inputs.rows() > 0, "backward on an empty batch");
    detail::require(static_cast<std::size_t>(inputs.cols()) == net.input_dim(), "input width mismatch");
    detail::require(static_cast<std::size_t>(targets.cols()) == net.output_dim(), "target width mismatch");
    Gradients g;
    init_gradients(net, g);
    Workspace ws;
    if (!backward_into(net, inputs, targets, ws, g)) throw NumericError("non-finite loss in backward pass");
    return g;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ContractError("learning_rate must be > 0");
    if (batch_size == 0) throw ContractError("batch_size must be >= 1");
    if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0))
        throw ContractError("adam betas must lie in (0,1)");
    if (!(adam_eps > 0.0)) throw ContractError("adam_eps must be > 0");
    if (!(final_lr_fraction > 0.0 && final_lr_fraction <= 1.0))
        throw ContractError("final_lr_fraction must lie in (0,1]");
}

namespace {

struct AdamState {
    std::vector<Eigen::MatrixXd> m_w, v_w;
    std::vector<Eigen::VectorXd> m_b, v_b;
    long step = 0;
};

} // namespace

TrainReport train(MlpNetwork& net, const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                  const TrainConfig& cfg) {
    cfg.validate();
    net.validate();
    detail::require(inputs.rows() > 0, "training data is empty");
    detail::require(inputs.rows() == targets.rows(), "inputs and targets must have the same row count");
    detail::require(static_cast<std::size_t>(inputs.cols()) == net.input_dim(), "input width mismatch");
    detail::require(static_cast<std::size_t>(targets.cols()) == net.output_dim(), "target width mismatch");

    TrainReport report;
    report.initial_loss = loss(net, inputs, targets);
    if (!std::isfinite(report.initial_loss)) throw DivergenceError("initial loss is not finite");
    report.final_loss = report.initial_loss;
    if (cfg.epochs == 0) return report;

    const std::size_t n = static_cast<std::size_t>(inputs.rows());
    const std::size_t batch_size = std::min(cfg.batch_size, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(cfg.seed);

    Gradients g;
    init_gradients(net, g);
    AdamState adam;
    if (cfg.optimizer == Optimizer::Adam) {
        adam.m_w = g.weights;
        adam.v_w = g.weights;
        adam.m_b = g.biases;
        adam.v_b = g.biases;
    }
    Workspace ws;
    Eigen::MatrixXd xb, tb;

    const double decay =
        cfg.epochs > 1 ? std::pow(cfg.final_lr_fraction, 1.0 / static_cast<double>(cfg.epochs - 1)) : 1.0;
    double lr = cfg.learning_rate;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<DenseLayer> snapshot = net.layers();
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;

        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t count = std::min(batch_size, n - start);
            xb.resize(static_cast<Eigen::Index>(count), inputs.cols());
            tb.resize(static_cast<Eigen::Index>(count), targets.cols());
            for (std::size_t r = 0; r < count; ++r) {
                xb.row(static_cast<Eigen::Index>(r)) = inputs.row(static_cast<Eigen::Index>(order[start + r]));
                tb.row(static_cast<Eigen::Index>(r)) = targets.row(static_cast<Eigen::Index>(order[start + r]));
            }

            bool finite = backward_into(net, xb, tb, ws, g);
            if (finite) {
                epoch_loss += g.loss * static_cast<double>(count);
                if (cfg.optimizer == Optimizer::Adam) {
                    ++adam.step;
                    const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(adam.step));
                    const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(adam.step));
                    for (std::size_t l = 0; l < net.layer_count(); ++l) {
                        DenseLayer& layer = net.layer(l);
                        adam.m_w[l] = cfg.adam_beta1 * adam.m_w[l] + (1.0 - cfg.adam_beta1) * g.weights[l];
                        adam.v_w[l] = cfg.adam_beta2 * adam.v_w[l] +
                                      (1.0 - cfg.adam_beta2) * g.weights[l].cwiseProduct(g.weights[l]);
                        adam.m_b[l] = cfg.adam_beta1 * adam.m_b[l] + (1.0 - cfg.adam_beta1) * g.biases[l];
                        adam.v_b[l] = cfg.adam_beta2 * adam.v_b[l] +
                                      (1.0 - cfg.adam_beta2) * g.biases[l].cwiseProduct(g.biases[l]);
                        const Eigen::MatrixXd step_w =
                            lr * (adam.m_w[l] / c1).array() / ((adam.v_w[l] / c2).array().sqrt() + cfg.adam_eps);
                        const Eigen::VectorXd step_b =
                            lr * (adam.m_b[l] / c1).array() / ((adam.v_b[l] / c2).array().sqrt() + cfg.adam_eps);
                        layer.weights = layer.trainable_weights.select(layer.weights - step_w, layer.weights);
                        layer.biases = layer.trainable_biases.select(layer.biases - step_b, layer.biases);
                        finite = finite && layer.finite();
                    }
                } else {
                    for (std::size_t l = 0; l < net.layer_count(); ++l) {
                        DenseLayer& layer = net.layer(l);
                        layer.weights = layer.trainable_weights.select(layer.weights - lr * g.weights[l], layer.weights);
                        layer.biases = layer.trainable_biases.select(layer.biases - lr * g.biases[l], layer.biases);
                        finite = finite && layer.finite();
                    }
                }
            }
            if (!finite) {
                net.layers() = snapshot;
                throw DivergenceError("training diverged in epoch " + std::to_string(epoch) +
                                      "; network restored to the last finite snapshot");
            }
        }
        report.loss_curve.push_back(epoch_loss / static_cast<double>(n));
        lr *= decay;
    }
    report.epochs = cfg.epochs;
    report.final_loss = loss(net, inputs, targets);
    if (!std::isfinite(report.final_loss)) throw DivergenceError("final loss is not finite");
    return report;
}

} // namespace gamla
