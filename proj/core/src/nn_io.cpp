#include <fstream>
#include <sstream>

#include "gamla/error.hpp"
#include "gamla/nn.hpp"

namespace gamla {

namespace {

constexpr int kNetworkSchemaVersion = 1;

template <class T>
T get_field(const nlohmann::json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("field '") + key + "' has the wrong type: " + e.what());
    }
}

nlohmann::json layer_to_json(const DenseLayer& layer) {
    nlohmann::json doc;
    doc["in"] = layer.in_dim();
    doc["out"] = layer.out_dim();
    doc["activation"] = to_string(layer.activation);
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(layer.weights.size()));
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
        for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) w.push_back(layer.weights(i, j));
    doc["weights"] = w;
    doc["biases"] = std::vector<double>(layer.biases.data(), layer.biases.data() + layer.biases.size());
    if (layer.trainable_weights.all() && layer.trainable_biases.all()) {
        doc["trainable"] = true;
    } else if (!layer.trainable_weights.any() && !layer.trainable_biases.any()) {
        doc["trainable"] = false;
    } else {
        std::vector<int> mw, mb;
        for (Eigen::Index i = 0; i < layer.trainable_weights.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.trainable_weights.cols(); ++j)
                mw.push_back(layer.trainable_weights(i, j) ? 1 : 0);
        for (Eigen::Index i = 0; i < layer.trainable_biases.size(); ++i) mb.push_back(layer.trainable_biases(i) ? 1 : 0);
        doc["trainable"] = {{"weights", mw}, {"biases", mb}};
    }
    return doc;
}

DenseLayer layer_from_json(const nlohmann::json& doc) {
    const auto in = get_field<std::size_t>(doc, "in");
    const auto out = get_field<std::size_t>(doc, "out");
    if (in == 0 || out == 0) throw SchemaError("layer dimensions must be positive");
    DenseLayer layer(in, out, activation_from_string(get_field<std::string>(doc, "activation")));
    const auto w = get_field<std::vector<double>>(doc, "weights");
    const auto b = get_field<std::vector<double>>(doc, "biases");
    if (w.size() != in * out) throw SchemaError("layer weight count does not match in*out");
    if (b.size() != out) throw SchemaError("layer bias count does not match out");
    std::size_t k = 0;
    for (std::size_t i = 0; i < out; ++i)
        for (std::size_t j = 0; j < in; ++j)
            layer.weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w[k++];
    for (std::size_t i = 0; i < out; ++i) layer.biases(static_cast<Eigen::Index>(i)) = b[i];

    if (!doc.contains("trainable")) throw SchemaError("missing field 'trainable'");
    const auto& t = doc.at("trainable");
    if (t.is_boolean()) {
        layer.set_trainable(t.get<bool>());
    } else {
        const auto mw = get_field<std::vector<int>>(t, "weights");
        const auto mb = get_field<std::vector<int>>(t, "biases");
        if (mw.size() != in * out || mb.size() != out) throw SchemaError("trainability mask has the wrong size");
        k = 0;
        for (std::size_t i = 0; i < out; ++i)
            for (std::size_t j = 0; j < in; ++j)
                layer.trainable_weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = mw[k++] != 0;
        for (std::size_t i = 0; i < out; ++i) layer.trainable_biases(static_cast<Eigen::Index>(i)) = mb[i] != 0;
    }
    return layer;
}

} // namespace

nlohmann::json to_json(const MlpNetwork& net) {
    nlohmann::json doc;
    doc["schema_version"] = kNetworkSchemaVersion;
    doc["kind"] = "mlp";
    doc["dims"] = {{"input", net.input_dim()}, {"output", net.output_dim()}};
    nlohmann::json layers = nlohmann::json::array();
    for (const auto& layer : net.layers()) layers.push_back(layer_to_json(layer));
    doc["layers"] = std::move(layers);
    return doc;
}

MlpNetwork network_from_json(const nlohmann::json& doc) {
    if (get_field<int>(doc, "schema_version") != kNetworkSchemaVersion) throw SchemaError("unsupported network schema version");
    if (get_field<std::string>(doc, "kind") != "mlp") throw SchemaError("document is not an mlp network");
    if (!doc.contains("layers") || !doc.at("layers").is_array() || doc.at("layers").empty())
        throw SchemaError("network has no layers");
    std::vector<DenseLayer> layers;
    for (const auto& l : doc.at("layers")) layers.push_back(layer_from_json(l));
    MlpNetwork net;
    net.layers() = std::move(layers);
    try {
        net.validate();
    } catch (const ContractError& e) {
        throw SchemaError(std::string("inconsistent network: ") + e.what());
    }
    const auto& dims = doc.at("dims");
    if (get_field<std::size_t>(dims, "input") != net.input_dim() || get_field<std::size_t>(dims, "output") != net.output_dim())
        throw SchemaError("network dims do not match its layers");
    return net;
}

nlohmann::json to_json(const TrainConfig& cfg) {
    return {{"learning_rate", cfg.learning_rate},
            {"epochs", cfg.epochs},
            {"batch_size", cfg.batch_size},
            {"seed", cfg.seed},
            {"optimizer", cfg.optimizer == Optimizer::Adam ? "adam" : "sgd"},
            {"adam_beta1", cfg.adam_beta1},
            {"adam_beta2", cfg.adam_beta2},
            {"adam_eps", cfg.adam_eps},
            {"final_lr_fraction", cfg.final_lr_fraction}};
}

TrainConfig train_config_from_json(const nlohmann::json& doc) {
    TrainConfig cfg;
    cfg.learning_rate = get_field<double>(doc, "learning_rate");
    cfg.epochs = get_field<std::size_t>(doc, "epochs");
    cfg.batch_size = get_field<std::size_t>(doc, "batch_size");
    cfg.seed = get_field<std::uint64_t>(doc, "seed");
    const auto opt = get_field<std::string>(doc, "optimizer");
    if (opt == "adam")
        cfg.optimizer = Optimizer::Adam;
    else if (opt == "sgd")
        cfg.optimizer = Optimizer::Sgd;
    else
        throw SchemaError("unknown optimizer '" + opt + "'");
    cfg.adam_beta1 = get_field<double>(doc, "adam_beta1");
    cfg.adam_beta2 = get_field<double>(doc, "adam_beta2");
    cfg.adam_eps = get_field<double>(doc, "adam_eps");
    cfg.final_lr_fraction = get_field<double>(doc, "final_lr_fraction");
    return cfg;
}

nlohmann::json to_json(const TrainReport& report) {
    return {{"initial_loss", report.initial_loss},
            {"final_loss", report.final_loss},
            {"epochs", report.epochs},
            {"loss_curve", report.loss_curve}};
}

TrainReport train_report_from_json(const nlohmann::json& doc) {
    TrainReport r;
    r.initial_loss = get_field<double>(doc, "initial_loss");
    r.final_loss = get_field<double>(doc, "final_loss");
    r.epochs = get_field<std::size_t>(doc, "epochs");
    r.loss_curve = get_field<std::vector<double>>(doc, "loss_curve");
    return r;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return nlohmann::json::parse(buffer.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void write_json_file(const nlohmann::json& doc, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

void save_network(const MlpNetwork& net, const std::filesystem::path& path) { write_json_file(to_json(net), path); }

MlpNetwork load_network(const std::filesystem::path& path) { return network_from_json(read_json_file(path)); }

} // namespace gamla
