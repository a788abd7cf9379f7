#include "gamla/error.hpp"
#include "gamla/gamla.hpp"

namespace gamla {

namespace {

constexpr int kModelSchemaVersion = 1;

const nlohmann::json& field(const nlohmann::json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
    return doc.at(key);
}

template <class T>
T get(const nlohmann::json& doc, const char* key) {
    try {
        return field(doc, key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("field '") + key + "' has the wrong type: " + e.what());
    }
}

Eigen::VectorXd vector_from(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

} // namespace

nlohmann::json to_json(const GamlaArchitecture& arch) {
    return {{"ambient_dim", arch.ambient_dim},
            {"intrinsic_dim", arch.intrinsic_dim},
            {"hidden_dims", arch.hidden_dims},
            {"layer_sizes", arch.layer_sizes(arch.intrinsic_dim)}};
}

GamlaArchitecture architecture_from_json(const nlohmann::json& doc) {
    GamlaArchitecture arch;
    arch.ambient_dim = get<std::size_t>(doc, "ambient_dim");
    arch.intrinsic_dim = get<std::size_t>(doc, "intrinsic_dim");
    arch.hidden_dims = get<std::vector<std::size_t>>(doc, "hidden_dims");
    try {
        arch.validate();
    } catch (const ContractError& e) {
        throw SchemaError(std::string("invalid architecture: ") + e.what());
    }
    return arch;
}

nlohmann::json to_json(const Hyperrectangle& box) {
    return {{"low", std::vector<double>(box.low.data(), box.low.data() + box.low.size())},
            {"high", std::vector<double>(box.high.data(), box.high.data() + box.high.size())}};
}

Hyperrectangle hyperrectangle_from_json(const nlohmann::json& doc) {
    Hyperrectangle box{vector_from(get<std::vector<double>>(doc, "low")), vector_from(get<std::vector<double>>(doc, "high"))};
    try {
        box.validate();
    } catch (const ContractError& e) {
        throw SchemaError(std::string("invalid hyperrectangle: ") + e.what());
    }
    return box;
}

nlohmann::json to_json(const GamlaModel& model) {
    nlohmann::json doc;
    doc["schema_version"] = kModelSchemaVersion;
    doc["kind"] = "gamla-model";
    doc["phase"] = to_string(model.phase());
    doc["dims"] = {{"n", model.ambient_dim()}, {"m", model.intrinsic_dim()}};
    doc["architecture"] = to_json(model.architecture());
    doc["ambient_box"] = to_json(model.ambient_box());
    doc["network"] = to_json(model.network());
    nlohmann::json r1 = {{"mse", model.round1_mse}, {"xi", model.xi}, {"fully_reconstructed", model.fully_reconstructed}};
    if (model.round1_config) r1["config"] = to_json(*model.round1_config);
    if (model.round1_report) r1["report"] = to_json(*model.round1_report);
    doc["round1"] = std::move(r1);
    if (model.round2_config || model.round2_report) {
        nlohmann::json r2 = nlohmann::json::object();
        if (model.round2_config) r2["config"] = to_json(*model.round2_config);
        if (model.round2_report) r2["report"] = to_json(*model.round2_report);
        doc["round2"] = std::move(r2);
    }
    return doc;
}

GamlaModel model_from_json(const nlohmann::json& doc) {
    if (get<int>(doc, "schema_version") != kModelSchemaVersion) throw SchemaError("unsupported model schema version");
    if (get<std::string>(doc, "kind") != "gamla-model") throw SchemaError("document is not a GAMLA model");
    const Phase phase = phase_from_string(get<std::string>(doc, "phase"));
    GamlaArchitecture arch = architecture_from_json(field(doc, "architecture"));
    const auto& dims = field(doc, "dims");
    if (get<std::size_t>(dims, "n") != arch.ambient_dim || get<std::size_t>(dims, "m") != arch.intrinsic_dim)
        throw SchemaError("model dims do not match its architecture");
    MlpNetwork net = network_from_json(field(doc, "network"));
    Hyperrectangle box = hyperrectangle_from_json(field(doc, "ambient_box"));

    GamlaModel model;
    try {
        model = GamlaModel(std::move(arch), std::move(net), phase, std::move(box));
    } catch (const ContractError& e) {
        throw SchemaError(std::string("inconsistent model: ") + e.what());
    }
    const auto& r1 = field(doc, "round1");
    model.round1_mse = get<double>(r1, "mse");
    model.xi = get<double>(r1, "xi");
    model.fully_reconstructed = get<bool>(r1, "fully_reconstructed");
    if (r1.contains("config")) model.round1_config = train_config_from_json(r1.at("config"));
    if (r1.contains("report")) model.round1_report = train_report_from_json(r1.at("report"));
    if (doc.contains("round2")) {
        const auto& r2 = doc.at("round2");
        if (r2.contains("config")) model.round2_config = train_config_from_json(r2.at("config"));
        if (r2.contains("report")) model.round2_report = train_report_from_json(r2.at("report"));
    }
    return model;
}

void save_model(const GamlaModel& model, const std::filesystem::path& path, const nlohmann::json& metadata) {
    nlohmann::json doc = to_json(model);
    if (!metadata.is_null()) doc["metadata"] = metadata;
    write_json_file(doc, path);
}

GamlaModel load_model(const std::filesystem::path& path) { return model_from_json(read_json_file(path)); }

} // namespace gamla
