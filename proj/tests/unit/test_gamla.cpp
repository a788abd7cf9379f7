#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "gamla/datasets.hpp"
#include "gamla/error.hpp"
#include "gamla/gamla.hpp"

using namespace gamla;

namespace {

TrainConfig quick_config(std::size_t epochs, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.epochs = epochs;
    cfg.batch_size = 32;
    cfg.seed = seed;
    return cfg;
}

GamlaModel quick_round1(std::size_t epochs = 5) {
    set_warnings_enabled(false);
    const PointCloud cloud = gen_quadric(200, 1);
    GamlaModel model = train_round1(cloud, GamlaArchitecture::from_layer_sizes({3, 3, 2, 3, 3}), quick_config(epochs, 2));
    set_warnings_enabled(true);
    return model;
}

} // namespace

TEST_CASE("architecture from structure and layer sizes") {
    const GamlaArchitecture a = GamlaArchitecture::from_structure(3, 2, 3, 6);
    CHECK(a.layer_sizes(2) == std::vector<std::size_t>{3, 6, 6, 6, 2, 6, 6, 6, 3});
    CHECK(a.bottleneck_layer() == 3);
    const std::vector<Activation> acts = a.activations();
    REQUIRE(acts.size() == 8);
    CHECK(acts[0] == Activation::Tanh);
    CHECK(acts[3] == Activation::Identity);
    CHECK(acts[4] == Activation::Tanh);
    CHECK(acts[7] == Activation::Identity);

    const GamlaArchitecture b = GamlaArchitecture::from_layer_sizes({3, 24, 12, 6, 2, 6, 12, 24, 3});
    CHECK(b.ambient_dim == 3);
    CHECK(b.intrinsic_dim == 2);
    CHECK(b.hidden_dims == std::vector<std::size_t>{24, 12, 6});

    CHECK_THROWS_AS(GamlaArchitecture::from_layer_sizes({3, 4, 2, 5, 3}), ContractError);
    CHECK_THROWS_AS(GamlaArchitecture::from_layer_sizes({3, 3, 3, 3}), ContractError);
    CHECK_THROWS_AS(GamlaArchitecture::from_layer_sizes({3, 3, 3, 3, 3}).validate(), ContractError);
    CHECK_NOTHROW(GamlaArchitecture::from_layer_sizes({3, 3, 3, 3, 3}).validate(true));
    CHECK_THROWS_AS(GamlaArchitecture::from_layer_sizes({3, 2, 1, 2, 3}).validate(), ContractError);
}

TEST_CASE("expansion adds exactly the new blocks and keeps round-1 behaviour") {
    const GamlaModel r1 = quick_round1();
    CHECK(r1.network().parameter_count() == 41);
    CHECK(r1.complement_dim() == 0);

    const GamlaModel ex = expand_bottleneck(r1, 7);
    CHECK(ex.phase() == Phase::Expanded);
    CHECK(ex.network().parameter_count() == 48);
    // new bottleneck row (3 weights, 1 bias) and new decoder column (3 weights)
    CHECK(ex.network().trainable_parameter_count() == 7);
    CHECK(ex.complement_dim() == 1);
    CHECK_THROWS_AS(expand_bottleneck(ex, 7), ContractError);

    const PointCloud probe = gen_quadric(25, 3);
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const Eigen::VectorXd x = probe.point(i);
        const LatentPoint a = r1.encode(x);
        const LatentPoint b = ex.encode(x);
        CHECK(a.z == b.z);
        CHECK(b.z_tilde.size() == 1);
        // z~ = 0 reproduces the round-1 decoder bitwise
        CHECK(ex.decode({b.z, Eigen::VectorXd::Zero(1)}) == r1.decode(a));
        CHECK(ex.project(x) == r1.reconstruct(x));
    }
    CHECK(ex.decode_batch(r1.encode_batch(probe.points)) == r1.decode_batch(r1.encode_batch(probe.points)));

    // zero new decoder column: full reconstruction equals round 1
    GamlaModel zeroed = ex;
    const std::size_t k = zeroed.architecture().bottleneck_layer();
    zeroed.network().layer(k + 1).weights.rightCols(1).setZero();
    CHECK(zeroed.reconstruct_batch(probe.points) == r1.reconstruct_batch(probe.points));
}

TEST_CASE("round 2 trains only the new parameters") {
    const GamlaModel r1 = quick_round1();
    const GamlaModel ex = expand_bottleneck(r1, 7);
    CHECK_THROWS_AS(ex.complement(Eigen::Vector3d::Zero()), ContractError);
    CHECK_THROWS_AS(train_round2(r1, gen_quadric(10, 1), {}, quick_config(1, 1)), ContractError);

    const PointCloud cloud = gen_quadric(200, 1);
    const GamlaModel r2 = train_round2(ex, cloud, {}, quick_config(3, 4));
    CHECK(r2.phase() == Phase::AfterRound2);
    REQUIRE(r2.round2_report.has_value());

    const std::size_t k = r1.architecture().bottleneck_layer();
    for (std::size_t l = 0; l < r1.network().layer_count(); ++l) {
        const DenseLayer& before = r1.network().layer(l);
        const DenseLayer& after = r2.network().layer(l);
        CHECK(after.weights.topLeftCorner(before.weights.rows(), before.weights.cols()) == before.weights);
        CHECK(after.biases.head(before.biases.size()) == before.biases);
    }
    CHECK_FALSE(r2.network().layer(k).weights.bottomRows(1) == ex.network().layer(k).weights.bottomRows(1));

    const Eigen::VectorXd x = cloud.point(0);
    CHECK(r2.complement(x)(0) == r2.encode(x).z_tilde(0));
    CHECK(r2.complement_batch(cloud.points.topRows(1))(0, 0) == r2.complement(x)(0));
}

TEST_CASE("ambient sampling stays in the box and is seeded") {
    Hyperrectangle box;
    box.low = Eigen::Vector3d(-1, 0, 2);
    box.high = Eigen::Vector3d(1, 0.5, 3);
    const PointCloud a = sample_ambient(box, 500, 9);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(box.contains(a.point(i)));
    CHECK(a.points == sample_ambient(box, 500, 9).points);
    CHECK_FALSE(a.points == sample_ambient(box, 500, 10).points);
}

TEST_CASE("bounding box widens by the margin fraction of the extent") {
    Eigen::MatrixXd pts(2, 2);
    pts << 0, 1, 4, 3;
    const Hyperrectangle box = Hyperrectangle::bounding(pts, 0.25);
    CHECK(box.low(0) == doctest::Approx(-0.5));
    CHECK(box.high(0) == doctest::Approx(4.5));
    CHECK(box.low(1) == doctest::Approx(0.75));
    CHECK(box.high(1) == doctest::Approx(3.25));
}

TEST_CASE("round 1 flags incomplete reconstruction") {
    const GamlaModel r1 = quick_round1(1);
    CHECK(r1.round1_mse > 1e-4);
    CHECK_FALSE(r1.fully_reconstructed);
}

TEST_CASE("model save and load") {
    const GamlaModel r1 = quick_round1();
    const GamlaModel r2 = train_round2(expand_bottleneck(r1, 1), gen_quadric(100, 2), {}, quick_config(2, 3));
    const auto path = std::filesystem::temp_directory_path() / "gamla_test_model.json";
    save_model(r2, path, {{"note", "unit"}});
    const GamlaModel back = load_model(path);
    CHECK(back.phase() == Phase::AfterRound2);
    CHECK(back.network() == r2.network());
    CHECK(back.ambient_box().low == r2.ambient_box().low);
    CHECK(back.round1_mse == r2.round1_mse);
    CHECK(back.fully_reconstructed == r2.fully_reconstructed);
    const Eigen::Vector3d x(0.1, -0.2, 0.3);
    CHECK(back.complement(x) == r2.complement(x));

    nlohmann::json doc = to_json(r2);
    doc["phase"] = "sideways";
    CHECK_THROWS_AS(model_from_json(doc), SchemaError);
    doc = to_json(r2);
    doc.erase("architecture");
    CHECK_THROWS_AS(model_from_json(doc), SchemaError);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_model(path), IoError);
}

TEST_CASE("dimension mismatches are contract errors") {
    const GamlaModel r1 = quick_round1();
    CHECK_THROWS_AS(r1.encode(Eigen::VectorXd::Zero(2)), ContractError);
    CHECK_THROWS_AS(r1.decode({Eigen::VectorXd::Zero(3), {}}), ContractError);
    PointCloud flat;
    flat.points = Eigen::MatrixXd::Zero(5, 2);
    CHECK_THROWS_AS(train_round1(flat, r1.architecture(), quick_config(1, 1)), ContractError);
}
