#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gamla/error.hpp"
#include "gamla/gamla.hpp"
#include "gamla_cli/cli.hpp"
#include "gamla_cli/run_config.hpp"

namespace fs = std::filesystem;
using gamla::cli::run;

namespace {

fs::path scratch() {
    const char* env = std::getenv("GAMLA_TEST_TMP");
    static const fs::path root = [&] {
        fs::path p = env ? fs::path(env) : fs::temp_directory_path() / "gamla_cli_test";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// Last artifact path printed by a command.
fs::path last_path(const Result& r) {
    std::istringstream in(r.out);
    std::string line, last;
    while (std::getline(in, line))
        if (!line.empty()) last = line;
    return last;
}

std::vector<std::string> small_run(const std::string& dir) {
    return {"--quiet",          "--out-dir",          (scratch() / dir).string(), "--set", "dataset.count=200",
            "--set",            "round1.epochs=20",   "--set",                   "round2.epochs=5"};
}

std::vector<std::string> with(std::vector<std::string> base, std::initializer_list<std::string> extra) {
    base.insert(base.end(), extra.begin(), extra.end());
    return base;
}

} // namespace

TEST_CASE("version and usage errors") {
    const Result v = invoke({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out == "gamla 0.1.0\n");

    const Result bogus = invoke({"frobnicate"});
    CHECK(bogus.code == gamla::cli::kConfigError);
    CHECK(bogus.err.rfind("error: usage:", 0) == 0);

    CHECK(invoke({}).code == gamla::cli::kConfigError);
    CHECK(invoke({"eval"}).code == gamla::cli::kConfigError); // --model is required
}

TEST_CASE("config errors map to exit code 2") {
    const Result r = invoke(with(small_run("cfg"), {"--set", "no.such_key=1", "generate"}));
    CHECK(r.code == gamla::cli::kConfigError);
    CHECK(r.err.rfind("error: schema:", 0) == 0);
    CHECK(invoke(with(small_run("cfg"), {"--set", "round1.lr=fast", "generate"})).code == gamla::cli::kConfigError);
    CHECK(invoke(with(small_run("cfg"), {"--set", "dataset.generator=torus", "generate"})).code ==
          gamla::cli::kConfigError);
}

TEST_CASE("missing files map to exit code 3") {
    const Result r = invoke(with(small_run("missing"), {"eval", "--model", (scratch() / "nope.json").string()}));
    CHECK(r.code == gamla::cli::kMissingFile);
    CHECK(r.err.rfind("error: io:", 0) == 0);
    CHECK(invoke(with(small_run("missing"), {"--config", (scratch() / "nope.cfg").string(), "generate"})).code ==
          gamla::cli::kMissingFile);
}

TEST_CASE("generate is deterministic and independent of the output root") {
    const Result a = invoke(with(small_run("gen_a"), {"--seed", "5", "generate"}));
    const Result b = invoke(with(small_run("gen_b"), {"--seed", "5", "generate"}));
    const Result c = invoke(with(small_run("gen_c"), {"--seed", "6", "generate"}));
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    REQUIRE(c.code == 0);
    const std::string da = read_all(last_path(a));
    CHECK(!da.empty());
    CHECK(da == read_all(last_path(b)));
    CHECK(da != read_all(last_path(c)));
    CHECK(last_path(a).filename() == "data.csv");
    CHECK(da.rfind("# ", 0) == 0);
}

TEST_CASE("config files in both formats") {
    const fs::path kv = scratch() / "run.cfg";
    std::ofstream(kv) << "# comment\nseed = 5\n[dataset]\ncount = 200\n";
    const fs::path js = scratch() / "run.json";
    std::ofstream(js) << R"({"seed": 5, "dataset": {"count": 200}})";
    const Result a = invoke({"--quiet", "--out-dir", (scratch() / "kv").string(), "--config", kv.string(), "generate"});
    const Result b = invoke({"--quiet", "--out-dir", (scratch() / "js").string(), "--config", js.string(), "generate"});
    REQUIRE(a.code == 0);
    REQUIRE(b.code == 0);
    CHECK(read_all(last_path(a)) == read_all(last_path(b)));
}

TEST_CASE("train, resume and downstream commands") {
    const Result r1 = invoke(with(small_run("pipe"), {"train", "--round1-only"}));
    REQUIRE(r1.code == 0);
    const fs::path m1 = last_path(r1);
    CHECK(gamla::load_model(m1).phase() == gamla::Phase::AfterRound1);

    // round-1 models have no complementary head
    CHECK(invoke(with(small_run("pipe"), {"taylor", "--model", m1.string()})).code == gamla::cli::kConfigError);

    const Result r2 = invoke(with(small_run("pipe"), {"train", "--resume", m1.string()}));
    REQUIRE(r2.code == 0);
    const fs::path m2 = last_path(r2);
    const gamla::GamlaModel resumed = gamla::load_model(m2);
    CHECK(resumed.phase() == gamla::Phase::AfterRound2);
    CHECK(resumed.network().layer(0).weights == gamla::load_model(m1).network().layer(0).weights);

    const Result full = invoke(with(small_run("pipe"), {"train"}));
    REQUIRE(full.code == 0);
    CHECK(gamla::load_model(last_path(full)).network() == resumed.network());

    const std::string model = m2.string();
    const Result gen = invoke(with(small_run("pipe"), {"generate"}));
    REQUIRE(gen.code == 0);
    const std::string data = last_path(gen).string();

    CHECK(invoke(with(small_run("pipe"), {"eval", "--model", model})).code == 0);
    CHECK(invoke(with(small_run("pipe"), {"eval", "--model", model, "--data", data})).code == 0);
    CHECK(invoke(with(small_run("pipe"), {"geometry", "--model", model, "--points", data})).code == 0);
    CHECK(invoke(with(small_run("pipe"), {"--set", "level_set.count=1000", "level-set", "--model", model})).code == 0);
    CHECK(invoke(with(small_run("pipe"), {"anomaly", "--model", model, "--data", data, "--normal", data})).code == 0);
    CHECK(invoke(with(small_run("pipe"), {"interpolate", "--model", model, "--a", "0,0,0", "--b", "1,0.5,0.4"})).code ==
          0);
    CHECK(invoke(with(small_run("pipe"), {"interpolate", "--model", model, "--data", data, "--from", "0", "--to", "3"}))
              .code == 0);
    CHECK(invoke(with(small_run("pipe"), {"chart", "--model", model})).code == 0);
    CHECK(invoke(with(small_run("pipe"), {"interpolate", "--model", model, "--a", "0,0"})).code ==
          gamla::cli::kConfigError);

    const Result e = invoke(with(small_run("pipe"), {"eval", "--model", model}));
    const nlohmann::json doc = nlohmann::json::parse(read_all(last_path(e)));
    CHECK(doc.at("tool").at("name") == "gamla");
    CHECK(doc.at("command") == "eval");
    CHECK(doc.at("config").at("dataset.count") == 200);
    CHECK(doc.contains("result"));
}

TEST_CASE("analysis commands") {
    const auto base = with(small_run("analysis"), {"--set", "dim_scan.repeats=1", "--set", "sweep.repeats=1", "--set",
                                                   "sweep.widths=4", "--set", "sweep.sigmas=0,0.01", "--set",
                                                   "sweep.layers=1"});
    CHECK(invoke(with(base, {"dim-scan"})).code == 0);
    CHECK(invoke(with(base, {"sweep-structure"})).code == 0);
    CHECK(invoke(with(base, {"sweep-noise"})).code == 0);
}

TEST_CASE("malformed inputs map to exit code 2") {
    const fs::path bad = scratch() / "bad.csv";
    std::ofstream(bad) << "x1,x2,x3\n1,2\n";
    CHECK(invoke(with(small_run("bad"), {"train", "--data", bad.string()})).code == gamla::cli::kConfigError);
    const fs::path junk = scratch() / "junk.json";
    std::ofstream(junk) << "{\"kind\": 3}";
    CHECK(invoke(with(small_run("bad"), {"eval", "--model", junk.string()})).code == gamla::cli::kConfigError);
}

TEST_CASE("numeric failures map to exit code 4") {
    // a complementary coordinate that is constant and nonzero has an empty zero set
    gamla::GamlaArchitecture arch = gamla::GamlaArchitecture::from_layer_sizes({3, 3, 2, 3, 3});
    gamla::MlpNetwork net = gamla::MlpNetwork::glorot(arch.layer_sizes(3), arch.activations(), 1);
    net.layer(1).weights.row(2).setZero();
    net.layer(1).biases(2) = 1.0;
    gamla::Hyperrectangle box;
    box.low = Eigen::Vector3d::Constant(-1);
    box.high = Eigen::Vector3d::Constant(1);
    const gamla::GamlaModel model(arch, net, gamla::Phase::AfterRound2, box);
    const fs::path path = scratch() / "flat_model.json";
    gamla::save_model(model, path);
    const Result r = invoke(with(small_run("numeric"), {"taylor", "--model", path.string()}));
    CHECK(r.code == gamla::cli::kNumericError);
    CHECK(r.err.rfind("error: degenerate-chart:", 0) == 0);
}

TEST_CASE("run config canonical form and hash") {
    gamla::cli::RunConfig a, b;
    a.set("round1.lr=0.010");
    b.set("round1.lr", "1e-2");
    CHECK(a.canonical() == b.canonical());
    CHECK(a.hash() == b.hash());
    b.set("out_dir=elsewhere");
    CHECK(a.hash() == b.hash());
    b.set("seed=1");
    CHECK(a.hash() != b.hash());
    CHECK(a.uint_list("arch.layers") == std::vector<std::uint64_t>{3, 3, 2, 3, 3});
    CHECK_THROWS_AS(a.set("seed=-1"), gamla::SchemaError);
    CHECK_THROWS_AS(a.set("missing_equals"), gamla::SchemaError);
}
