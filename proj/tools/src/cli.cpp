#include "gamla_cli/cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gamla/analysis.hpp"
#include "gamla/datasets.hpp"
#include "gamla/error.hpp"
#include "gamla/gamla.hpp"
#include "gamla/geometry.hpp"
#include "gamla/seeding.hpp"
#include "gamla_cli/run_config.hpp"

namespace gamla::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Seed streams derived from the single `seed` key.
enum SeedStream : std::uint64_t {
    kDataSeed = 1,
    kRound1Seed = 2,
    kExpandSeed = 3,
    kRound2Seed = 4,
    kLevelSetSeed = 5,
    kScanSeed = 6,
    kSweepSeed = 7,
    kNoiseSeed = 9,
};

std::uint64_t file_hash(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[4096];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

struct Context {
    std::string command;
    json arguments = json::object(); // non-file subcommand options
    RunConfig cfg;
    json inputs = json::object();
    std::ostream* out = nullptr;

    void add_input(const std::string& role, const fs::path& path) {
        if (!fs::exists(path)) throw IoError("input file '" + path.string() + "' does not exist");
        inputs[role] = {{"file", path.filename().string()}, {"fnv1a64", hex(file_hash(path))}};
    }

    // Directory named by a hash of the command, its options, the
    // configuration and the input contents.
    fs::path run_dir() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : command + '\n' + arguments.dump() + '\n' + cfg.canonical() + inputs.dump()) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        fs::path dir = fs::path(cfg.text("out_dir")) / ("run-" + hex(h));
        fs::create_directories(dir);
        return dir;
    }

    json provenance() const {
        return {{"tool", {{"name", kToolName}, {"version", kToolVersion}}},
                {"command", command},
                {"arguments", arguments},
                {"config", cfg.echo()},
                {"inputs", inputs}};
    }

    std::string csv_comment() const {
        return std::string(kToolName) + " " + kToolVersion + "\ncommand " + command + "\narguments " + arguments.dump() +
               "\nconfig " + cfg.echo().dump() +
               "\ninputs " + inputs.dump();
    }

    std::uint64_t seed(SeedStream stream) const { return derive_seed(cfg.uint("seed"), stream); }

    void wrote(const fs::path& path) const { *out << path.string() << '\n'; }
};

// Subcommand options other than input files, which enter through their contents.
json subcommand_arguments(const CLI::App& sub) {
    static const std::set<std::string> files{"data", "model", "points", "normal", "resume"};
    json args = json::object();
    for (const CLI::Option* opt : sub.get_options()) {
        const std::string name = opt->get_single_name();
        if (opt->count() == 0 || name == "help" || files.count(name) != 0) continue;
        const auto& results = opt->results();
        args[name] = results.size() == 1 ? json(results.front()) : json(results);
    }
    return args;
}

void write_artifact(const Context& ctx, const fs::path& path, json result) {
    json doc = ctx.provenance();
    doc["result"] = std::move(result);
    write_json_file(doc, path);
    ctx.wrote(path);
}

CsvOptions csv_options(const RunConfig& cfg) { return CsvOptions{cfg.flag("csv.header"), cfg.flag("csv.labels")}; }

PointCloud generate_dataset(const RunConfig& cfg, std::uint64_t seed, std::uint64_t noise_seed) {
    const std::string& gen = cfg.text("dataset.generator");
    const std::size_t count = cfg.uint("dataset.count");
    PointCloud cloud;
    if (gen == "quadric")
        cloud = gen_quadric(count, seed);
    else if (gen == "cylinder")
        cloud = gen_cylinder(count, seed);
    else if (gen == "swiss_roll")
        cloud = gen_swiss_roll(count, seed);
    else if (gen == "quadric_hole")
        cloud = gen_quadric_with_hole(count, seed,
                                      Hole{cfg.real("dataset.hole_x1"), cfg.real("dataset.hole_x2"),
                                           cfg.real("dataset.hole_radius")});
    else
        throw SchemaError("unknown dataset.generator '" + gen + "' (quadric, cylinder, swiss_roll, quadric_hole)");
    const double sigma = cfg.real("dataset.noise");
    return sigma > 0.0 ? add_noise(cloud, sigma, noise_seed) : cloud;
}

// Reads --data when given, otherwise generates the configured dataset.
PointCloud input_cloud(Context& ctx, const std::string& path, const std::string& role = "data") {
    if (!path.empty()) {
        ctx.add_input(role, path);
        return load_csv(path, csv_options(ctx.cfg));
    }
    return generate_dataset(ctx.cfg, ctx.seed(kDataSeed), ctx.seed(kNoiseSeed));
}

PointCloud required_cloud(Context& ctx, const std::string& path, const std::string& role) {
    if (path.empty()) throw ContractError("--" + role + " is required");
    return input_cloud(ctx, path, role);
}

GamlaModel input_model(Context& ctx, const std::string& path) {
    if (path.empty()) throw ContractError("--model is required");
    ctx.add_input("model", path);
    return load_model(path);
}

std::vector<std::size_t> to_sizes(const std::vector<std::uint64_t>& v) { return {v.begin(), v.end()}; }

GamlaArchitecture architecture(const RunConfig& cfg) {
    return GamlaArchitecture::from_layer_sizes(to_sizes(cfg.uint_list("arch.layers")));
}

TrainConfig train_config(const RunConfig& cfg, const std::string& round, std::uint64_t seed) {
    TrainConfig t;
    t.learning_rate = cfg.real(round + ".lr");
    t.epochs = cfg.uint(round + ".epochs");
    t.batch_size = cfg.uint(round + ".batch_size");
    t.seed = seed;
    const std::string& opt = cfg.text(round + ".optimizer");
    if (opt == "adam")
        t.optimizer = Optimizer::Adam;
    else if (opt == "sgd")
        t.optimizer = Optimizer::Sgd;
    else
        throw SchemaError("unknown " + round + ".optimizer '" + opt + "' (adam, sgd)");
    t.final_lr_fraction = cfg.real(round + ".final_lr_fraction");
    t.adam_beta1 = cfg.real(round + ".beta1");
    t.adam_beta2 = cfg.real(round + ".beta2");
    t.adam_eps = cfg.real(round + ".adam_eps");
    t.validate();
    return t;
}

Eigen::VectorXd parse_point(const std::string& text, const std::string& what) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size() && item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw SchemaError(what + ": '" + item + "' is not a number");
        }
    }
    if (values.empty()) throw SchemaError(what + " is empty");
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json stats(std::vector<double> v) {
    if (v.empty()) return json::object();
    const Summary s = summarize(v);
    return {{"mean", s.mean},
            {"p50", quantile(v, 0.5)},
            {"p99", quantile(v, 0.99)},
            {"max", quantile(v, 1.0)}};
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// ----------------------------------------------------------------- commands

struct Inputs {
    std::string data;
    std::string model;
    std::string points;
    std::string normal;
    std::string resume;
    bool round1_only = false;
    bool full = false;
    long from = -1;
    long to = -1;
    std::string a;
    std::string b;
};

void cmd_generate(Context& ctx, const Inputs&) {
    const PointCloud cloud = generate_dataset(ctx.cfg, ctx.seed(kDataSeed), ctx.seed(kNoiseSeed));
    const fs::path path = ctx.run_dir() / "data.csv";
    save_csv(cloud, path, ctx.csv_comment());
    ctx.wrote(path);
}

void cmd_train(Context& ctx, const Inputs& in) {
    if (in.round1_only && (in.full || !in.resume.empty()))
        throw ContractError("--round1-only cannot be combined with --full or --resume");
    const PointCloud cloud = input_cloud(ctx, in.data);
    GamlaModel model;
    if (!in.resume.empty()) {
        ctx.add_input("resume", in.resume);
        model = load_model(in.resume);
        if (model.phase() != Phase::AfterRound1) throw ContractError("--resume needs a model after round 1");
    } else {
        Round1Options r1;
        r1.xi = ctx.cfg.real("thresholds.xi");
        r1.box_margin = ctx.cfg.real("box.margin");
        model = train_round1(cloud, architecture(ctx.cfg), train_config(ctx.cfg, "round1", ctx.seed(kRound1Seed)), r1);
    }
    if (!in.round1_only) {
        Round2Options r2;
        r2.ambient_count = ctx.cfg.uint("round2.ambient_count");
        r2.manifold_mix_fraction = ctx.cfg.real("round2.mix_fraction");
        const GamlaModel expanded = expand_bottleneck(model, ctx.seed(kExpandSeed));
        model = train_round2(expanded, cloud, r2, train_config(ctx.cfg, "round2", ctx.seed(kRound2Seed)));
    }
    const fs::path path = ctx.run_dir() / "model.json";
    save_model(model, path, ctx.provenance());
    ctx.wrote(path);
}

void cmd_eval(Context& ctx, const Inputs& in) {
    const GamlaModel model = input_model(ctx, in.model);
    const PointCloud cloud = input_cloud(ctx, in.data);
    const Eigen::MatrixXd rec = model.reconstruct_batch(cloud.points);
    const Eigen::MatrixXd prj = model.project_batch(cloud.points);
    json result = {{"phase", to_string(model.phase())},
                   {"points", cloud.size()},
                   {"reconstruction_mse", mean_squared_error(cloud.points, rec)},
                   {"reconstruction_error", stats(to_vector((cloud.points - rec).rowwise().norm()))},
                   {"projection_error", stats(to_vector((cloud.points - prj).rowwise().norm()))},
                   {"fully_reconstructed", model.fully_reconstructed},
                   {"round1_mse", model.round1_mse}};
    if (model.phase() == Phase::AfterRound2) {
        const Eigen::MatrixXd r = model.complement_batch(cloud.points);
        const Eigen::VectorXd rinf = r.cwiseAbs().rowwise().maxCoeff();
        const double eps = ctx.cfg.real("thresholds.eps");
        result["complement_abs"] = stats(to_vector(rinf));
        result["eps"] = eps;
        result["fraction_below_eps"] =
            static_cast<double>((rinf.array() < eps).count()) / static_cast<double>(std::max<Eigen::Index>(1, rinf.size()));
    }
    write_artifact(ctx, ctx.run_dir() / "eval.json", std::move(result));
}

void cmd_geometry(Context& ctx, const Inputs& in) {
    const GamlaModel model = input_model(ctx, in.model);
    const PointCloud pts = required_cloud(ctx, in.points, "points");
    const ImplicitHead head = complementary_head(model);
    SurfacePointOptions opt;
    opt.gradient_floor = ctx.cfg.real("geometry.gradient_floor");
    const bool curvature = model.ambient_dim() == 3 && head.output_dim() == 1;

    const fs::path path = ctx.run_dir() / "geometry.csv";
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    std::istringstream comment(ctx.csv_comment());
    for (std::string l; std::getline(comment, l);) out << "# " << l << '\n';
    const std::size_t n = model.ambient_dim();
    for (std::size_t i = 0; i < n; ++i) out << 'x' << i + 1 << ',';
    for (std::size_t i = 0; i < head.output_dim(); ++i) out << 'R' << i + 1 << ',';
    for (std::size_t i = 0; i < n; ++i) out << 'n' << i + 1 << ',';
    out << "K,status\n";
    for (std::size_t p = 0; p < pts.size(); ++p) {
        const Eigen::VectorXd x = pts.point(p);
        const Eigen::VectorXd r = head.value(x);
        for (Eigen::Index i = 0; i < x.size(); ++i) out << format_double(x(i)) << ',';
        for (Eigen::Index i = 0; i < r.size(); ++i) out << format_double(r(i)) << ',';
        std::string status = "ok";
        Eigen::VectorXd normal = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), std::nan(""));
        double k = std::nan("");
        try {
            if (head.output_dim() == 1) normal = normal_vector(head, x, opt);
            if (curvature) k = gaussian_curvature(head, x, opt);
        } catch (const SingularPointError&) {
            status = "singular";
        }
        for (Eigen::Index i = 0; i < normal.size(); ++i) out << (std::isnan(normal(i)) ? "nan" : format_double(normal(i))) << ',';
        out << (std::isnan(k) ? "nan" : format_double(k)) << ',' << status << '\n';
    }
    if (!out) throw IoError("write to '" + path.string() + "' failed");
    ctx.wrote(path);
}

void cmd_taylor(Context& ctx, const Inputs& in) {
    const GamlaModel model = input_model(ctx, in.model);
    TaylorFitOptions base;
    base.half_width = ctx.cfg.real("taylor.half_width");
    base.grid = ctx.cfg.uint("taylor.grid");
    const TaylorPoly2D poly =
        fit_implicit_taylor(complementary_head(model), ctx.cfg.real("thresholds.tau"), taylor_options_for(model, base));
    write_artifact(ctx, ctx.run_dir() / "taylor.json", to_json(poly));
}

void cmd_level_set(Context& ctx, const Inputs& in) {
    const GamlaModel model = input_model(ctx, in.model);
    LevelSetSpec spec;
    spec.eps = ctx.cfg.real("thresholds.eps");
    spec.count = ctx.cfg.uint("level_set.count");
    spec.box = model.ambient_box();
    const auto low = ctx.cfg.real_list("level_set.low");
    const auto high = ctx.cfg.real_list("level_set.high");
    if (!low.empty() || !high.empty()) {
        if (low.size() != model.ambient_dim() || high.size() != model.ambient_dim())
            throw ContractError("level_set.low and level_set.high need one value per ambient axis");
        spec.box.low = Eigen::Map<const Eigen::VectorXd>(low.data(), static_cast<Eigen::Index>(low.size()));
        spec.box.high = Eigen::Map<const Eigen::VectorXd>(high.data(), static_cast<Eigen::Index>(high.size()));
    }
    const PointCloud kept = filter_level_set(complementary_head(model), spec, ctx.seed(kLevelSetSeed));
    const fs::path path = ctx.run_dir() / "level_set.csv";
    PointCloud out = kept;
    if (out.points.cols() == 0) out.points.resize(0, static_cast<Eigen::Index>(model.ambient_dim()));
    save_csv(out, path, ctx.csv_comment());
    ctx.wrote(path);
}

void cmd_dim_scan(Context& ctx, const Inputs& in) {
    const PointCloud cloud = input_cloud(ctx, in.data);
    DimScanOptions opt;
    opt.repeats = ctx.cfg.uint("dim_scan.repeats");
    opt.rho = ctx.cfg.real("thresholds.rho");
    opt.seed = ctx.seed(kScanSeed);
    opt.threads = static_cast<unsigned>(ctx.cfg.uint("sweep.threads"));
    const DimScanReport report = dim_scan(cloud, to_sizes(ctx.cfg.uint_list("dim_scan.candidates")), architecture(ctx.cfg),
                                          train_config(ctx.cfg, "round1", 0), opt);
    const fs::path dir = ctx.run_dir();
    write_dim_scan_csv(report, dir / "dim_scan.csv", ctx.csv_comment());
    ctx.wrote(dir / "dim_scan.csv");
    write_artifact(ctx, dir / "dim_scan.json", to_json(report));
}

SweepOptions sweep_options(const Context& ctx) {
    SweepOptions opt;
    opt.repeats = ctx.cfg.uint("sweep.repeats");
    opt.seed = ctx.seed(kSweepSeed);
    opt.threads = static_cast<unsigned>(ctx.cfg.uint("sweep.threads"));
    return opt;
}

void cmd_sweep_structure(Context& ctx, const Inputs& in) {
    const PointCloud cloud = input_cloud(ctx, in.data);
    const SweepGrid grid = sweep_structure(cloud, architecture(ctx.cfg).intrinsic_dim,
                                           to_sizes(ctx.cfg.uint_list("sweep.layers")),
                                           to_sizes(ctx.cfg.uint_list("sweep.widths")),
                                           train_config(ctx.cfg, "round1", 0), sweep_options(ctx));
    const fs::path dir = ctx.run_dir();
    write_sweep_csv(grid, dir / "sweep_structure.csv", ctx.csv_comment());
    ctx.wrote(dir / "sweep_structure.csv");
    write_artifact(ctx, dir / "sweep_structure.json", to_json(grid));
}

void cmd_sweep_noise(Context& ctx, const Inputs& in) {
    const PointCloud cloud = input_cloud(ctx, in.data);
    const SweepGrid grid = sweep_noise(cloud, ctx.cfg.real_list("sweep.sigmas"), architecture(ctx.cfg),
                                       train_config(ctx.cfg, "round1", 0), sweep_options(ctx));
    const fs::path dir = ctx.run_dir();
    write_sweep_csv(grid, dir / "sweep_noise.csv", ctx.csv_comment());
    ctx.wrote(dir / "sweep_noise.csv");
    write_artifact(ctx, dir / "sweep_noise.json", to_json(grid));
}

void cmd_anomaly(Context& ctx, const Inputs& in) {
    const GamlaModel model = input_model(ctx, in.model);
    const PointCloud cloud = required_cloud(ctx, in.data, "data");
    AnomalyThresholds thresholds;
    if (!in.normal.empty()) {
        const PointCloud normal = required_cloud(ctx, in.normal, "normal");
        thresholds = calibrate_thresholds(model, normal, ctx.cfg.real("anomaly.quantile"));
    } else if (ctx.cfg.real("anomaly.error_threshold") >= 0.0) {
        thresholds.error_threshold = ctx.cfg.real("anomaly.error_threshold");
    } else {
        throw ContractError("anomaly needs --normal data or a non-negative anomaly.error_threshold");
    }
    const auto records = score_anomalies(model, cloud, thresholds);
    const fs::path dir = ctx.run_dir();
    write_anomaly_csv(records, dir / "anomaly.csv", ctx.csv_comment());
    ctx.wrote(dir / "anomaly.csv");
    std::map<std::string, std::size_t> categories;
    std::size_t outliers = 0;
    for (const auto& r : records) {
        ++categories[r.category];
        outliers += r.outlier ? 1 : 0;
    }
    write_artifact(ctx, dir / "anomaly.json",
                   {{"thresholds", to_json(thresholds)},
                    {"points", records.size()},
                    {"outliers", outliers},
                    {"categories", categories}});
}

void cmd_interpolate(Context& ctx, const Inputs& in) {
    const GamlaModel model = input_model(ctx, in.model);
    Eigen::VectorXd xa;
    Eigen::VectorXd xb;
    if (!in.a.empty() || !in.b.empty()) {
        if (in.a.empty() || in.b.empty()) throw ContractError("--a and --b must be given together");
        xa = parse_point(in.a, "--a");
        xb = parse_point(in.b, "--b");
    } else {
        const PointCloud cloud = required_cloud(ctx, in.data, "data");
        if (in.from < 0 || in.to < 0 || static_cast<std::size_t>(in.from) >= cloud.size() ||
            static_cast<std::size_t>(in.to) >= cloud.size())
            throw ContractError("--from and --to must index rows of --data");
        xa = cloud.point(static_cast<std::size_t>(in.from));
        xb = cloud.point(static_cast<std::size_t>(in.to));
    }
    const std::size_t steps = ctx.cfg.uint("interpolate.steps");
    const Eigen::MatrixXd path_points = interpolate(model, xa, xb, steps);
    PointCloud path;
    path.points = path_points;
    const fs::path file = ctx.run_dir() / "interpolate.csv";
    save_csv(path, file, ctx.csv_comment());
    ctx.wrote(file);
}

void cmd_chart(Context& ctx, const Inputs& in) {
    const GamlaModel model = input_model(ctx, in.model);
    const PointCloud cloud = input_cloud(ctx, in.data);
    const auto lines = grid_chart(model, latent_bounds(model, cloud), ctx.cfg.uint("chart.lines"),
                                  ctx.cfg.uint("chart.samples"));
    const fs::path file = ctx.run_dir() / "chart.csv";
    write_grid_chart_csv(lines, file, ctx.csv_comment());
    ctx.wrote(file);
}

int exit_code_for(const Error& e) {
    if (dynamic_cast<const IoError*>(&e)) return kMissingFile;
    if (dynamic_cast<const NumericError*>(&e)) return kNumericError;
    return kConfigError;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Two-round autoencoder manifold learning: training, implicit geometry and analysis."};
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::string config_path;
    std::vector<std::string> assignments;
    bool quiet = false;
    app.add_option("--seed", seed, "Base seed for every random stream");
    app.add_option("--out-dir", out_dir, "Root directory for run outputs");
    app.add_option("--config", config_path, "key=value or JSON config file");
    app.add_option("--set", assignments, "Override one config key (key=value), repeatable");
    app.add_flag("--quiet", quiet, "Suppress warnings");

    Inputs in;
    using Handler = void (*)(Context&, const Inputs&);
    std::vector<std::pair<CLI::App*, Handler>> commands;
    auto add = [&](const char* name, const char* help, Handler h) {
        CLI::App* sub = app.add_subcommand(name, help);
        commands.emplace_back(sub, h);
        return sub;
    };
    auto data_opt = [&](CLI::App* sub, const char* help) { sub->add_option("--data", in.data, help); };
    auto model_opt = [&](CLI::App* sub) { sub->add_option("--model", in.model, "Model JSON")->required(); };

    add("generate", "Sample the configured dataset to CSV", cmd_generate);

    auto* train = add("train", "Train a model (round 1, then round 2 unless --round1-only)", cmd_train);
    data_opt(train, "Training CSV (default: generate the configured dataset)");
    train->add_flag("--round1-only", in.round1_only, "Stop after round 1");
    train->add_flag("--full", in.full, "Run both rounds (default)");
    train->add_option("--resume", in.resume, "Continue a round-1 model with round 2");

    auto* eval = add("eval", "Reconstruction and |R| statistics", cmd_eval);
    model_opt(eval);
    data_opt(eval, "Evaluation CSV (default: generate the configured dataset)");

    auto* geom = add("geometry", "Normals and Gaussian curvature of R = 0 at query points", cmd_geometry);
    model_opt(geom);
    geom->add_option("--points", in.points, "Query points CSV")->required();

    auto* taylor = add("taylor", "Cubic Taylor polynomial of the implicit surface at the origin", cmd_taylor);
    model_opt(taylor);

    auto* level = add("level-set", "Uniform box samples with |R| < eps", cmd_level_set);
    model_opt(level);

    auto* scan = add("dim-scan", "Round-1 error curve over bottleneck widths", cmd_dim_scan);
    data_opt(scan, "Cloud CSV (default: generate the configured dataset)");

    auto* ss = add("sweep-structure", "Round-1 error over (L, C) structures", cmd_sweep_structure);
    data_opt(ss, "Cloud CSV (default: generate the configured dataset)");

    auto* sn = add("sweep-noise", "Clean-point error after training on noisy clouds", cmd_sweep_noise);
    data_opt(sn, "Clean cloud CSV (default: generate the configured dataset)");

    auto* anomaly = add("anomaly", "Score and categorize points by reconstruction error and z~", cmd_anomaly);
    model_opt(anomaly);
    anomaly->add_option("--data", in.data, "Points to score")->required();
    anomaly->add_option("--normal", in.normal, "Normal data for threshold calibration");

    auto* interp = add("interpolate", "Decode a straight line between two points in character space", cmd_interpolate);
    model_opt(interp);
    interp->add_option("--data", in.data, "CSV holding the endpoints");
    interp->add_option("--from", in.from, "Row index of the first endpoint");
    interp->add_option("--to", in.to, "Row index of the second endpoint");
    interp->add_option("--a", in.a, "First endpoint as comma-separated coordinates");
    interp->add_option("--b", in.b, "Second endpoint as comma-separated coordinates");

    auto* chart = add("chart", "Character-space grid lines decoded to the original space", cmd_chart);
    model_opt(chart);
    data_opt(chart, "Cloud whose latent range bounds the grid (default: generate)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion&) {
        out << kToolName << ' ' << kToolVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: usage: " << e.what() << '\n';
        return kConfigError;
    }

    set_warnings_enabled(!quiet);
    try {
        Context ctx;
        ctx.out = &out;
        if (!config_path.empty()) ctx.cfg.merge_file(config_path);
        for (const auto& a : assignments) ctx.cfg.set(a);
        if (seed) ctx.cfg.set("seed", std::to_string(*seed));
        if (!out_dir.empty()) ctx.cfg.set("out_dir", out_dir);
        for (const auto& [sub, handler] : commands) {
            if (sub->parsed()) {
                ctx.command = sub->get_name();
                ctx.arguments = subcommand_arguments(*sub);
                handler(ctx, in);
                return kOk;
            }
        }
        err << "error: usage: no subcommand\n";
        return kConfigError;
    } catch (const Error& e) {
        err << "error: " << e.category() << ": " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const fs::filesystem_error& e) {
        err << "error: io: " << e.what() << '\n';
        return kMissingFile;
    } catch (const std::exception& e) {
        err << "error: internal: " << e.what() << '\n';
        return kFailure;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

} // namespace gamla::cli
