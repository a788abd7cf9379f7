// End-to-end acceptance run. Prints one "criterion N: PASS|FAIL ..." line per
// criterion and exits nonzero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "gamla/analysis.hpp"
#include "gamla/datasets.hpp"
#include "gamla/error.hpp"
#include "gamla/geometry.hpp"
#include "gamla/seeding.hpp"
#include "gamla_cli/cli.hpp"

namespace fs = std::filesystem;
using namespace gamla;

namespace {

constexpr double kPi = std::numbers::pi;

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string num(double v) {
    std::ostringstream s;
    s << std::setprecision(4) << v;
    return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- oracles

// Distance to the graph patch x3 = f(x1, x2), (x1, x2) in [-1, 1.5]^2: grid
// search followed by shrinking pattern refinement.
double quadric_distance(const Eigen::Vector3d& x) {
    auto d2 = [&](double u, double v) { return (Eigen::Vector3d(u, v, quadric_height(u, v)) - x).squaredNorm(); };
    double best = 1e300, bu = 0, bv = 0;
    for (int i = 0; i <= 100; ++i)
        for (int j = 0; j <= 100; ++j) {
            const double u = -1 + 2.5 * i / 100.0, v = -1 + 2.5 * j / 100.0;
            const double d = d2(u, v);
            if (d < best) best = d, bu = u, bv = v;
        }
    double h = 0.025;
    for (int it = 0; it < 40; ++it) {
        const double cu = bu, cv = bv;
        for (int i = -4; i <= 4; ++i)
            for (int j = -4; j <= 4; ++j) {
                const double u = std::clamp(cu + h * i / 4, -1.0, 1.5), v = std::clamp(cv + h * j / 4, -1.0, 1.5);
                const double d = d2(u, v);
                if (d < best) best = d, bu = u, bv = v;
            }
        h *= 0.5;
    }
    return std::sqrt(best);
}

// Distance to the three-quarter cylinder patch: radial distance inside the
// angular range, nearest boundary line outside it, plus the axial overhang.
double cylinder_distance(const Eigen::Vector3d& x) {
    const double dx = x(0) - 0.4, dy = x(1);
    double phi = std::atan2(dy, dx);
    if (phi < 0) phi += 2 * kPi;
    double radial;
    if (phi <= 1.5 * kPi) {
        radial = std::abs(std::hypot(dx, dy) - 0.4);
    } else {
        radial = std::min(std::hypot(dx - 0.4, dy), std::hypot(dx, dy + 0.4));
    }
    const double axial = std::max(0.0, std::abs(x(2)) - 0.4);
    return std::hypot(radial, axial);
}

// ---------------------------------------------------------------- CLI driver

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
    fs::path artifact; // last path printed
    std::vector<fs::path> artifacts;
};

CliRun cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    CliRun r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    std::istringstream lines(r.out);
    for (std::string l; std::getline(lines, l);)
        if (!l.empty()) r.artifacts.emplace_back(l);
    if (!r.artifacts.empty()) r.artifact = r.artifacts.back();
    return r;
}

CliRun cli_checked(const std::vector<std::string>& args) {
    CliRun r = cli(args);
    if (r.code != 0) {
        std::string joined;
        for (const auto& a : args) joined += a + ' ';
        throw std::runtime_error("gamla " + joined + "exited " + std::to_string(r.code) + ": " + r.err);
    }
    return r;
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

std::string read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

// ---------------------------------------------------------------- benchmarks

struct Bench {
    std::string name;
    GamlaModel model;
    fs::path model_path;
    PointCloud train;
    PointCloud holdout;
    double eps = 0.0;
    double (*distance)(const Eigen::Vector3d&) = nullptr;
};

// generate -> 80/20 split -> train through the command line tool.
Bench run_pipeline(const std::string& name, const fs::path& root, std::uint64_t seed,
                   const std::vector<std::string>& settings) {
    const fs::path dir = root / (name + "-seed" + std::to_string(seed));
    fs::create_directories(dir);
    const std::vector<std::string> common =
        concat({"--quiet", "--out-dir", dir.string(), "--seed", std::to_string(seed)}, settings);
    const CliRun gen = cli_checked(concat(common, {"generate"}));
    const PointCloud cloud = load_csv(gen.artifact);
    auto [train, holdout] = split(cloud, 0.2, derive_seed(seed, 21));
    const fs::path train_csv = dir / "train.csv";
    save_csv(train, train_csv);
    save_csv(holdout, dir / "holdout.csv");
    const CliRun tr = cli_checked(concat(common, {"train", "--data", train_csv.string()}));
    Bench b;
    b.name = name;
    b.model = load_model(tr.artifact);
    b.model_path = tr.artifact;
    b.train = std::move(train);
    b.holdout = std::move(holdout);
    return b;
}

std::vector<std::string> quadric_settings() { return {"--set", "dataset.generator=quadric", "--set", "dataset.count=10000"}; }

std::vector<std::string> cylinder_settings() {
    return {"--set", "dataset.generator=cylinder", "--set", "dataset.count=10000", "--set", "arch.layers=3,6,6,2,6,6,3",
            "--set", "round1.epochs=1000",         "--set", "thresholds.eps=0.005"};
}

std::vector<std::string> swiss_settings() {
    return {"--set", "dataset.generator=swiss_roll", "--set", "dataset.count=10000", "--set",
            "arch.layers=3,24,12,6,2,6,12,24,3",     "--set", "round1.epochs=1000",  "--set",
            "round1.final_lr_fraction=0.01"};
}

struct TaylorAttempt {
    std::uint64_t seed = 0;
    bool ok = false;
    std::map<std::string, double> coefficients;
    std::string error;
    double score = 1e300; // lower is better
    bool pass = false;
};

class Suite {
public:
    explicit Suite(fs::path work) : work_(std::move(work)) { fs::create_directories(work_); }

    // Criterion 1 trains three quadric models; the best one is reused.
    const std::vector<TaylorAttempt>& quadric_attempts() {
        if (!attempts_.empty()) return attempts_;
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const auto t0 = std::chrono::steady_clock::now();
            Bench b = run_pipeline("quadric", work_, seed, quadric_settings());
            b.eps = 1e-3;
            b.distance = quadric_distance;
            const fs::path dir = work_ / ("quadric-seed" + std::to_string(seed));
            TaylorAttempt a;
            a.seed = seed;
            const CliRun t = cli({"--quiet", "--out-dir", dir.string(), "taylor", "--model", b.model_path.string()});
            if (t.code == 0) {
                a.ok = true;
                const nlohmann::json doc = nlohmann::json::parse(read_all(t.artifact));
                for (const auto& [k, v] : doc.at("result").at("coefficients").items()) a.coefficients[k] = v.get<double>();
                score(a);
            } else {
                a.error = t.err.substr(0, t.err.find('\n'));
            }
            std::cerr << "[quadric seed " << seed << "] trained in " << num(seconds_since(t0)) << " s\n";
            attempts_.push_back(a);
            quadrics_.push_back(std::move(b));
        }
        return attempts_;
    }

    Bench& quadric() {
        quadric_attempts();
        std::size_t best = 0;
        for (std::size_t i = 1; i < attempts_.size(); ++i)
            if (attempts_[i].score < attempts_[best].score) best = i;
        return quadrics_[best];
    }

    Bench& cylinder() {
        if (!cylinder_) {
            const auto t0 = std::chrono::steady_clock::now();
            cylinder_ = run_pipeline("cylinder", work_, 1, cylinder_settings());
            cylinder_->eps = 5e-3;
            cylinder_->distance = cylinder_distance;
            std::cerr << "[cylinder] trained in " << num(seconds_since(t0)) << " s\n";
        }
        return *cylinder_;
    }

    Bench& swiss() {
        if (!swiss_) {
            const auto t0 = std::chrono::steady_clock::now();
            swiss_ = run_pipeline("swiss", work_, 1, swiss_settings());
            std::cerr << "[swiss] trained in " << num(seconds_since(t0)) << " s\n";
        }
        return *swiss_;
    }

    const fs::path& work() const { return work_; }

private:
    static void score(TaylorAttempt& a) {
        static const std::map<std::string, double> target{{"x1", -0.2}, {"x1^2", 0.5}, {"x1*x2", 0.2}};
        double s = 0.0;
        bool pass = true;
        for (const auto& [k, v] : target) {
            const auto it = a.coefficients.find(k);
            const double got = it == a.coefficients.end() ? 0.0 : it->second;
            s += std::abs(got - v);
            if (it == a.coefficients.end() || std::abs(got - v) > 0.05) pass = false;
        }
        for (const auto& [k, v] : a.coefficients)
            if (!target.count(k)) {
                s += std::abs(v);
                pass = false;
            }
        a.score = s;
        a.pass = pass;
    }

    fs::path work_;
    std::vector<TaylorAttempt> attempts_;
    std::vector<Bench> quadrics_;
    std::optional<Bench> cylinder_;
    std::optional<Bench> swiss_;
};

std::vector<double> abs_complement(const GamlaModel& model, const Eigen::MatrixXd& points) {
    const Eigen::VectorXd r = model.complement_batch(points).cwiseAbs().rowwise().maxCoeff();
    return {r.data(), r.data() + r.size()};
}

// ---------------------------------------------------------------- criteria

Verdict criterion1(Suite& s) {
    const auto& attempts = s.quadric_attempts();
    Verdict v;
    std::ostringstream d;
    for (const TaylorAttempt& a : attempts) {
        v.pass = v.pass || a.pass;
        d << " seed " << a.seed << ":";
        if (!a.ok) {
            d << " {" << a.error << "}";
            continue;
        }
        d << " {";
        bool first = true;
        for (const auto& [k, c] : a.coefficients) {
            d << (first ? "" : ", ") << k << "=" << num(c);
            first = false;
        }
        d << "}";
    }
    v.detail = "quadric taylor (tau=0.03, want {x1=-0.2, x1^2=0.5, x1*x2=0.2} +-0.05, best of 3):" + d.str();
    return v;
}

Verdict criterion2(Suite& s) {
    Verdict v{true, ""};
    std::ostringstream d;
    for (Bench* b : {&s.quadric(), &s.cylinder()}) {
        std::vector<double> on = abs_complement(b->model, b->holdout.points);
        const double frac = static_cast<double>(std::count_if(on.begin(), on.end(), [&](double r) { return r < b->eps; })) /
                            static_cast<double>(on.size());
        std::vector<double> probes;
        std::mt19937_64 rng(derive_seed(2, b->name.size()));
        std::size_t drawn = 0;
        const Hyperrectangle& box = b->model.ambient_box();
        while (probes.size() < 1000 && drawn < 200000) {
            const PointCloud batch = sample_ambient(box, 500, rng());
            drawn += 500;
            for (std::size_t i = 0; i < batch.size() && probes.size() < 1000; ++i) {
                const Eigen::Vector3d x = batch.point(i);
                if (b->distance(x) >= 0.1) probes.push_back(std::abs(b->model.complement(x)(0)));
            }
        }
        const double med = probes.empty() ? 0.0 : quantile(probes, 0.5);
        const bool ok = frac >= 0.99 && probes.size() == 1000 && med > 10 * b->eps;
        v.pass = v.pass && ok;
        d << " " << b->name << ": " << num(100 * frac) << "% of holdout |R|<" << num(b->eps) << " (p99 |R|="
          << num(quantile(on, 0.99)) << "), probe median |R|=" << num(med) << " vs " << num(10 * b->eps) << ";";
    }
    v.detail = "zero set matches the data:" + d.str();
    return v;
}

Verdict criterion3(Suite& s) {
    Verdict v{true, ""};
    std::ostringstream d;
    for (Bench* b : {&s.quadric(), &s.cylinder()}) {
        LevelSetSpec spec;
        spec.eps = b->eps;
        spec.count = 100000;
        spec.box = b->model.ambient_box();
        const PointCloud kept = filter_level_set(complementary_head(b->model), spec, 303);
        double worst = 0.0;
        std::size_t far = 0;
        for (std::size_t i = 0; i < kept.size(); ++i) {
            const double dist = b->distance(kept.point(i));
            worst = std::max(worst, dist);
            far += dist > 0.02 ? 1 : 0;
        }
        const bool ok = !kept.empty() && far == 0;
        v.pass = v.pass && ok;
        d << " " << b->name << ": " << kept.size() << " survivors of |R|<" << num(b->eps) << ", " << far
          << " farther than 0.02, max distance " << num(worst) << ";";
    }
    v.detail = "level-set fidelity:" + d.str();
    return v;
}

Verdict criterion4(Suite& s) {
    const Bench& b = s.cylinder();
    const ImplicitHead head = complementary_head(b.model);
    std::vector<double> errors;
    std::size_t singular = 0;
    for (int k = 0; k < 100; ++k) {
        const double t = 1.5 * kPi * k / 99.0;
        const Eigen::Vector3d truth(std::cos(t), std::sin(t), 0.0);
        try {
            const Eigen::VectorXd n = normal_vector(head, cylinder_point(t, 0.0));
            // R fixes an orientation of its own; compare unoriented lines
            const double c = std::min(1.0, std::abs(n.dot(truth)));
            errors.push_back(std::acos(c) * 180.0 / kPi);
        } catch (const SingularPointError&) {
            ++singular;
            errors.push_back(90.0);
        }
    }
    const double p95 = quantile(errors, 0.95);
    return {p95 <= 5.0, "cylinder normals on 100-point theta grid: p95 angular error " + num(p95) + " deg (limit 5), median " +
                            num(quantile(errors, 0.5)) + " deg, " + std::to_string(singular) + " singular"};
}

Verdict criterion5(Suite& s) {
    bool oracle = true;
    double worst_rel = 0.0;
    for (double r : {0.25, 0.5, 1.0, 2.0}) {
        const ImplicitHead sphere = ImplicitHead::from_expression(3, 1, [r](const auto& x) {
            using T = std::decay_t<decltype(x[0])>;
            return std::vector<T>{x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - r * r};
        });
        const double k = gaussian_curvature(sphere, Eigen::Vector3d(0.48, -0.64, 0.6) * r);
        const double rel = std::abs(k - 1.0 / (r * r)) * r * r;
        worst_rel = std::max(worst_rel, rel);
        oracle = oracle && rel <= 1e-8;
    }
    const Bench& b = s.cylinder();
    const ImplicitHead head = complementary_head(b.model);
    double worst = 0.0;
    std::size_t singular = 0;
    for (int k = 0; k < 50; ++k) {
        const double t = 1.5 * kPi * k / 49.0;
        try {
            worst = std::max(worst, std::abs(gaussian_curvature(head, cylinder_point(t, 0.0))));
        } catch (const SingularPointError&) {
            ++singular;
            worst = std::numeric_limits<double>::infinity();
        }
    }
    return {oracle && worst <= 0.1, "sphere oracle max rel error " + num(worst_rel) + " (limit 1e-8); cylinder ring max |K| " +
                                        num(worst) + " (limit 0.1), " + std::to_string(singular) + " singular"};
}

Verdict criterion6(Suite& s) {
    Verdict v{true, ""};
    std::ostringstream d;
    for (Bench* b : {&s.quadric(), &s.cylinder(), &s.swiss()}) {
        const ImplicitHead head = complementary_head(b->model);
        const PointCloud pts = sample_ambient(b->model.ambient_box(), 100, 606);
        auto f = [&](const Eigen::Vector3d& x) { return head.value(x)(0); };
        double worst_g = 0.0, worst_h = 0.0;
        for (std::size_t p = 0; p < pts.size(); ++p) {
            const Eigen::Vector3d x = pts.point(p);
            const Jet j = eval_with_derivatives(head, x, 2).front();
            Eigen::Vector3d g;
            Eigen::Matrix3d h;
            const double hg = 1e-5, hh = 2e-5;
            for (int i = 0; i < 3; ++i) {
                const Eigen::Vector3d ei = Eigen::Vector3d::Unit(i);
                g(i) = (f(x + hg * ei) - f(x - hg * ei)) / (2 * hg);
                for (int k = 0; k < 3; ++k) {
                    const Eigen::Vector3d ek = Eigen::Vector3d::Unit(k);
                    h(i, k) = (f(x + hh * (ei + ek)) - f(x + hh * (ei - ek)) - f(x - hh * (ei - ek)) + f(x - hh * (ei + ek))) /
                              (4 * hh * hh);
                }
            }
            worst_g = std::max(worst_g, (j.gradient() - g).norm() / std::max(g.norm(), 1e-8));
            worst_h = std::max(worst_h, (j.hessian() - h).norm() / std::max(h.norm(), 1e-8));
        }
        v.pass = v.pass && worst_g <= 1e-4 && worst_h <= 1e-3;
        d << " " << b->name << " gradient " << num(worst_g) << ", Hessian " << num(worst_h) << ";";
    }
    v.detail = "jets vs central differences, max relative error (limits 1e-4 / 1e-3):" + d.str();
    return v;
}

Verdict criterion7(Suite& s) {
    const Bench& b = s.swiss();
    const ImplicitHead head = complementary_head(b.model);
    const std::vector<double> on = abs_complement(b.model, b.holdout.points);
    const std::vector<double> amb = abs_complement(b.model, sample_ambient(b.model.ambient_box(), 1000, 707).points);
    const double p99 = quantile(on, 0.99);
    const double amb_max = *std::max_element(amb.begin(), amb.end());

    std::size_t opposite = 0;
    const std::size_t pairs = std::min<std::size_t>(200, b.holdout.size());
    for (std::size_t i = 0; i < pairs; ++i) {
        const Eigen::Vector3d x = b.holdout.point(i);
        try {
            const Eigen::Vector3d n = normal_vector(head, x);
            const double plus = b.model.complement(x + 0.05 * n)(0);
            const double minus = b.model.complement(x - 0.05 * n)(0);
            opposite += plus * minus < 0.0 ? 1 : 0;
        } catch (const SingularPointError&) {
        }
    }
    const double frac = static_cast<double>(opposite) / static_cast<double>(pairs);
    const bool pass = p99 < 0.05 * amb_max && frac >= 0.95;
    return {pass, "swiss roll: holdout p99 |z~| " + num(p99) + " vs 0.05*max ambient |z~| " + num(0.05 * amb_max) + "; " +
                      std::to_string(opposite) + "/" + std::to_string(pairs) + " probe pairs with opposite sign (" +
                      num(100 * frac) + "%, need 95%)"};
}

Verdict criterion8(Suite& s) {
    (void)s;
    const GamlaArchitecture base = GamlaArchitecture::from_layer_sizes({3, 24, 12, 6, 2, 6, 12, 24, 3});
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.epochs = 600;
    cfg.batch_size = 64;
    cfg.final_lr_fraction = 0.01;
    std::size_t hits = 0;
    std::ostringstream d;
    for (std::uint64_t run = 0; run < 5; ++run) {
        const auto t0 = std::chrono::steady_clock::now();
        const PointCloud cloud = gen_swiss_roll(2000, derive_seed(800, run));
        DimScanOptions opt;
        opt.repeats = 10;
        opt.seed = derive_seed(801, run);
        const DimScanReport r = dim_scan(cloud, {1, 2, 3}, base, cfg, opt);
        hits += r.chosen_m == 2 ? 1 : 0;
        d << " run " << run + 1 << ": m*=" << r.chosen_m << " E=(";
        for (std::size_t c = 0; c < r.cells.size(); ++c) d << (c ? ", " : "") << num(r.cells[c].mean);
        d << ");";
        std::cerr << "[dim-scan run " << run + 1 << "] " << num(seconds_since(t0)) << " s\n";
    }
    return {hits >= 4, "swiss roll dim scan, m*=2 in " + std::to_string(hits) + "/5 runs (need 4):" + d.str()};
}

Verdict criterion9(Suite& s) {
    (void)s;
    const PointCloud cloud = gen_swiss_roll(10000, 901);
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.epochs = 80;
    cfg.batch_size = 64;
    cfg.final_lr_fraction = 0.01;
    SweepOptions opt;
    opt.repeats = 10;
    opt.seed = 902;
    const SweepGrid g = sweep_structure(cloud, 2, {3}, {4, 18, 64}, cfg, opt);
    std::map<std::size_t, double> mean;
    std::ostringstream d;
    for (const SweepCell& c : g.cells) {
        mean[c.width] = c.mean;
        d << " C=" << c.width << ": " << num(c.mean) << " +- " << num(c.stddev) << ";";
    }
    return {mean.at(18) < mean.at(4), "structure sweep L=3, mean residual norm over 10 repeats:" + d.str()};
}

Verdict criterion10(Suite& s) {
    (void)s;
    const PointCloud cloud = gen_swiss_roll(10000, 1001);
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.epochs = 500;
    cfg.batch_size = 64;
    cfg.final_lr_fraction = 0.01;
    SweepOptions opt;
    opt.repeats = 3;
    opt.seed = 1002;
    const SweepGrid g =
        sweep_noise(cloud, {0.0, 0.005, 0.01, 0.015}, GamlaArchitecture::from_structure(3, 2, 3, 18), cfg, opt);
    std::ostringstream d;
    for (const SweepCell& c : g.cells) d << " sigma=" << num(c.sigma) << ": " << num(c.mean) << ";";
    const double ratio = g.cells.back().mean / g.cells.front().mean;
    return {ratio < 3.0, "noise sweep (3,18), clean-point MSE:" + d.str() + " ratio " + num(ratio) + " (limit 3)"};
}

Verdict criterion11(Suite& s) {
    const Bench& b = s.quadric();
    auto scores = [&](const Eigen::MatrixXd& pts) {
        const Eigen::VectorXd r = b.model.complement_batch(pts).rowwise().squaredNorm();
        return std::vector<double>(r.data(), r.data() + r.size());
    };
    const double q = quantile(scores(b.holdout.points), 0.5);
    const double c = quantile(scores(gen_cylinder(2000, 1101).points), 0.5);
    const bool pass = std::isfinite(c) && q < c && c >= 10 * q;
    return {pass, "median |z~|^2 quadric holdout " + num(q) + ", cylinder " + num(c) + " (ratio " + num(c / q) +
                      ", need >= 10)"};
}

Verdict criterion12(Suite& s) {
    const fs::path root = s.work() / "repro";
    fs::remove_all(root);
    const std::vector<std::string> settings = {
        "--quiet", "--seed", "12", "--set", "dataset.count=300", "--set", "round1.epochs=40", "--set", "round2.epochs=10",
        "--set", "level_set.count=3000", "--set", "thresholds.eps=0.05", "--set", "dim_scan.repeats=1", "--set",
        "dim_scan.candidates=1,2", "--set", "sweep.repeats=1", "--set", "sweep.layers=1", "--set", "sweep.widths=4",
        "--set", "sweep.sigmas=0,0.01", "--set", "round1.lr=0.02"};
    auto in = [&](const std::string& tag) { return concat({"--out-dir", (root / tag).string()}, settings); };

    // Shared inputs produced once.
    const CliRun data = cli_checked(concat(in("inputs"), {"generate"}));
    const CliRun model = cli_checked(concat(in("inputs"), {"train"}));
    const std::string d = data.artifact.string(), m = model.artifact.string();

    const std::vector<std::vector<std::string>> commands = {
        {"generate"},
        {"train"},
        {"train", "--round1-only"},
        {"eval", "--model", m, "--data", d},
        {"geometry", "--model", m, "--points", d},
        {"taylor", "--model", m},
        {"level-set", "--model", m},
        {"dim-scan"},
        {"sweep-structure"},
        {"sweep-noise"},
        {"anomaly", "--model", m, "--data", d, "--normal", d},
        {"interpolate", "--model", m, "--data", d, "--from", "0", "--to", "5"},
        {"chart", "--model", m}};
    std::size_t identical = 0;
    std::vector<std::string> broken;
    for (const auto& cmd : commands) {
        const CliRun a = cli(concat(in("a"), cmd));
        std::vector<std::string> first;
        for (const auto& p : a.artifacts) first.push_back(read_all(p));
        const CliRun again = cli(concat(in("a"), cmd)); // same directory, overwrites
        const CliRun b = cli(concat(in("b"), cmd));     // fresh directory
        bool same = a.code == again.code && a.code == b.code && a.err == b.err &&
                    a.artifacts.size() == b.artifacts.size() && a.artifacts.size() == again.artifacts.size();
        for (std::size_t i = 0; same && i < a.artifacts.size(); ++i)
            same = first[i] == read_all(again.artifacts[i]) && first[i] == read_all(b.artifacts[i]) && !first[i].empty();
        // taylor may legitimately report a degenerate chart, as long as it does so every time
        const bool expected = a.code == 0 ? !a.artifacts.empty() : cmd.front() == "taylor" && a.code == cli::kNumericError;
        if (!expected) same = false;
        if (same)
            ++identical;
        else
            broken.push_back(cmd.front());
    }
    std::string detail = std::to_string(identical) + "/" + std::to_string(commands.size()) +
                         " subcommand invocations byte-identical across re-runs";
    for (const auto& c : broken) detail += " [differs: " + c + "]";
    return {broken.empty(), detail};
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"GAMLA acceptance run"};
    std::string work = "acceptance_work";
    std::vector<int> only;
    app.add_option("--work-dir", work, "Scratch directory for models and artifacts");
    app.add_option("--only", only, "Run only these criteria")->delimiter(',');
    CLI11_PARSE(app, argc, argv);

    set_warnings_enabled(false);
    Suite suite{fs::path(work)};
    const std::vector<std::function<Verdict(Suite&)>> criteria = {
        criterion1, criterion2, criterion3, criterion4,  criterion5,  criterion6,
        criterion7, criterion8, criterion9, criterion10, criterion11, criterion12};

    int failed = 0;
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i](suite);
        } catch (const std::exception& e) {
            v = {false, std::string("error: ") + e.what()};
        }
        failed += v.pass ? 0 : 1;
        std::cout << "criterion " << id << ": " << (v.pass ? "PASS" : "FAIL") << " " << v.detail << " ["
                  << num(seconds_since(t0)) << " s]" << std::endl;
    }
    std::cout << "acceptance: " << failed << " failing, total " << num(seconds_since(start)) << " s" << std::endl;
    return failed == 0 ? 0 : 1;
}
