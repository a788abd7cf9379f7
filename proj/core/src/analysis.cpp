#include "gamla/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "gamla/datasets.hpp"
#include "gamla/error.hpp"
#include "gamla/seeding.hpp"

namespace gamla {

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("GAMLA_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
        warn(std::string("ignoring invalid GAMLA_THREADS='") + env + "'");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void run_jobs(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job) {
    const std::size_t workers = std::min<std::size_t>(resolve_threads(threads), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                job(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    double sum = 0.0;
    for (double v : values)
        if (std::isfinite(v)) {
            sum += v;
            ++s.count;
        }
    if (s.count == 0) {
        s.mean = std::numeric_limits<double>::quiet_NaN();
        s.stddev = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    s.mean = sum / static_cast<double>(s.count);
    double ss = 0.0;
    for (double v : values)
        if (std::isfinite(v)) ss += (v - s.mean) * (v - s.mean);
    s.stddev = s.count > 1 ? std::sqrt(ss / static_cast<double>(s.count - 1)) : 0.0;
    return s;
}

double quantile(std::vector<double> values, double q) {
    detail::require(!values.empty(), "quantile of an empty sample");
    detail::require(q >= 0.0 && q <= 1.0, "quantile level must lie in [0,1]");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

namespace {

// Round-1 autoencoder without the model wrapper, so that a full-width
// bottleneck (m == n) can be scanned too.
MlpNetwork train_autoencoder(const Eigen::MatrixXd& points, const GamlaArchitecture& arch, const TrainConfig& cfg) {
    MlpNetwork net = MlpNetwork::glorot(arch.layer_sizes(arch.intrinsic_dim), arch.activations(), cfg.seed);
    train(net, points, points, cfg);
    return net;
}

struct JobResult {
    double error = std::numeric_limits<double>::quiet_NaN();
    bool failed = false;
};

template <class Cell>
void collect(Cell& cell, const std::vector<JobResult>& results, std::size_t first, std::size_t repeats) {
    for (std::size_t r = 0; r < repeats; ++r) {
        const JobResult& res = results[first + r];
        if (res.failed)
            ++cell.failed;
        else
            cell.errors.push_back(res.error);
    }
    const Summary s = summarize(cell.errors);
    cell.mean = s.mean;
    cell.stddev = s.stddev;
}

} // namespace

std::size_t elbow_index(const std::vector<double>& errors, double rho) {
    detail::require(!errors.empty(), "elbow of an empty error curve");
    for (std::size_t i = 0; i + 1 < errors.size(); ++i) {
        if (errors[i] <= 0.0) return i;
        if (errors[i + 1] / errors[i] > rho) return i;
    }
    return errors.size() - 1;
}

DimScanReport dim_scan(const PointCloud& cloud, const std::vector<std::size_t>& candidates,
                       const GamlaArchitecture& base, const TrainConfig& cfg, const DimScanOptions& options) {
    detail::require(!candidates.empty(), "dim scan needs at least one candidate");
    detail::require(options.repeats >= 1, "dim scan repeats must be >= 1");
    detail::require(options.rho > 0.0, "elbow ratio rho must be positive");
    detail::require(std::is_sorted(candidates.begin(), candidates.end()) &&
                        std::adjacent_find(candidates.begin(), candidates.end()) == candidates.end(),
                    "dim scan candidates must be strictly ascending");
    cloud.validate();
    detail::require(cloud.dim() == base.ambient_dim, "cloud dimension does not match the architecture");
    cfg.validate();

    std::vector<GamlaArchitecture> archs;
    for (std::size_t m : candidates) {
        GamlaArchitecture arch = base;
        arch.intrinsic_dim = m;
        arch.validate(true);
        archs.push_back(std::move(arch));
    }
    if (candidates.size() == 1) warn("dim scan with a single candidate returns it trivially");

    const std::size_t repeats = options.repeats;
    std::vector<JobResult> results(candidates.size() * repeats);
    run_jobs(results.size(), options.threads, [&](std::size_t job) {
        const std::size_t c = job / repeats;
        const std::size_t r = job % repeats;
        TrainConfig local = cfg;
        local.seed = derive_seed(derive_seed(options.seed, candidates[c]), r);
        try {
            const MlpNetwork net = train_autoencoder(cloud.points, archs[c], local);
            results[job].error = loss(net, cloud.points, cloud.points);
        } catch (const NumericError&) {
            results[job].failed = true;
        }
    });

    DimScanReport report;
    report.rho = options.rho;
    report.repeats = repeats;
    std::vector<double> curve;
    std::vector<std::size_t> curve_m;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        DimScanCell cell;
        cell.m = candidates[c];
        collect(cell, results, c * repeats, repeats);
        cell.excluded = cell.errors.empty();
        if (cell.excluded) {
            warn("dim scan: every training with m = " + std::to_string(cell.m) + " diverged; candidate excluded");
        } else {
            curve.push_back(cell.mean);
            curve_m.push_back(cell.m);
        }
        report.cells.push_back(std::move(cell));
    }
    if (curve.empty()) throw NumericError("dim scan: every training diverged");
    report.chosen_m = curve_m[elbow_index(curve, options.rho)];
    return report;
}

LatentBounds latent_bounds(const GamlaModel& model, const PointCloud& cloud) {
    detail::require(!cloud.empty(), "latent bounds of an empty cloud");
    const auto m = static_cast<Eigen::Index>(model.intrinsic_dim());
    const Eigen::MatrixXd z = model.encode_batch(cloud.points).leftCols(m);
    return {z.colwise().minCoeff().transpose(), z.colwise().maxCoeff().transpose()};
}

namespace {

double grid_value(double low, double high, std::size_t i, std::size_t count) {
    if (count == 1) return 0.5 * (low + high);
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    return i + 1 == count ? high : low + t * (high - low);
}

} // namespace

std::vector<GridLine> grid_chart(const GamlaModel& model, const LatentBounds& bounds, std::size_t lines_per_axis,
                                 std::size_t samples_per_line) {
    const std::size_t m = model.intrinsic_dim();
    detail::require(static_cast<std::size_t>(bounds.low.size()) == m && static_cast<std::size_t>(bounds.high.size()) == m,
                    "grid bounds must have the character dimension");
    detail::require(lines_per_axis >= 1 && samples_per_line >= 2, "grid needs >= 1 line per axis and >= 2 samples");
    for (std::size_t a = 0; a < m; ++a)
        detail::require(bounds.low(static_cast<Eigen::Index>(a)) <= bounds.high(static_cast<Eigen::Index>(a)),
                        "grid bounds must satisfy low <= high");

    std::size_t lines_per_varying_axis = 1;
    for (std::size_t k = 1; k < m; ++k) lines_per_varying_axis *= lines_per_axis;

    std::vector<GridLine> lines;
    for (std::size_t axis = 0; axis < m; ++axis) {
        for (std::size_t line = 0; line < lines_per_varying_axis; ++line) {
            GridLine gl;
            gl.axis = axis;
            gl.latent = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
            std::size_t code = line;
            for (std::size_t k = 0; k < m; ++k) {
                if (k == axis) continue;
                const auto ki = static_cast<Eigen::Index>(k);
                gl.latent(ki) = grid_value(bounds.low(ki), bounds.high(ki), code % lines_per_axis, lines_per_axis);
                code /= lines_per_axis;
            }
            Eigen::MatrixXd latent(static_cast<Eigen::Index>(samples_per_line), static_cast<Eigen::Index>(m));
            const auto ai = static_cast<Eigen::Index>(axis);
            for (std::size_t s = 0; s < samples_per_line; ++s) {
                latent.row(static_cast<Eigen::Index>(s)) = gl.latent.transpose();
                latent(static_cast<Eigen::Index>(s), ai) =
                    grid_value(bounds.low(ai), bounds.high(ai), s, samples_per_line);
            }
            gl.points = model.decode_batch(latent);
            lines.push_back(std::move(gl));
        }
    }
    return lines;
}

Eigen::MatrixXd interpolate(const GamlaModel& model, const Eigen::VectorXd& x_a, const Eigen::VectorXd& x_b,
                            std::size_t steps) {
    detail::require(steps >= 2, "interpolation needs at least 2 steps");
    const Eigen::VectorXd za = model.encode(x_a).z;
    const Eigen::VectorXd zb = model.encode(x_b).z;
    Eigen::MatrixXd latent(static_cast<Eigen::Index>(steps), za.size());
    for (std::size_t k = 0; k < steps; ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        if (k == 0) {
            latent.row(row) = za.transpose();
        } else if (k + 1 == steps) {
            latent.row(row) = zb.transpose();
        } else {
            const double lambda = 1.0 - static_cast<double>(k) / static_cast<double>(steps - 1);
            latent.row(row) = (lambda * za + (1.0 - lambda) * zb).transpose();
        }
    }
    return model.decode_batch(latent);
}

std::string categorize(const Eigen::VectorXd& z_tilde, const Eigen::VectorXd& theta) {
    detail::require(z_tilde.size() >= 1, "categorize needs at least one complementary coordinate");
    detail::require(theta.size() == 0 || theta.size() == z_tilde.size(), "theta width must match z~");
    auto sign = [&](Eigen::Index i) {
        const double t = theta.size() == 0 ? 0.0 : theta(i);
        if (z_tilde(i) > t) return 1;
        if (z_tilde(i) < -t) return -1;
        return 0;
    };
    if (z_tilde.size() == 1) {
        const int s = sign(0);
        return s > 0 ? "type1" : (s < 0 ? "type2" : "none");
    }
    std::string out;
    for (Eigen::Index i = 0; i < z_tilde.size(); ++i) {
        const int s = sign(i);
        out += s > 0 ? '+' : (s < 0 ? '-' : '0');
    }
    return out;
}

AnomalyThresholds calibrate_thresholds(const GamlaModel& model, const PointCloud& normal, double q) {
    if (model.phase() != Phase::AfterRound2) throw ContractError("anomaly thresholds need a model after round 2");
    detail::require(!normal.empty(), "threshold calibration needs normal data");
    const Eigen::MatrixXd proj = model.project_batch(normal.points);
    const Eigen::VectorXd err = (normal.points - proj).rowwise().norm();
    const Eigen::MatrixXd zt = model.complement_batch(normal.points);

    AnomalyThresholds t;
    t.error_threshold = quantile(std::vector<double>(err.data(), err.data() + err.size()), q);
    t.theta.resize(zt.cols());
    for (Eigen::Index c = 0; c < zt.cols(); ++c) {
        std::vector<double> mags(static_cast<std::size_t>(zt.rows()));
        for (Eigen::Index r = 0; r < zt.rows(); ++r) mags[static_cast<std::size_t>(r)] = std::abs(zt(r, c));
        t.theta(c) = quantile(std::move(mags), q);
    }
    return t;
}

std::vector<AnomalyRecord> score_anomalies(const GamlaModel& model, const PointCloud& cloud,
                                           const AnomalyThresholds& thresholds) {
    if (model.phase() != Phase::AfterRound2) throw ContractError("anomaly scoring needs a model after round 2");
    detail::require(thresholds.error_threshold >= 0.0, "error threshold must be >= 0");
    std::vector<AnomalyRecord> records;
    if (cloud.empty()) return records;
    const Eigen::MatrixXd proj = model.project_batch(cloud.points);
    const Eigen::MatrixXd zt = model.complement_batch(cloud.points);
    records.reserve(cloud.size());
    for (Eigen::Index i = 0; i < cloud.points.rows(); ++i) {
        AnomalyRecord rec;
        rec.index = static_cast<std::size_t>(i);
        rec.reconstruction_error = (cloud.points.row(i) - proj.row(i)).norm();
        rec.z_tilde = zt.row(i).transpose();
        rec.score = rec.z_tilde.squaredNorm();
        rec.outlier = rec.reconstruction_error > thresholds.error_threshold;
        rec.category = categorize(rec.z_tilde, thresholds.theta);
        records.push_back(std::move(rec));
    }
    return records;
}

SweepGrid sweep_structure(const PointCloud& cloud, std::size_t m, const std::vector<std::size_t>& Ls,
                          const std::vector<std::size_t>& Cs, const TrainConfig& cfg, const SweepOptions& options) {
    detail::require(!Ls.empty() && !Cs.empty(), "structure sweep needs at least one L and one C");
    detail::require(options.repeats >= 1, "sweep repeats must be >= 1");
    cloud.validate();
    cfg.validate();

    std::vector<GamlaArchitecture> archs;
    SweepGrid grid;
    grid.metric = "mean_residual_norm";
    grid.repeats = options.repeats;
    for (std::size_t L : Ls)
        for (std::size_t C : Cs) {
            GamlaArchitecture arch = GamlaArchitecture::from_structure(cloud.dim(), m, L, C);
            arch.validate();
            archs.push_back(std::move(arch));
            SweepCell cell;
            cell.layers = L;
            cell.width = C;
            grid.cells.push_back(cell);
        }

    const std::size_t repeats = options.repeats;
    std::vector<JobResult> results(grid.cells.size() * repeats);
    run_jobs(results.size(), options.threads, [&](std::size_t job) {
        const std::size_t c = job / repeats;
        const std::size_t r = job % repeats;
        TrainConfig local = cfg;
        local.seed = derive_seed(derive_seed(derive_seed(options.seed, grid.cells[c].layers), grid.cells[c].width), r);
        try {
            const MlpNetwork net = train_autoencoder(cloud.points, archs[c], local);
            results[job].error = loss(net, cloud.points, cloud.points);
        } catch (const NumericError&) {
            results[job].failed = true;
        }
    });
    for (std::size_t c = 0; c < grid.cells.size(); ++c) {
        collect(grid.cells[c], results, c * repeats, repeats);
        if (grid.cells[c].errors.empty())
            warn("structure sweep: every training of (" + std::to_string(grid.cells[c].layers) + "," +
                 std::to_string(grid.cells[c].width) + ") diverged");
    }
    return grid;
}

SweepGrid sweep_noise(const PointCloud& cloud, const std::vector<double>& sigmas, const GamlaArchitecture& arch,
                      const TrainConfig& cfg, const SweepOptions& options) {
    detail::require(!sigmas.empty(), "noise sweep needs at least one sigma");
    detail::require(options.repeats >= 1, "sweep repeats must be >= 1");
    for (double s : sigmas) detail::require(s >= 0.0 && std::isfinite(s), "noise levels must be >= 0");
    cloud.validate();
    cfg.validate();
    arch.validate();
    detail::require(cloud.dim() == arch.ambient_dim, "cloud dimension does not match the architecture");

    SweepGrid grid;
    grid.metric = "clean_mse";
    grid.repeats = options.repeats;
    for (double s : sigmas) {
        SweepCell cell;
        cell.layers = arch.hidden_dims.size();
        cell.width = arch.hidden_dims.empty() ? 0 : arch.hidden_dims.front();
        cell.sigma = s;
        grid.cells.push_back(cell);
    }

    // Repeat r uses the same initialization and noise draw at every sigma,
    // so cells differ only in the noise amplitude.
    const std::size_t repeats = options.repeats;
    std::vector<JobResult> results(grid.cells.size() * repeats);
    run_jobs(results.size(), options.threads, [&](std::size_t job) {
        const std::size_t c = job / repeats;
        const std::size_t r = job % repeats;
        const std::uint64_t base = derive_seed(options.seed, r);
        const PointCloud noisy = add_noise(cloud, grid.cells[c].sigma, derive_seed(base, 1));
        TrainConfig local = cfg;
        local.seed = derive_seed(base, 2);
        try {
            const MlpNetwork net = train_autoencoder(noisy.points, arch, local);
            results[job].error = mean_squared_error(cloud.points, net.forward_batch(cloud.points));
        } catch (const NumericError&) {
            results[job].failed = true;
        }
    });
    for (std::size_t c = 0; c < grid.cells.size(); ++c) {
        collect(grid.cells[c], results, c * repeats, repeats);
        if (grid.cells[c].errors.empty())
            warn("noise sweep: every training at sigma = " + format_double(grid.cells[c].sigma) + " diverged");
    }
    return grid;
}

namespace {

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::ofstream open_csv(const std::filesystem::path& path, const std::string& comment) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    std::istringstream lines(comment);
    std::string l;
    while (std::getline(lines, l)) out << "# " << l << '\n';
    return out;
}

void finish_csv(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::string fmt(double v) { return std::isfinite(v) ? format_double(v) : std::string("nan"); }

} // namespace

nlohmann::json to_json(const DimScanReport& report) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : report.cells)
        cells.push_back({{"m", c.m},
                         {"mean", finite_or_null(c.mean)},
                         {"std", finite_or_null(c.stddev)},
                         {"errors", c.errors},
                         {"failed", c.failed},
                         {"excluded", c.excluded}});
    return {{"chosen_m", report.chosen_m}, {"rho", report.rho}, {"repeats", report.repeats}, {"cells", cells}};
}

nlohmann::json to_json(const SweepGrid& grid) {
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& c : grid.cells)
        cells.push_back({{"L", c.layers},
                         {"C", c.width},
                         {"sigma", c.sigma},
                         {"mean", finite_or_null(c.mean)},
                         {"std", finite_or_null(c.stddev)},
                         {"errors", c.errors},
                         {"failed", c.failed}});
    return {{"metric", grid.metric}, {"repeats", grid.repeats}, {"cells", cells}};
}

nlohmann::json to_json(const AnomalyThresholds& thresholds) {
    return {{"error_threshold", thresholds.error_threshold},
            {"theta", std::vector<double>(thresholds.theta.data(), thresholds.theta.data() + thresholds.theta.size())}};
}

void write_dim_scan_csv(const DimScanReport& report, const std::filesystem::path& path, const std::string& comment) {
    auto out = open_csv(path, comment);
    out << "m,mean_error,std_error,completed,failed,chosen\n";
    for (const auto& c : report.cells)
        out << c.m << ',' << fmt(c.mean) << ',' << fmt(c.stddev) << ',' << c.errors.size() << ',' << c.failed << ','
            << (c.m == report.chosen_m ? 1 : 0) << '\n';
    finish_csv(out, path);
}

void write_sweep_csv(const SweepGrid& grid, const std::filesystem::path& path, const std::string& comment) {
    auto out = open_csv(path, comment);
    out << "L,C,sigma,mean_error,std_error,completed,failed\n";
    for (const auto& c : grid.cells)
        out << c.layers << ',' << c.width << ',' << format_double(c.sigma) << ',' << fmt(c.mean) << ','
            << fmt(c.stddev) << ',' << c.errors.size() << ',' << c.failed << '\n';
    finish_csv(out, path);
}

void write_anomaly_csv(const std::vector<AnomalyRecord>& records, const std::filesystem::path& path,
                       const std::string& comment) {
    auto out = open_csv(path, comment);
    const Eigen::Index k = records.empty() ? 0 : records.front().z_tilde.size();
    out << "index,reconstruction_error";
    for (Eigen::Index i = 0; i < k; ++i) out << ",z_tilde" << (i + 1);
    out << ",score,outlier,category\n";
    for (const auto& r : records) {
        out << r.index << ',' << format_double(r.reconstruction_error);
        for (Eigen::Index i = 0; i < r.z_tilde.size(); ++i) out << ',' << format_double(r.z_tilde(i));
        out << ',' << format_double(r.score) << ',' << (r.outlier ? 1 : 0) << ',' << r.category << '\n';
    }
    finish_csv(out, path);
}

void write_grid_chart_csv(const std::vector<GridLine>& lines, const std::filesystem::path& path,
                          const std::string& comment) {
    auto out = open_csv(path, comment);
    const Eigen::Index n = lines.empty() ? 0 : lines.front().points.cols();
    out << "line,axis,sample";
    for (Eigen::Index i = 0; i < n; ++i) out << ",x" << (i + 1);
    out << '\n';
    for (std::size_t l = 0; l < lines.size(); ++l)
        for (Eigen::Index s = 0; s < lines[l].points.rows(); ++s) {
            out << l << ',' << lines[l].axis << ',' << s;
            for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double(lines[l].points(s, i));
            out << '\n';
        }
    finish_csv(out, path);
}

} // namespace gamla
