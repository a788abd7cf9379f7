#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "gamla/gamla.hpp"
#include "gamla/nn.hpp"
#include "gamla/point_cloud.hpp"

namespace gamla {

/// Worker count for independent jobs: `requested` if nonzero, else the
/// GAMLA_THREADS environment variable, else the hardware concurrency.
unsigned resolve_threads(unsigned requested);

/// Runs job(0..count-1), possibly concurrently. Exceptions from jobs are
/// rethrown (the lowest failing index wins) after all workers stop.
void run_jobs(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job);

/// Mean and sample standard deviation of the finite entries.
struct Summary {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t count = 0;
};
Summary summarize(const std::vector<double>& values);

/// Linear-interpolated quantile, q in [0, 1]. Throws on empty input.
double quantile(std::vector<double> values, double q);

// ---------------------------------------------------------------- dim scan

struct DimScanOptions {
    std::size_t repeats = 10;
    double rho = 0.9;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

struct DimScanCell {
    std::size_t m = 0;
    std::vector<double> errors; // one per completed repeat
    std::size_t failed = 0;     // diverged repeats
    double mean = 0.0;
    double stddev = 0.0;
    bool excluded = false;      // every repeat diverged
};

struct DimScanReport {
    std::vector<DimScanCell> cells;
    std::size_t chosen_m = 0;
    double rho = 0.9;
    std::size_t repeats = 0;
};

/// Round-1 error curve over bottleneck widths. The error of one training is
/// the mean Euclidean reconstruction residual. The elbow is the smallest m
/// with E(next) / E(m) > rho; the largest candidate when the curve never
/// flattens. `candidates` must be ascending and at most n.
DimScanReport dim_scan(const PointCloud& cloud, const std::vector<std::size_t>& candidates,
                       const GamlaArchitecture& base, const TrainConfig& cfg, const DimScanOptions& options = {});

/// Elbow rule on an error sequence; returns an index into `errors`.
std::size_t elbow_index(const std::vector<double>& errors, double rho);

// ---------------------------------------------------------------- charts

struct LatentBounds {
    Eigen::VectorXd low;
    Eigen::VectorXd high;
};

/// Coordinate-wise range of the character coordinates G(x) over the cloud.
LatentBounds latent_bounds(const GamlaModel& model, const PointCloud& cloud);

struct GridLine {
    std::size_t axis = 0;    // varying character coordinate
    Eigen::VectorXd latent;  // fixed values (entry `axis` is ignored)
    Eigen::MatrixXd points;  // decoded polyline, one point per row
};

/// Grid lines of the character space decoded with z~ = 0: for every axis,
/// `lines_per_axis` lines at evenly spaced values of the other coordinates,
/// each sampled at `samples_per_line` points.
std::vector<GridLine> grid_chart(const GamlaModel& model, const LatentBounds& bounds, std::size_t lines_per_axis,
                                 std::size_t samples_per_line);

/// Decodes lambda G(x_a) + (1 - lambda) G(x_b) with z~ = 0 for lambda going
/// from 1 to 0 in `steps` equal steps. Row 0 is project(x_a), the last row
/// is project(x_b).
Eigen::MatrixXd interpolate(const GamlaModel& model, const Eigen::VectorXd& x_a, const Eigen::VectorXd& x_b,
                            std::size_t steps);

// ---------------------------------------------------------------- anomalies

struct AnomalyRecord {
    std::size_t index = 0;
    double reconstruction_error = 0.0; // |x - project(x)|
    Eigen::VectorXd z_tilde;
    double score = 0.0;                // |z~|^2
    bool outlier = false;
    std::string category;
};

struct AnomalyThresholds {
    double error_threshold = 0.0;
    /// Per-component magnitude below which a z~ sign is not counted; empty
    /// means zero for every component.
    Eigen::VectorXd theta;
};

/// For one complementary coordinate: "type1" (z~ > 0), "type2" (z~ < 0) or
/// "none". Otherwise one character per component: '+', '-' or '0' when
/// |z~_i| <= theta_i.
std::string categorize(const Eigen::VectorXd& z_tilde, const Eigen::VectorXd& theta = {});

/// Error threshold and theta as the `q` quantiles of the projection errors
/// and |z~_i| on normal data.
AnomalyThresholds calibrate_thresholds(const GamlaModel& model, const PointCloud& normal, double q = 0.99);

/// One record per point. Requires a model after round 2.
std::vector<AnomalyRecord> score_anomalies(const GamlaModel& model, const PointCloud& cloud,
                                           const AnomalyThresholds& thresholds);

// ---------------------------------------------------------------- sweeps

struct SweepOptions {
    std::size_t repeats = 10;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

struct SweepCell {
    std::size_t layers = 0;   // L
    std::size_t width = 0;    // C
    double sigma = 0.0;
    std::vector<double> errors;
    std::size_t failed = 0;
    double mean = 0.0;
    double stddev = 0.0;
};

struct SweepGrid {
    std::string metric;
    std::size_t repeats = 0;
    std::vector<SweepCell> cells;
};

/// Round-1 trainings for every (L, C) pair, errors as the mean Euclidean
/// reconstruction residual on the training cloud.
SweepGrid sweep_structure(const PointCloud& cloud, std::size_t m, const std::vector<std::size_t>& Ls,
                          const std::vector<std::size_t>& Cs, const TrainConfig& cfg, const SweepOptions& options = {});

/// For every sigma: train round 1 on the noisy cloud, report the mean squared
/// reconstruction error of the clean points.
SweepGrid sweep_noise(const PointCloud& cloud, const std::vector<double>& sigmas, const GamlaArchitecture& arch,
                      const TrainConfig& cfg, const SweepOptions& options = {});

// ---------------------------------------------------------------- reports

nlohmann::json to_json(const DimScanReport& report);
nlohmann::json to_json(const SweepGrid& grid);
nlohmann::json to_json(const AnomalyThresholds& thresholds);

/// CSV writers. `comment` lines are prefixed with "# ".
void write_dim_scan_csv(const DimScanReport& report, const std::filesystem::path& path, const std::string& comment = {});
void write_sweep_csv(const SweepGrid& grid, const std::filesystem::path& path, const std::string& comment = {});
void write_anomaly_csv(const std::vector<AnomalyRecord>& records, const std::filesystem::path& path,
                       const std::string& comment = {});
void write_grid_chart_csv(const std::vector<GridLine>& lines, const std::filesystem::path& path,
                          const std::string& comment = {});

} // namespace gamla
