#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <utility>

#include <Eigen/Dense>

#include "gamla/point_cloud.hpp"

namespace gamla {

/// x3 = -0.2 x1 + 0.5 x1^2 + 0.2 x1 x2, (x1, x2) uniform in (-1, 1.5)^2.
PointCloud gen_quadric(std::size_t count, std::uint64_t seed);
double quadric_height(double x1, double x2);

/// Three-quarter cylinder: (0.4 cos t + 0.4, 0.4 sin t, l), t in (0, 1.5 pi),
/// l in (-0.4, 0.4).
PointCloud gen_cylinder(std::size_t count, std::uint64_t seed);
Eigen::Vector3d cylinder_point(double theta, double l);

/// Swiss roll: (0.04 t cos t, l, 0.04 t sin t), t = 1.5 pi (1 + 2 r),
/// r in (0, 1), l in (0, 0.8).
PointCloud gen_swiss_roll(std::size_t count, std::uint64_t seed);
Eigen::Vector3d swiss_roll_point(double r, double l);

/// Disk in the (x1, x2) parameter plane.
struct Hole {
    double center_x1 = 0.25;
    double center_x2 = 0.25;
    double radius = 0.0;
};

/// gen_quadric with (x1, x2) rejection-sampled outside the hole.
PointCloud gen_quadric_with_hole(std::size_t count, std::uint64_t seed, const Hole& hole);

/// Adds i.i.d. N(0, sigma^2) noise to every coordinate.
PointCloud add_noise(const PointCloud& cloud, double sigma, std::uint64_t seed);

struct CsvOptions {
    bool header = true;
    /// Treat the last column as a string label.
    bool label_column = false;
};

/// Comma-separated values with a header "x1,...,xn[,label]". Lines starting
/// with '#' before the data are skipped.
PointCloud load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
/// Writes shortest round-trip decimals. `comment` lines, if any, are
/// prefixed with "# " and written before the header.
void save_csv(const PointCloud& cloud, const std::filesystem::path& path, const std::string& comment = {});

/// Random disjoint train/test split; the test part has round(fraction * N) points.
std::pair<PointCloud, PointCloud> split(const PointCloud& cloud, double holdout_fraction, std::uint64_t seed);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

} // namespace gamla
