#include "gamla/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "gamla/error.hpp"

namespace gamla {

namespace {

std::string provenance(const char* name, std::size_t count, std::uint64_t seed) {
    return std::string(name) + "(count=" + std::to_string(count) + ",seed=" + std::to_string(seed) + ")";
}

} // namespace

double quadric_height(double x1, double x2) { return -0.2 * x1 + 0.5 * x1 * x1 + 0.2 * x1 * x2; }

PointCloud gen_quadric(std::size_t count, std::uint64_t seed) {
    return gen_quadric_with_hole(count, seed, Hole{});
}

PointCloud gen_quadric_with_hole(std::size_t count, std::uint64_t seed, const Hole& hole) {
    detail::require(count >= 1, "count must be >= 1");
    detail::require(hole.radius >= 0.0, "hole radius must be non-negative");
    constexpr double lo = -1.0;
    constexpr double hi = 1.5;
    auto in_hole = [&](double x1, double x2) {
        const double d1 = x1 - hole.center_x1;
        const double d2 = x2 - hole.center_x2;
        return hole.radius > 0.0 && d1 * d1 + d2 * d2 < hole.radius * hole.radius;
    };
    // The disk is convex, so it swallows the square iff it contains all corners.
    if (in_hole(lo, lo) && in_hole(lo, hi) && in_hole(hi, lo) && in_hole(hi, hi))
        throw ContractError("hole covers the whole quadric domain");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    PointCloud cloud;
    cloud.points.resize(static_cast<Eigen::Index>(count), 3);
    for (Eigen::Index i = 0; i < cloud.points.rows(); ++i) {
        double x1 = 0.0;
        double x2 = 0.0;
        do {
            x1 = u(rng);
            x2 = u(rng);
        } while (in_hole(x1, x2));
        cloud.points.row(i) << x1, x2, quadric_height(x1, x2);
    }
    cloud.provenance = hole.radius > 0.0
                           ? "quadric_hole(count=" + std::to_string(count) + ",seed=" + std::to_string(seed) +
                                 ",center=" + format_double(hole.center_x1) + ";" + format_double(hole.center_x2) +
                                 ",radius=" + format_double(hole.radius) + ")"
                           : provenance("quadric", count, seed);
    return cloud;
}

Eigen::Vector3d cylinder_point(double theta, double l) {
    return {0.4 * std::cos(theta) + 0.4, 0.4 * std::sin(theta), l};
}

PointCloud gen_cylinder(std::size_t count, std::uint64_t seed) {
    detail::require(count >= 1, "count must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> theta(0.0, 1.5 * std::numbers::pi);
    std::uniform_real_distribution<double> height(-0.4, 0.4);
    PointCloud cloud;
    cloud.points.resize(static_cast<Eigen::Index>(count), 3);
    for (Eigen::Index i = 0; i < cloud.points.rows(); ++i) {
        const double t = theta(rng);
        const double l = height(rng);
        cloud.points.row(i) = cylinder_point(t, l).transpose();
    }
    cloud.provenance = provenance("cylinder", count, seed);
    return cloud;
}

Eigen::Vector3d swiss_roll_point(double r, double l) {
    const double t = 1.5 * std::numbers::pi * (1.0 + 2.0 * r);
    return {0.04 * t * std::cos(t), l, 0.04 * t * std::sin(t)};
}

PointCloud gen_swiss_roll(std::size_t count, std::uint64_t seed) {
    detail::require(count >= 1, "count must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ru(0.0, 1.0);
    std::uniform_real_distribution<double> lu(0.0, 0.8);
    PointCloud cloud;
    cloud.points.resize(static_cast<Eigen::Index>(count), 3);
    for (Eigen::Index i = 0; i < cloud.points.rows(); ++i) {
        const double r = ru(rng);
        const double l = lu(rng);
        cloud.points.row(i) = swiss_roll_point(r, l).transpose();
    }
    cloud.provenance = provenance("swiss_roll", count, seed);
    return cloud;
}

PointCloud add_noise(const PointCloud& cloud, double sigma, std::uint64_t seed) {
    detail::require(sigma >= 0.0 && std::isfinite(sigma), "noise sigma must be >= 0");
    PointCloud out = cloud;
    if (sigma == 0.0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (Eigen::Index i = 0; i < out.points.rows(); ++i)
        for (Eigen::Index j = 0; j < out.points.cols(); ++j) out.points(i, j) += noise(rng);
    out.provenance = cloud.provenance + "+noise(sigma=" + format_double(sigma) + ",seed=" + std::to_string(seed) + ")";
    return out;
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

double parse_number(const std::string& text, std::size_t line_no) {
    std::size_t begin = 0;
    std::size_t end = text.size();
    while (begin < end && (text[begin] == ' ' || text[begin] == '\t')) ++begin;
    while (end > begin && (text[end - 1] == ' ' || text[end - 1] == '\t')) --end;
    double v = 0.0;
    const char* first = text.data() + begin;
    const char* last = text.data() + end;
    if (begin < end && *first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (begin == end || res.ec != std::errc() || res.ptr != last || !std::isfinite(v))
        throw SchemaError("non-numeric cell '" + text + "' on line " + std::to_string(line_no));
    return v;
}

} // namespace

PointCloud load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    std::size_t columns = 0;
    bool header_pending = options.header;
    std::vector<double> values;
    std::vector<std::string> labels;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || (rows == 0 && line.front() == '#')) continue;
        const auto fields = split_fields(line);
        if (header_pending) {
            header_pending = false;
            columns = fields.size();
            continue;
        }
        if (columns == 0) columns = fields.size();
        if (fields.size() != columns)
            throw SchemaError("ragged row on line " + std::to_string(line_no) + ": expected " + std::to_string(columns) +
                              " fields, got " + std::to_string(fields.size()));
        const std::size_t numeric = options.label_column ? columns - 1 : columns;
        for (std::size_t c = 0; c < numeric; ++c) values.push_back(parse_number(fields[c], line_no));
        if (options.label_column) labels.push_back(fields.back());
        ++rows;
    }
    const std::size_t numeric = options.label_column ? (columns == 0 ? 0 : columns - 1) : columns;
    if (rows == 0 || numeric == 0) throw SchemaError("'" + path.string() + "' contains no data rows");
    PointCloud cloud;
    cloud.points = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(numeric));
    cloud.labels = std::move(labels);
    cloud.provenance = "csv(" + path.filename().string() + ")";
    return cloud;
}

void save_csv(const PointCloud& cloud, const std::filesystem::path& path, const std::string& comment) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    if (!comment.empty()) {
        std::istringstream lines(comment);
        std::string l;
        while (std::getline(lines, l)) out << "# " << l << '\n';
    }
    for (std::size_t c = 0; c < cloud.dim(); ++c) out << (c ? "," : "") << 'x' << (c + 1);
    if (cloud.has_labels()) out << ",label";
    out << '\n';
    for (Eigen::Index r = 0; r < cloud.points.rows(); ++r) {
        for (Eigen::Index c = 0; c < cloud.points.cols(); ++c) out << (c ? "," : "") << format_double(cloud.points(r, c));
        if (cloud.has_labels()) out << ',' << cloud.labels[static_cast<std::size_t>(r)];
        out << '\n';
    }
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::pair<PointCloud, PointCloud> split(const PointCloud& cloud, double holdout_fraction, std::uint64_t seed) {
    detail::require(holdout_fraction >= 0.0 && holdout_fraction <= 1.0, "holdout fraction must lie in [0,1]");
    std::vector<std::size_t> idx(cloud.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto test_count = static_cast<std::size_t>(std::llround(holdout_fraction * static_cast<double>(cloud.size())));
    std::vector<std::size_t> test(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(test_count));
    std::vector<std::size_t> train(idx.begin() + static_cast<std::ptrdiff_t>(test_count), idx.end());
    std::sort(test.begin(), test.end());
    std::sort(train.begin(), train.end());
    return {cloud.subset(train), cloud.subset(test)};
}

} // namespace gamla
