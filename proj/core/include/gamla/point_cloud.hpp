#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gamla {

/// N x n sample matrix (one point per row) with optional per-point labels.
struct PointCloud {
    Eigen::MatrixXd points;
    std::vector<std::string> labels; // empty, or one entry per row
    std::string provenance;          // e.g. "quadric(count=100,seed=7)"

    std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }
    bool empty() const { return points.rows() == 0; }
    bool has_labels() const { return !labels.empty(); }

    Eigen::VectorXd point(std::size_t i) const { return points.row(static_cast<Eigen::Index>(i)).transpose(); }

    /// Throws ContractError on non-finite entries or a label count mismatch.
    void validate() const;

    /// Rows selected by index, labels carried along.
    PointCloud subset(const std::vector<std::size_t>& indices) const;
};

/// Axis-aligned box, `low(i) < high(i)` on every axis.
struct Hyperrectangle {
    Eigen::VectorXd low;
    Eigen::VectorXd high;

    std::size_t dim() const { return static_cast<std::size_t>(low.size()); }
    bool contains(const Eigen::VectorXd& x) const;
    void validate() const;

    /// Bounding box of `points` widened by `margin` times the extent on each
    /// axis (half on each side). A flat axis gets a unit-free minimum width.
    static Hyperrectangle bounding(const Eigen::MatrixXd& points, double margin);
};

} // namespace gamla
