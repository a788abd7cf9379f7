#include "gamla/point_cloud.hpp"

#include <algorithm>

#include "gamla/error.hpp"

namespace gamla {

void PointCloud::validate() const {
    if (!points.allFinite()) throw ContractError("point cloud contains non-finite entries");
    if (!labels.empty() && labels.size() != size())
        throw ContractError("point cloud has " + std::to_string(labels.size()) + " labels for " +
                            std::to_string(size()) + " points");
}

PointCloud PointCloud::subset(const std::vector<std::size_t>& indices) const {
    PointCloud out;
    out.points.resize(static_cast<Eigen::Index>(indices.size()), points.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        detail::require(indices[r] < size(), "subset index out of range");
        out.points.row(static_cast<Eigen::Index>(r)) = points.row(static_cast<Eigen::Index>(indices[r]));
        if (has_labels()) out.labels.push_back(labels[indices[r]]);
    }
    out.provenance = provenance;
    return out;
}

bool Hyperrectangle::contains(const Eigen::VectorXd& x) const {
    if (x.size() != low.size()) return false;
    return (x.array() >= low.array()).all() && (x.array() <= high.array()).all();
}

void Hyperrectangle::validate() const {
    if (low.size() == 0 || low.size() != high.size()) throw ContractError("hyperrectangle bounds have mismatched length");
    if (!low.allFinite() || !high.allFinite()) throw ContractError("hyperrectangle bounds must be finite");
    for (Eigen::Index i = 0; i < low.size(); ++i)
        if (!(low(i) < high(i))) throw ContractError("degenerate hyperrectangle on axis " + std::to_string(i));
}

Hyperrectangle Hyperrectangle::bounding(const Eigen::MatrixXd& points, double margin) {
    detail::require(points.rows() > 0 && points.cols() > 0, "bounding box of an empty point set");
    detail::require(margin >= 0.0, "bounding box margin must be non-negative");
    Hyperrectangle box;
    box.low = points.colwise().minCoeff().transpose();
    box.high = points.colwise().maxCoeff().transpose();
    for (Eigen::Index i = 0; i < box.low.size(); ++i) {
        double extent = box.high(i) - box.low(i);
        if (extent <= 0.0) extent = 1e-3;
        const double pad = 0.5 * margin * extent;
        box.low(i) -= pad;
        box.high(i) += pad;
        if (!(box.low(i) < box.high(i))) {
            box.low(i) -= 5e-4;
            box.high(i) += 5e-4;
        }
    }
    return box;
}

} // namespace gamla
