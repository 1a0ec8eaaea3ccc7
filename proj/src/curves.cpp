#include "tanova/curves.hpp"

#include <set>

namespace tanova {

CurveGroupSet::CurveGroupSet(std::vector<std::string> labels,
                             std::vector<Matrix> curves,
                             std::optional<Vector> grid)
    : labels_(std::move(labels)), curves_(std::move(curves)), grid_(std::move(grid)) {
    if (curves_.empty()) {
        throw InvalidInput("curve set has no groups");
    }
    if (labels_.size() != curves_.size()) {
        throw InvalidInput("group label count does not match group count");
    }
    std::set<std::string> seen;
    for (const std::string& l : labels_) {
        if (!seen.insert(l).second) {
            throw InvalidInput("duplicate group label '" + l + "'");
        }
    }
    const Index q = curves_.front().cols();
    if (q < 1) {
        throw InvalidInput("curves must have at least one sample point");
    }
    for (size_t j = 0; j < curves_.size(); ++j) {
        if (curves_[j].cols() != q) {
            throw DimMismatch("group '" + labels_[j] + "' has " +
                              std::to_string(curves_[j].cols()) +
                              " sample points, expected " + std::to_string(q));
        }
        if (curves_[j].rows() < 2) {
            throw InsufficientData("group '" + labels_[j] +
                                   "' has fewer than 2 curves");
        }
        if (!curves_[j].allFinite()) {
            throw InvalidInput("group '" + labels_[j] + "' has non-finite values");
        }
    }
    if (grid_ && grid_->size() != q) {
        throw DimMismatch("grid length " + std::to_string(grid_->size()) +
                          " does not match curve dimension " + std::to_string(q));
    }
}

Index CurveGroupSet::total_curves() const {
    Index n = 0;
    for (const Matrix& m : curves_) n += m.rows();
    return n;
}

std::vector<int> CurveGroupSet::group_sizes() const {
    std::vector<int> sizes;
    sizes.reserve(curves_.size());
    for (const Matrix& m : curves_) sizes.push_back(static_cast<int>(m.rows()));
    return sizes;
}

}  // namespace tanova
