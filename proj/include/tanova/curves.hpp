#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tanova/matrix_types.hpp"

namespace tanova {

// K labeled groups of discretized curves.  Group j holds an n_j x q matrix
// whose rows are curves sampled on a common grid of q points.
class CurveGroupSet {
public:
    CurveGroupSet(std::vector<std::string> labels, std::vector<Matrix> curves,
                  std::optional<Vector> grid = std::nullopt);

    int n_groups() const { return static_cast<int>(curves_.size()); }
    Index dim() const { return curves_.front().cols(); }
    Index total_curves() const;
    std::vector<int> group_sizes() const;

    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<Matrix>& curves() const { return curves_; }
    const std::optional<Vector>& grid() const { return grid_; }

private:
    std::vector<std::string> labels_;
    std::vector<Matrix> curves_;
    std::optional<Vector> grid_;
};

}  // namespace tanova
