#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "inflscope/panel.hpp"

namespace inflscope {

/// Symmetric, non-negative matrix with zero diagonal over named entities.
class DistanceMatrix {
public:
    /// Validates the invariants (symmetry within 1e-12, zero diagonal,
    /// non-negative entries); throws DataError on violation.
    DistanceMatrix(std::vector<std::string> entities, Eigen::MatrixXd d);

    const std::vector<std::string>& entities() const noexcept { return entities_; }
    const Eigen::MatrixXd& matrix() const noexcept { return d_; }
    std::size_t size() const noexcept { return entities_.size(); }
    double operator()(std::size_t i, std::size_t j) const {
        return d_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }

private:
    std::vector<std::string> entities_;
    Eigen::MatrixXd d_;
};

/// d[i][j] = || T_i - T_j ||_1. Trajectories must share a length.
DistanceMatrix trajectory_distance_matrix(std::span<const NormalizedTrajectory> trajectories);

enum class Linkage { average, single, complete };

Linkage parse_linkage(std::string_view text);
std::string to_string(Linkage linkage);

/// One agglomeration step. Leaves are ids 0..n-1; the cluster created by merge
/// k gets id n+k. `left` < `right`.
struct Merge {
    std::size_t left;
    std::size_t right;
    double height;
    std::size_t size;
};

struct Dendrogram {
    std::vector<std::string> entities;
    Linkage linkage = Linkage::average;
    std::vector<Merge> merges;            // exactly n-1
    std::vector<std::size_t> leaf_order;  // plotting order of leaves
};

/// Agglomerative clustering with Lance-Williams updates. Among equally close
/// cluster pairs the lexicographically smallest (id_a, id_b) merges first.
Dendrogram hierarchical_cluster(const DistanceMatrix& dist, Linkage linkage = Linkage::average);

/// Partition obtained by undoing the last k-1 merges. Each cluster lists leaf
/// indices ascending; clusters are ordered by their smallest leaf.
std::vector<std::vector<std::size_t>> cut_clusters(const Dendrogram& dendro, std::size_t k);

void write_distance_csv(const DistanceMatrix& dist, std::ostream& out);
nlohmann::json dendrogram_to_json(const Dendrogram& dendro);

}  // namespace inflscope
