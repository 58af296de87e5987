#include "inflscope/distance.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <limits>
#include <numeric>
#include <ostream>

#include "inflscope/error.hpp"
#include "inflscope/format.hpp"

namespace inflscope {

DistanceMatrix::DistanceMatrix(std::vector<std::string> entities, Eigen::MatrixXd d)
    : entities_(std::move(entities)), d_(std::move(d)) {
    const auto n = static_cast<Eigen::Index>(entities_.size());
    if (d_.rows() != n || d_.cols() != n)
        throw DataError("distance matrix is " + std::to_string(d_.rows()) + "x" +
                        std::to_string(d_.cols()) + " for " + std::to_string(n) + " entities");
    for (Eigen::Index i = 0; i < n; ++i) {
        if (d_(i, i) != 0.0) throw DataError("distance matrix diagonal must be zero");
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!std::isfinite(d_(i, j)) || d_(i, j) < 0.0)
                throw DataError("distance matrix entries must be finite and non-negative");
            if (std::abs(d_(i, j) - d_(j, i)) > 1e-12)
                throw DataError("distance matrix is not symmetric");
        }
    }
}

DistanceMatrix trajectory_distance_matrix(std::span<const NormalizedTrajectory> trajectories) {
    const std::size_t n = trajectories.size();
    if (n < 2) throw DataError("distance matrix needs at least 2 trajectories");
    const Eigen::Index len = trajectories[0].values.size();
    for (const auto& t : trajectories)
        if (t.values.size() != len)
            throw DataError("trajectory length mismatch: '" + t.entity + "' has " +
                            std::to_string(t.values.size()) + " points, expected " +
                            std::to_string(len));

    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(n));
    std::vector<std::string> names;
    names.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        names.push_back(trajectories[i].entity);
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = (trajectories[i].values - trajectories[j].values).lpNorm<1>();
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            d(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    }
    return DistanceMatrix(std::move(names), std::move(d));
}

Linkage parse_linkage(std::string_view text) {
    if (text == "average") return Linkage::average;
    if (text == "single") return Linkage::single;
    if (text == "complete") return Linkage::complete;
    throw ConfigError("unknown linkage '" + std::string(text) + "' (expected average|single|complete)");
}

std::string to_string(Linkage linkage) {
    switch (linkage) {
        case Linkage::average: return "average";
        case Linkage::single: return "single";
        case Linkage::complete: return "complete";
    }
    return "average";
}

Dendrogram hierarchical_cluster(const DistanceMatrix& dist, Linkage linkage) {
    const std::size_t n = dist.size();
    if (n < 2) throw DataError("clustering needs at least 2 entities");

    // Working matrix indexed by slot; slot s holds cluster ids_[s].
    Eigen::MatrixXd w = dist.matrix();
    std::vector<std::size_t> id(n), size(n, 1);
    std::vector<bool> active(n, true);
    std::iota(id.begin(), id.end(), 0);

    Dendrogram out;
    out.entities = dist.entities();
    out.linkage = linkage;
    out.merges.reserve(n - 1);

    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t best_a = 0, best_b = 0;
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_ida = 0, best_idb = 0;
        for (std::size_t a = 0; a < n; ++a) {
            if (!active[a]) continue;
            for (std::size_t b = a + 1; b < n; ++b) {
                if (!active[b]) continue;
                const double v = w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
                const std::size_t lo = std::min(id[a], id[b]);
                const std::size_t hi = std::max(id[a], id[b]);
                if (v < best || (v == best && std::pair(lo, hi) < std::pair(best_ida, best_idb))) {
                    best = v;
                    best_a = a;
                    best_b = b;
                    best_ida = lo;
                    best_idb = hi;
                }
            }
        }

        const double na = static_cast<double>(size[best_a]);
        const double nb = static_cast<double>(size[best_b]);
        for (std::size_t c = 0; c < n; ++c) {
            if (!active[c] || c == best_a || c == best_b) continue;
            const auto ea = static_cast<Eigen::Index>(best_a);
            const auto eb = static_cast<Eigen::Index>(best_b);
            const auto ec = static_cast<Eigen::Index>(c);
            double v = 0.0;
            switch (linkage) {
                case Linkage::average: v = (na * w(ea, ec) + nb * w(eb, ec)) / (na + nb); break;
                case Linkage::single: v = std::min(w(ea, ec), w(eb, ec)); break;
                case Linkage::complete: v = std::max(w(ea, ec), w(eb, ec)); break;
            }
            w(ea, ec) = v;
            w(ec, ea) = v;
        }

        out.merges.push_back(Merge{best_ida, best_idb, best, size[best_a] + size[best_b]});
        id[best_a] = n + step;
        size[best_a] += size[best_b];
        active[best_b] = false;
    }

    // Leaf order: left subtree before right subtree, starting at the root.
    std::vector<std::size_t> order;
    order.reserve(n);
    std::vector<std::size_t> stack{2 * n - 2};
    while (!stack.empty()) {
        const std::size_t node = stack.back();
        stack.pop_back();
        if (node < n) {
            order.push_back(node);
        } else {
            const Merge& m = out.merges[node - n];
            stack.push_back(m.right);
            stack.push_back(m.left);
        }
    }
    out.leaf_order = std::move(order);
    return out;
}

std::vector<std::vector<std::size_t>> cut_clusters(const Dendrogram& dendro, std::size_t k) {
    const std::size_t n = dendro.entities.size();
    if (k < 1 || k > n)
        throw std::invalid_argument("cluster count k=" + std::to_string(k) + " outside [1, " +
                                    std::to_string(n) + "]");
    // Union-find over the first n-k merges.
    std::vector<std::size_t> parent(2 * n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t m = 0; m + k < n; ++m) {
        const Merge& mg = dendro.merges[m];
        parent[find(mg.left)] = n + m;
        parent[find(mg.right)] = n + m;
    }
    std::vector<std::vector<std::size_t>> clusters;
    std::vector<std::size_t> root_slot(2 * n, static_cast<std::size_t>(-1));
    for (std::size_t leaf = 0; leaf < n; ++leaf) {
        const std::size_t r = find(leaf);
        if (root_slot[r] == static_cast<std::size_t>(-1)) {
            root_slot[r] = clusters.size();
            clusters.emplace_back();
        }
        clusters[root_slot[r]].push_back(leaf);
    }
    return clusters;
}

void write_distance_csv(const DistanceMatrix& dist, std::ostream& out) {
    out << "entity";
    for (const auto& e : dist.entities()) out << ',' << csv_field(e);
    out << '\n';
    for (std::size_t i = 0; i < dist.size(); ++i) {
        out << csv_field(dist.entities()[i]);
        for (std::size_t j = 0; j < dist.size(); ++j) out << ',' << format_number(dist(i, j));
        out << '\n';
    }
}

nlohmann::json dendrogram_to_json(const Dendrogram& dendro) {
    nlohmann::json merges = nlohmann::json::array();
    for (const auto& m : dendro.merges)
        merges.push_back({{"left", m.left},
                          {"right", m.right},
                          {"height", round_to_report_precision(m.height)},
                          {"size", m.size}});
    return nlohmann::json{{"entities", dendro.entities},
                          {"linkage", to_string(dendro.linkage)},
                          {"merges", std::move(merges)},
                          {"leaf_order", dendro.leaf_order}};
}

}  // namespace inflscope
