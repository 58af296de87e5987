#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <doctest.h>

#include "inflscope/distance.hpp"
#include "inflscope/error.hpp"
#include "support.hpp"

using namespace inflscope;
using namespace testing;

namespace {

DistanceMatrix named(const Eigen::MatrixXd& d) {
    return DistanceMatrix(names(static_cast<std::size_t>(d.rows())), d);
}

/// Naive agglomeration: every step recomputes the linkage distance between
/// all active clusters from the original matrix.
std::vector<Merge> naive_cluster(const Eigen::MatrixXd& d, Linkage linkage) {
    const std::size_t n = static_cast<std::size_t>(d.rows());
    std::map<std::size_t, std::vector<std::size_t>> active;  // id -> leaves
    for (std::size_t i = 0; i < n; ++i) active[i] = {i};

    auto between = [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
        double sum = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i : a)
            for (std::size_t j : b) {
                const double v = d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                sum += v;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        if (linkage == Linkage::single) return lo;
        if (linkage == Linkage::complete) return hi;
        return sum / static_cast<double>(a.size() * b.size());
    };

    std::vector<Merge> merges;
    for (std::size_t step = 0; step + 1 < n; ++step) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t ba = 0, bb = 0;
        for (auto ia = active.begin(); ia != active.end(); ++ia)
            for (auto ib = std::next(ia); ib != active.end(); ++ib) {
                const double v = between(ia->second, ib->second);
                if (v < best) {  // map order visits (id_a, id_b) lexicographically
                    best = v;
                    ba = ia->first;
                    bb = ib->first;
                }
            }
        std::vector<std::size_t> leaves = active[ba];
        leaves.insert(leaves.end(), active[bb].begin(), active[bb].end());
        merges.push_back(Merge{ba, bb, best, leaves.size()});
        active.erase(ba);
        active.erase(bb);
        active[n + step] = std::move(leaves);
    }
    return merges;
}

/// (sorted leaf names of the merged cluster) -> height, for every merge.
std::map<std::set<std::string>, double> cluster_heights(const Dendrogram& dendro) {
    const std::size_t n = dendro.entities.size();
    std::vector<std::set<std::string>> members(2 * n - 1);
    for (std::size_t i = 0; i < n; ++i) members[i] = {dendro.entities[i]};
    std::map<std::set<std::string>, double> out;
    for (std::size_t k = 0; k < dendro.merges.size(); ++k) {
        const auto& m = dendro.merges[k];
        members[n + k] = members[m.left];
        members[n + k].insert(members[m.right].begin(), members[m.right].end());
        out[members[n + k]] = m.height;
    }
    return out;
}

}  // namespace

TEST_SUITE("distance") {

TEST_CASE("identical trajectories are at distance zero") {
    Eigen::VectorXd v(4);
    v << 0.1, -0.4, 0.3, 0.2;
    const std::vector<NormalizedTrajectory> t{{"A", v}, {"B", v}, {"C", v}};
    const auto d = trajectory_distance_matrix(t);
    CHECK(d.matrix().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("two-point example") {
    Eigen::VectorXd a(2), b(2);
    a << 0.5, 0.5;
    b << 0.5, -0.5;
    const std::vector<NormalizedTrajectory> t{{"A", a}, {"B", b}};
    CHECK(trajectory_distance_matrix(t)(0, 1) == 1.0);
}

TEST_CASE("matches a brute-force double loop") {
    Rng rng(21);
    for (int rep = 0; rep < 50; ++rep) {
        const auto len = static_cast<Eigen::Index>(uniform_int(rng, 1, 50));
        std::vector<NormalizedTrajectory> t;
        for (int i = 0; i < 3; ++i) t.push_back(l1_normalize("E" + std::to_string(i), random_vector(rng, len)));
        const auto d = trajectory_distance_matrix(t);
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) {
                double s = 0.0;
                for (Eigen::Index k = 0; k < len; ++k) s += std::abs(t[i].values(k) - t[j].values(k));
                CHECK(std::abs(d(i, j) - s) < 1e-13);
            }
    }
}

TEST_CASE("length mismatch is rejected") {
    const std::vector<NormalizedTrajectory> t{{"A", Eigen::VectorXd::Ones(3) / 3.0},
                                              {"B", Eigen::VectorXd::Ones(4) / 4.0}};
    CHECK_THROWS_AS(trajectory_distance_matrix(t), DataError);
}

TEST_CASE("triangle inequality on sampled triples") {
    Rng rng(22);
    std::vector<NormalizedTrajectory> t;
    for (int i = 0; i < 12; ++i) t.push_back(l1_normalize("E" + std::to_string(i), random_vector(rng, 30)));
    const auto d = trajectory_distance_matrix(t);
    for (int rep = 0; rep < 500; ++rep) {
        const auto i = uniform_int(rng, 0, 11), j = uniform_int(rng, 0, 11), k = uniform_int(rng, 0, 11);
        CHECK(d(i, k) <= d(i, j) + d(j, k) + 1e-12);
    }
}

TEST_CASE("distance matrix invariants") {
    Eigen::MatrixXd asym = Eigen::MatrixXd::Zero(2, 2);
    asym(0, 1) = 1.0;
    asym(1, 0) = 1.1;
    CHECK_THROWS_AS(named(asym), DataError);
    Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(2, 2);
    diag(0, 0) = 1.0;
    CHECK_THROWS_AS(named(diag), DataError);
    Eigen::MatrixXd neg = Eigen::MatrixXd::Zero(2, 2);
    neg(0, 1) = neg(1, 0) = -1.0;
    CHECK_THROWS_AS(named(neg), DataError);
}

TEST_CASE("two entities merge once at their distance") {
    Eigen::MatrixXd d(2, 2);
    d << 0, 3.5, 3.5, 0;
    const auto dendro = hierarchical_cluster(named(d));
    REQUIRE(dendro.merges.size() == 1);
    CHECK(dendro.merges[0].left == 0);
    CHECK(dendro.merges[0].right == 1);
    CHECK(dendro.merges[0].height == 3.5);
    CHECK(dendro.merges[0].size == 2);
}

TEST_CASE("two well-separated pairs") {
    Eigen::MatrixXd d(4, 4);
    d << 0, 1, 10, 10,  //
        1, 0, 10, 10,   //
        10, 10, 0, 1,   //
        10, 10, 1, 0;
    const auto dendro = hierarchical_cluster(named(d), Linkage::average);
    REQUIRE(dendro.merges.size() == 3);
    CHECK(dendro.merges[0].height == 1.0);
    CHECK(dendro.merges[1].height == 1.0);
    CHECK(dendro.merges[2].height == 10.0);
    // Tie between (0,1) and (2,3) resolves to the smaller pair first.
    CHECK(dendro.merges[0].left == 0);
    CHECK(dendro.merges[0].right == 1);
    CHECK(dendro.merges[2].left == 4);
    CHECK(dendro.merges[2].right == 5);
    const auto parts = cut_clusters(dendro, 2);
    REQUIRE(parts.size() == 2);
    CHECK(parts[0] == std::vector<std::size_t>{0, 1});
    CHECK(parts[1] == std::vector<std::size_t>{2, 3});
    CHECK(dendro.leaf_order == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("cut extremes and range") {
    Rng rng(23);
    const auto dendro = hierarchical_cluster(named(random_dissimilarity(rng, 5)));
    const auto one = cut_clusters(dendro, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0] == std::vector<std::size_t>{0, 1, 2, 3, 4});
    const auto all = cut_clusters(dendro, 5);
    REQUIRE(all.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) CHECK(all[i] == std::vector<std::size_t>{i});
    CHECK_THROWS_AS(cut_clusters(dendro, 0), std::invalid_argument);
    CHECK_THROWS_AS(cut_clusters(dendro, 6), std::invalid_argument);
}

TEST_CASE("merge sequence matches the naive oracle") {
    Rng rng(24);
    for (Linkage linkage : {Linkage::average, Linkage::single, Linkage::complete}) {
        for (int rep = 0; rep < 100; ++rep) {
            const auto n = static_cast<Eigen::Index>(rep < 60 ? 6 : uniform_int(rng, 2, 12));
            const Eigen::MatrixXd d = random_dissimilarity(rng, n);
            const auto got = hierarchical_cluster(named(d), linkage).merges;
            const auto want = naive_cluster(d, linkage);
            REQUIRE(got.size() == want.size());
            for (std::size_t k = 0; k < got.size(); ++k) {
                CHECK(got[k].left == want[k].left);
                CHECK(got[k].right == want[k].right);
                CHECK(got[k].size == want[k].size);
                CHECK(std::abs(got[k].height - want[k].height) < 1e-12);
            }
        }
    }
}

TEST_CASE("ties follow the lowest id pair on integer matrices") {
    Rng rng(25);
    for (int rep = 0; rep < 200; ++rep) {
        const auto n = static_cast<Eigen::Index>(uniform_int(rng, 3, 8));
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = static_cast<double>(uniform_int(rng, 1, 3));
        for (Linkage linkage : {Linkage::single, Linkage::complete}) {
            const auto got = hierarchical_cluster(named(d), linkage).merges;
            const auto want = naive_cluster(d, linkage);
            for (std::size_t k = 0; k < got.size(); ++k) {
                CHECK(got[k].left == want[k].left);
                CHECK(got[k].right == want[k].right);
                CHECK(got[k].height == want[k].height);
            }
        }
    }
}

TEST_CASE("structural invariants of the dendrogram") {
    Rng rng(26);
    for (int rep = 0; rep < 100; ++rep) {
        const auto n = static_cast<Eigen::Index>(uniform_int(rng, 2, 15));
        for (Linkage linkage : {Linkage::average, Linkage::single, Linkage::complete}) {
            const auto dendro = hierarchical_cluster(named(random_dissimilarity(rng, n)), linkage);
            CHECK(dendro.merges.size() == static_cast<std::size_t>(n - 1));
            for (std::size_t k = 1; k < dendro.merges.size(); ++k)
                CHECK(dendro.merges[k].height >= dendro.merges[k - 1].height);
            CHECK(dendro.merges.back().size == static_cast<std::size_t>(n));
            std::vector<std::size_t> sorted = dendro.leaf_order;
            std::sort(sorted.begin(), sorted.end());
            for (std::size_t i = 0; i < sorted.size(); ++i) CHECK(sorted[i] == i);
            for (std::size_t k = 1; k <= static_cast<std::size_t>(n); ++k)
                CHECK(cut_clusters(dendro, k).size() == k);
        }
    }
}

TEST_CASE("permuting entities yields an isomorphic dendrogram") {
    Rng rng(27);
    for (int rep = 0; rep < 50; ++rep) {
        const auto n = static_cast<Eigen::Index>(uniform_int(rng, 3, 10));
        const Eigen::MatrixXd d = random_dissimilarity(rng, n);
        std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
        std::shuffle(perm.begin(), perm.end(), rng);
        Eigen::MatrixXd pd(n, n);
        std::vector<std::string> pn;
        const auto base = names(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            pn.push_back(base[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
            for (Eigen::Index j = 0; j < n; ++j)
                pd(i, j) = d(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        }
        for (Linkage linkage : {Linkage::average, Linkage::single, Linkage::complete}) {
            const auto a = cluster_heights(hierarchical_cluster(DistanceMatrix(base, d), linkage));
            const auto b = cluster_heights(hierarchical_cluster(DistanceMatrix(pn, pd), linkage));
            REQUIRE(a.size() == b.size());
            for (const auto& [members, h] : a) {
                REQUIRE(b.count(members) == 1);
                CHECK(std::abs(b.at(members) - h) < 1e-12 * std::max(1.0, h));
            }
        }
    }
}

TEST_CASE("average-linkage heights scale with the matrix") {
    Rng rng(28);
    for (int rep = 0; rep < 50; ++rep) {
        const Eigen::MatrixXd d = random_dissimilarity(rng, 7);
        const double c = uniform(rng, 0.01, 100.0);
        const auto a = hierarchical_cluster(named(d)).merges;
        const auto b = hierarchical_cluster(named(c * d)).merges;
        for (std::size_t k = 0; k < a.size(); ++k) {
            CHECK(a[k].left == b[k].left);
            CHECK(a[k].right == b[k].right);
            CHECK(std::abs(b[k].height - c * a[k].height) < 1e-12 * c * a[k].height);
        }
    }
}

TEST_CASE("outputs") {
    Eigen::MatrixXd d(3, 3);
    d << 0, 1, 2, 1, 0, 1.5, 2, 1.5, 0;
    const DistanceMatrix dm({"A", "B", "C"}, d);
    std::ostringstream csv;
    write_distance_csv(dm, csv);
    CHECK(csv.str() == "entity,A,B,C\nA,0,1,2\nB,1,0,1.5\nC,2,1.5,0\n");
    const auto j = dendrogram_to_json(hierarchical_cluster(dm));
    REQUIRE(j["merges"].size() == 2);
    CHECK(j["merges"][0]["left"] == 0);
    CHECK(j["merges"][0]["right"] == 1);
    CHECK(j["merges"][0]["height"] == 1.0);
    CHECK(j["merges"][1]["height"] == 1.75);
    CHECK(j["merges"][1]["size"] == 3);
    CHECK(j["linkage"] == "average");
    CHECK(parse_linkage("complete") == Linkage::complete);
    CHECK_THROWS_AS(parse_linkage("ward"), ConfigError);
}

}
