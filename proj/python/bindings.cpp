#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "inflscope/centrality.hpp"
#include "inflscope/cli.hpp"
#include "inflscope/distance.hpp"
#include "inflscope/error.hpp"
#include "inflscope/optimizer.hpp"
#include "inflscope/panel.hpp"
#include "inflscope/robustness.hpp"
#include "inflscope/sectorcorr.hpp"
#include "inflscope/spectrum.hpp"

namespace py = pybind11;
using namespace inflscope;

namespace {

// Array inputs carry no calendar; rows are given consecutive month dates.
std::vector<Date> row_dates(Eigen::Index n) {
    std::vector<Date> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < n; ++k) out.push_back(Date{2000, 1, 1}.add_months(static_cast<int>(k)));
    return out;
}

std::vector<std::string> column_names(Eigen::Index n) {
    std::vector<std::string> out;
    for (Eigen::Index j = 0; j < n; ++j) out.push_back("c" + std::to_string(j));
    return out;
}

ReturnsPanel returns_of(const Eigen::MatrixXd& r) {
    return ReturnsPanel(row_dates(r.rows()), column_names(r.cols()), r, Frequency::monthly);
}

Series series_of(const std::string& name, const Eigen::VectorXd& v) { return Series{name, row_dates(v.size()), v}; }

DistanceMatrix distance_of(const Eigen::MatrixXd& d) { return DistanceMatrix(column_names(d.rows()), d); }

std::span<const double> span_of(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace

PYBIND11_MODULE(_inflscope, m) {
    m.doc() = "Inflation co-movement, centrality, robustness, sector correlation and portfolio analytics";

    auto error = py::register_exception<Error>(m, "Error");
    py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
    auto data_error = py::register_exception<DataError>(m, "DataError", error.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
    py::register_exception<IngestError>(m, "IngestError", data_error.ptr());
    py::register_exception<DomainError>(m, "DomainError", data_error.ptr());

    m.def(
        "load_csv",
        [](const std::string& path, const std::string& frequency, const std::string& missing) {
            const auto r = load_csv(path, parse_frequency(frequency), parse_missing_policy(missing));
            std::vector<std::string> dates;
            for (const auto& d : r.panel.dates()) dates.push_back(d.iso());
            return py::make_tuple(dates, r.panel.entities(), r.panel.values(), r.dropped_rows);
        },
        py::arg("path"), py::arg("frequency") = "monthly", py::arg("missing") = "reject",
        "Read a date,<entity...> CSV; returns (dates, entities, values, dropped_rows).");

    m.def(
        "log_returns",
        [](const Eigen::MatrixXd& levels) {
            const TimeSeriesPanel p(row_dates(levels.rows()), column_names(levels.cols()), levels, Frequency::monthly);
            return Eigen::MatrixXd(log_returns(p).values());
        },
        py::arg("levels"), "Log returns of each column; one row shorter than the input.");

    m.def(
        "trajectory_distance",
        [](const Eigen::MatrixXd& returns) {
            return trajectory_distance_matrix(l1_normalize_all(returns_of(returns))).matrix();
        },
        py::arg("returns"), "L1 distance between the L1-normalised columns.");

    m.def(
        "eigen_decompose",
        [](const Eigen::MatrixXd& a) {
            const auto s = eigen_decompose(a);
            return py::make_tuple(s.eigenvalues, s.eigenvectors);
        },
        py::arg("matrix"), "Eigenvalues sorted by magnitude and the matching eigenvectors.");

    m.def("operator_norm", [](const Eigen::MatrixXd& a) { return operator_norm(a); }, py::arg("matrix"));

    m.def(
        "similarity_count",
        [](const Eigen::MatrixXd& a, double threshold) {
            const auto c = similarity_count(eigen_decompose(a), threshold);
            return py::make_tuple(c.k, c.similar_entities);
        },
        py::arg("matrix"), py::arg("threshold"),
        "(k, similar_entities): eigenvalues below the threshold and the implied group size, or None.");

    m.def(
        "hierarchical_cluster",
        [](const Eigen::MatrixXd& d, const std::string& linkage) {
            std::vector<std::tuple<std::size_t, std::size_t, double, std::size_t>> out;
            for (const auto& mg : hierarchical_cluster(distance_of(d), parse_linkage(linkage)).merges)
                out.emplace_back(mg.left, mg.right, mg.height, mg.size);
            return out;
        },
        py::arg("distance"), py::arg("linkage") = "average", "Merges as (left, right, height, size); merge k creates cluster id n + k.");

    m.def(
        "cut_clusters",
        [](const Eigen::MatrixXd& d, std::size_t k, const std::string& linkage) {
            return cut_clusters(hierarchical_cluster(distance_of(d), parse_linkage(linkage)), k);
        },
        py::arg("distance"), py::arg("k"), py::arg("linkage") = "average", "Leaf indices of each of the k clusters.");

    m.def(
        "rolling_slope",
        [](const Eigen::VectorXd& returns, std::size_t window) {
            Eigen::MatrixXd m1(returns.size(), 1);
            m1.col(0) = returns;
            return rolling_slope(returns_of(m1), "c0", window).values;
        },
        py::arg("returns"), py::arg("window"), "Trend slope over every trailing window.");

    m.def(
        "optimal_offset",
        [](const Eigen::VectorXd& a, const Eigen::VectorXd& b, int max_offset) {
            const auto r = optimal_offset(span_of(a), span_of(b), max_offset);
            return py::make_tuple(r.offset, r.score);
        },
        py::arg("a"), py::arg("b"), py::arg("max_offset") = 24, "(phi, score); positive phi means b lags a.");

    m.def(
        "centrality",
        [](const Eigen::MatrixXd& slopes, int max_offset) {
            std::vector<SlopeTrajectory> t;
            const auto dates = row_dates(slopes.rows());
            for (Eigen::Index j = 0; j < slopes.cols(); ++j)
                t.push_back(SlopeTrajectory{"c" + std::to_string(j), 0, dates, slopes.col(j)});
            const auto r = centrality_report(t, max_offset);
            return py::make_tuple(r.offsets.matrix(), r.signed_offsets, r.scores);
        },
        py::arg("slopes"), py::arg("max_offset") = 24,
        "(|phi| matrix, signed phi matrix, scores) for slope trajectories in columns.");

    m.def(
        "wasserstein",
        [](std::vector<double> p, std::vector<double> q) {
            return wasserstein_1d(make_distribution(std::move(p), Regime::stable),
                                  make_distribution(std::move(q), Regime::extreme));
        },
        py::arg("p"), py::arg("q"), "Order-1 Wasserstein distance between two samples.");

    m.def(
        "equity_robustness",
        [](const Eigen::VectorXd& inflation, const Eigen::VectorXd& equity) {
            const Series i = series_of("inflation", inflation), e = series_of("equity", equity);
            const auto split = split_by_inflation_deciles(i, e);
            py::dict out;
            out["er"] = wasserstein_1d(split.stable, split.extreme);
            out["n_extreme"] = split.extreme.samples.size();
            out["n_stable"] = split.stable.samples.size();
            out["mean_discrepancy"] = mean_return_discrepancy(split, e);
            return out;
        },
        py::arg("inflation"), py::arg("equity"));

    m.def(
        "rolling_correlation",
        [](const Eigen::MatrixXd& returns, std::size_t window) {
            std::vector<std::pair<std::string, std::string>> map;
            for (const auto& n : column_names(returns.cols())) map.emplace_back(n, "sector");
            return rolling_correlation(returns_of(returns), SectorMap(map), "sector", window).mean_offdiag;
        },
        py::arg("returns"), py::arg("window") = kDefaultCorrelationWindow,
        "Mean off-diagonal correlation of the columns over every trailing window.");

    m.def("project_box_sum", &project_box_sum, py::arg("y"), py::arg("lower"), py::arg("upper"), py::arg("total"));

    m.def(
        "solve_weights",
        [](const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, double core_weight, double lower, double upper,
           double risk_free, const std::string& objective) {
            auto spec = PortfolioSpec::with_defaults(column_names(mean.size()));
            spec.core_weight = core_weight;
            spec.lower.assign(spec.free_count(), lower);
            spec.upper.assign(spec.free_count(), upper);
            spec.risk_free = risk_free;
            spec.objective = parse_objective(objective);
            const auto r = solve_weights(WindowEstimates{mean, cov}, spec);
            return py::make_tuple(r.weights, r.objective);
        },
        py::arg("mean"), py::arg("cov"), py::arg("core_weight") = 0.4, py::arg("lower") = 0.025,
        py::arg("upper") = 0.3, py::arg("risk_free") = 0.0025, py::arg("objective") = "variance",
        "(weights, objective) with the first asset pinned at core_weight.");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run a command-line invocation; returns (exit_code, stdout, stderr).");
}
