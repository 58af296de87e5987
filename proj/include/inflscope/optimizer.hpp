#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "inflscope/panel.hpp"

namespace inflscope {

/// Denominator of the risk-adjusted objective: portfolio variance (the
/// default) or its square root.
enum class Objective { variance, stdev };

Objective parse_objective(std::string_view text);
std::string to_string(Objective objective);

/// Constraint set and estimation settings for the rolling optimisation.
///
/// `assets[0]` is the core holding, pinned at `core_weight`. The remaining
/// assets are long-only with per-asset bounds `lower[k] <= w[k+1] <= upper[k]`
/// and the full vector sums to one.
struct PortfolioSpec {
    std::vector<std::string> assets;
    double core_weight = 0.4;
    std::vector<double> lower;  // size assets.size() - 1
    std::vector<double> upper;
    double risk_free = 0.0025;
    std::size_t window = 250;
    Objective objective = Objective::variance;

    /// Default bounds [0.025, 0.3] for every free asset.
    static PortfolioSpec with_defaults(std::vector<std::string> assets);

    std::size_t free_count() const noexcept { return assets.empty() ? 0 : assets.size() - 1; }

    /// Structural checks (sizes, 0 <= lo <= hi, at least one free asset);
    /// throws ConfigError.
    void validate() const;
    /// core + sum(lo) <= 1 <= core + sum(hi).
    bool feasible() const;
};

/// Sample mean and covariance (denominator window - 1) of one window.
struct WindowEstimates {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

/// Window of rows [end - window, end) across every column of `returns`.
WindowEstimates estimate_window(const ReturnsPanel& returns, std::size_t end, std::size_t window);
WindowEstimates estimate_window(const Eigen::MatrixXd& block);

/// Euclidean projection of y onto { x : lo <= x <= hi, sum(x) = total }.
/// Solved exactly over the sorted breakpoints of the piecewise-linear sum.
Eigen::VectorXd project_box_sum(const Eigen::VectorXd& y, const Eigen::VectorXd& lo,
                                const Eigen::VectorXd& hi, double total);

/// (w'mu - rf) / (w' Sigma w), or divided by the square root for `stdev`.
double portfolio_objective(const Eigen::VectorXd& weights, const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& cov, double risk_free, Objective objective);

struct SolveResult {
    Eigen::VectorXd weights;  // full vector, core first
    double objective = 0.0;
    std::size_t iterations = 0;
};

/// Maximises the objective by multi-start projected-gradient ascent over the
/// free weights. The covariance is regularised by 1e-10 * trace / A on the
/// diagonal. Throws ConfigError if the constraint set is empty, DataError if
/// the covariance is not positive semidefinite, and NumericalError if the
/// covariance is identically zero.
SolveResult solve_weights(const WindowEstimates& estimates, const PortfolioSpec& spec,
                          const std::optional<Eigen::VectorXd>& warm_start = std::nullopt);

struct WeightTrajectory {
    std::vector<std::string> assets;
    std::vector<Date> dates;       // window-end dates
    Eigen::MatrixXd weights;       // row t = w*(t)
    std::vector<double> objective;
};

/// solve_weights at every window end. Each window warm-starts from the
/// previous solution unless `cold_start` is set.
WeightTrajectory rolling_optimize(const ReturnsPanel& returns, const PortfolioSpec& spec,
                                  bool cold_start = false);

struct WeightStats {
    std::vector<std::string> assets;
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;  // population variance over time
};

WeightStats weight_stats(const WeightTrajectory& trajectory);

struct SweepRow {
    double core_weight = 0.0;
    bool feasible = false;
    std::optional<WeightStats> stats;
    std::string message;
};

/// One rolling optimisation per core weight. Infeasible core weights yield a
/// row marked infeasible and the sweep continues.
std::vector<SweepRow> sensitivity_sweep(const ReturnsPanel& returns, const PortfolioSpec& spec,
                                        const std::vector<double>& core_weights);

/// Rows (date, <asset...>, objective).
void write_weights_csv(const WeightTrajectory& trajectory, Frequency frequency, std::ostream& out);
/// Rows (asset, mean_weight, weight_variance).
void write_weight_stats_csv(const WeightStats& stats, std::ostream& out);
/// Rows (core_weight, asset, mean_weight); infeasible rows carry asset
/// `infeasible` and an empty weight.
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

}  // namespace inflscope
