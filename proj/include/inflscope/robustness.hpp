#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "inflscope/panel.hpp"

namespace inflscope {

enum class Regime { extreme, stable };

/// Sorted, non-empty sample of log returns.
struct EmpiricalDistribution {
    std::vector<double> samples;
    Regime label = Regime::stable;
};

EmpiricalDistribution make_distribution(std::vector<double> samples, Regime label);

/// Linear-interpolation quantile of a sorted sample (h = (n-1) p).
double quantile_sorted(const std::vector<double>& sorted, double p);

struct DecileSplit {
    EmpiricalDistribution extreme;
    EmpiricalDistribution stable;
    double lower_cutoff = 0.0;  // 10th percentile of inflation returns
    double upper_cutoff = 0.0;  // 90th percentile
    std::vector<std::size_t> bottom_rows;  // inflation <= lower cutoff
    std::vector<std::size_t> top_rows;     // inflation >= upper cutoff
};

inline constexpr std::size_t kMinJointObservations = 20;

/// Months whose inflation return is at or beyond the 10th/90th percentile
/// send their equity return to `extreme`, the rest to `stable`. The two
/// series must carry identical dates and at least 20 observations.
DecileSplit split_by_inflation_deciles(const Series& inflation, const Series& equity);

/// Order-1 Wasserstein distance: integral of |F_p - F_q| over the merged
/// breakpoints of the two empirical CDFs.
double wasserstein_1d(const EmpiricalDistribution& p, const EmpiricalDistribution& q);

struct RobustnessScore {
    std::string entity;
    double er = 0.0;
    std::size_t n_extreme = 0;
    std::size_t n_stable = 0;
};

RobustnessScore equity_robustness(const Series& inflation, const Series& equity);

/// Mean equity return in top-decile inflation months minus the mean in
/// bottom-decile months.
double mean_return_discrepancy(const Series& inflation, const Series& equity);
double mean_return_discrepancy(const DecileSplit& split, const Series& equity);

/// Rows (entity, ER, n_extreme, n_stable, mean_discrepancy).
struct RobustnessRow {
    RobustnessScore score;
    double mean_discrepancy = 0.0;
};
void write_robustness_csv(const std::vector<RobustnessRow>& rows, std::ostream& out);

/// Rows (regime, log_return), extreme samples first, each sorted.
void write_conditional_samples_csv(const DecileSplit& split, std::ostream& out);

}  // namespace inflscope
