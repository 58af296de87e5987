#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "inflscope/distance.hpp"
#include "inflscope/panel.hpp"

namespace inflscope {

/// Rolling-window lengths of the three trend models, in months.
inline constexpr std::size_t kModel1Window = 60;
inline constexpr std::size_t kModel2Window = 120;
inline constexpr std::size_t kModel3Window = 30;
inline constexpr int kDefaultMaxOffset = 24;

/// "M1"/"M2"/"M3" for the standard windows, "window-<w>" otherwise.
std::string model_label(std::size_t window);

/// OLS fit y(s) = intercept + slope * s + residual over s = 0..n-1.
struct RegressionFit {
    double intercept = 0.0;
    double slope = 0.0;
    Eigen::VectorXd residuals;
    std::size_t first = 0;  // window rows [first, last]
    std::size_t last = 0;
};

RegressionFit fit_linear_trend(std::span<const double> y);

/// Slope coefficients of rolling OLS fits; values[k] belongs to the window
/// ending at row k + window - 1 of the returns panel.
struct SlopeTrajectory {
    std::string entity;
    std::size_t window = 0;
    std::vector<Date> dates;  // window-end dates
    Eigen::VectorXd values;
};

SlopeTrajectory rolling_slope(const ReturnsPanel& returns, std::string_view entity,
                              std::size_t window);
std::vector<SlopeTrajectory> rolling_slopes(const ReturnsPanel& returns, std::size_t window);

struct OffsetResult {
    int offset = 0;      // phi; positive means b lags a
    double score = 0.0;  // normalised inner product of the overlapping segments
};

/// Normalised inner product of a and b at offset phi: for phi >= 0 pairs
/// a[k] with b[k + phi]; for phi < 0 pairs a[k + |phi|] with b[k]. Returns
/// false when either overlapping segment has zero norm.
bool offset_score(std::span<const double> a, std::span<const double> b, int phi, double& score);

/// Exhaustive search over phi in [-max_offset, max_offset]. Ties prefer the
/// smallest |phi|, then the negative offset. Throws DataError("degenerate
/// trajectories") when every offset is skipped.
OffsetResult optimal_offset(const SlopeTrajectory& a, const SlopeTrajectory& b, int max_offset);
OffsetResult optimal_offset(std::span<const double> a, std::span<const double> b, int max_offset);

struct CentralityReport {
    std::size_t window = 0;
    int max_offset = 0;
    DistanceMatrix offsets;          // |phi*| per pair
    Eigen::MatrixXi signed_offsets;  // phi*(i, j)
    Eigen::VectorXd scores;          // column sums of `offsets`; lower = more central
};

CentralityReport centrality_report(std::span<const SlopeTrajectory> trajectories, int max_offset);

/// Splits the returns at `split` (rows dated before / on-or-after), fits
/// rolling slopes in each part and reports both.
std::pair<CentralityReport, CentralityReport> partitioned_centrality(const ReturnsPanel& returns,
                                                                     const Date& split,
                                                                     std::size_t window,
                                                                     int max_offset);

/// {model, window, phi_max, entities, offset_matrix, signed_offsets, scores,
/// ranking}; ranking lists entities from lowest to highest score.
nlohmann::json centrality_to_json(const CentralityReport& report);

/// Wide CSV: window_end_date,<entity...>.
void write_slopes_csv(std::span<const SlopeTrajectory> slopes, Frequency frequency,
                      std::ostream& out);

}  // namespace inflscope
