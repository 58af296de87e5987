#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "inflscope/panel.hpp"

namespace inflscope::synth {

/// Eight monthly CPI level series, 1955-01 .. 2021-09. Every country shares a
/// 1970s inflation hump; "Australia" and "Japan" peak 48 and 84 months
/// earlier than the rest.
TimeSeriesPanel cpi_panel(std::uint64_t seed);

inline const std::vector<std::string>& cpi_outliers() {
    static const std::vector<std::string> names{"Australia", "Japan"};
    return names;
}

/// `n_series` monthly level series whose first `n_identical` share one
/// returns path up to multiplicative noise (1 + noise * z).
TimeSeriesPanel rank_perturbation_panel(std::uint64_t seed, std::size_t n_series = 10,
                                        std::size_t n_identical = 8, double noise = 1e-3,
                                        std::size_t months = 240);

/// Panel whose missing cells are NaN; written with blank cells.
struct SparseTable {
    std::vector<Date> dates;
    std::vector<std::string> entities;
    Eigen::MatrixXd values;
    Frequency frequency = Frequency::monthly;
};

void write_sparse_csv(const SparseTable& table, std::ostream& out);

/// Monthly equity index levels over the CPI panel's 1990-01 .. end range.
/// Australia is only observed quarterly.
SparseTable equity_panel(std::uint64_t seed, const TimeSeriesPanel& cpi);

struct SectorFixture {
    TimeSeriesPanel prices;  // daily, weekdays 2004-07-01 .. 2009-12-31
    std::vector<std::pair<std::string, std::string>> sector_map;
};

/// Factor-model daily prices for four sectors with distinct loadings plus a
/// single-member sector.
SectorFixture sector_panel(std::uint64_t seed);

/// Seven daily asset price series, 2016-01-01 .. 2021-06-30, core equity
/// first. "Bitcoin" has the dominant mean return.
TimeSeriesPanel asset_panel(std::uint64_t seed);

/// A smooth reference slope series and copies shifted so that the optimal
/// offset against the reference equals each requested shift.
struct ShiftedSlopes {
    Eigen::VectorXd reference;
    std::vector<int> shifts;
    std::vector<Eigen::VectorXd> shifted;
};

ShiftedSlopes shifted_slope_series(std::uint64_t seed, std::size_t length,
                                   std::span<const int> shifts);

void write_shifted_slopes_csv(const ShiftedSlopes& slopes, std::ostream& out);

/// Mean vector and positive definite covariance of a random portfolio
/// problem, on a daily return scale.
struct PortfolioInstance {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

PortfolioInstance portfolio_instance(std::uint64_t seed, std::size_t assets = 4);

/// Weekdays in [first, last].
std::vector<Date> business_days(const Date& first, const Date& last);
std::vector<Date> month_starts(const Date& first, std::size_t count);

}  // namespace inflscope::synth
