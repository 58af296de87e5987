#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "inflscope/panel.hpp"

namespace inflscope {

inline constexpr std::size_t kDefaultCorrelationWindow = 120;

/// Static entity -> sector assignment.
class SectorMap {
public:
    /// Throws DataError if an entity is assigned to two different sectors.
    explicit SectorMap(const std::vector<std::pair<std::string, std::string>>& assignments);

    /// Reads `entity,sector` rows (a header line is skipped when its second
    /// field is literally `sector`).
    static SectorMap load(const std::string& path);
    static SectorMap read(std::istream& in);

    const std::string& sector_of(std::string_view entity) const;
    /// Sector names in lexicographic order.
    std::vector<std::string> sectors() const;
    /// Members of `sector` in first-seen order.
    const std::vector<std::string>& members(std::string_view sector) const;

private:
    std::map<std::string, std::string, std::less<>> sector_of_;
    std::map<std::string, std::vector<std::string>, std::less<>> members_;
};

struct RollingCorrelation {
    std::string sector;
    std::size_t members = 0;
    std::size_t window = 0;
    std::vector<Date> dates;            // window-end dates
    std::vector<double> mean_offdiag;   // mean upper-triangle correlation
    std::vector<std::string> warnings;  // excluded pairs / windows
};

/// Pearson correlation matrix of `columns` over rows [end - window + 1, end].
/// Pairs involving a zero-variance column are NaN.
Eigen::MatrixXd window_correlation(const ReturnsPanel& returns,
                                   const std::vector<std::size_t>& columns, std::size_t end,
                                   std::size_t window);

/// Mean off-diagonal correlation of the sector for every full trailing
/// window. Zero-variance pairs are excluded from that window's mean; a window
/// with no valid pair is skipped. Both events are recorded as warnings.
RollingCorrelation rolling_correlation(const ReturnsPanel& returns, const SectorMap& map,
                                       std::string_view sector,
                                       std::size_t window = kDefaultCorrelationWindow);

struct SectorAverage {
    std::string sector;
    double mean = 0.0;
    std::size_t members = 0;
    std::size_t windows = 0;
};

/// Time average of mean_offdiag over window ends in [from, to].
SectorAverage average_sector_correlation(const RollingCorrelation& rc, const Date& from,
                                         const Date& to);
SectorAverage average_sector_correlation(const RollingCorrelation& rc);

void write_rolling_correlation_csv(const RollingCorrelation& rc, Frequency frequency,
                                   std::ostream& out);
/// Rows (sector, mu, S_n, n_windows).
void write_sector_summary_csv(const std::vector<SectorAverage>& rows, std::ostream& out);

}  // namespace inflscope
