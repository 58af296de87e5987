#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "inflscope/date.hpp"

namespace inflscope {

enum class Frequency { monthly, daily };
enum class MissingPolicy { reject, drop_row };

Frequency parse_frequency(std::string_view text);
MissingPolicy parse_missing_policy(std::string_view text);
std::string to_string(Frequency f);

/// One named column of a panel together with its dates.
struct Series {
    std::string name;
    std::vector<Date> dates;
    Eigen::VectorXd values;
};

/// Date-indexed T x n matrix of finite observations.
///
/// Construction validates the invariants (strictly increasing dates, unique
/// non-empty entity names, finite values, minimum row count); afterwards the
/// object is immutable and may be shared freely across threads.
class Panel {
public:
    const std::vector<Date>& dates() const noexcept { return dates_; }
    const std::vector<std::string>& entities() const noexcept { return entities_; }
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    Frequency frequency() const noexcept { return frequency_; }

    std::size_t rows() const noexcept { return dates_.size(); }
    std::size_t cols() const noexcept { return entities_.size(); }

    bool contains(std::string_view entity) const noexcept;
    /// Throws DataError for an unknown entity.
    std::size_t index_of(std::string_view entity) const;
    Eigen::VectorXd column(std::string_view entity) const;
    Series series(std::string_view entity) const;

    /// Index of the first row whose date is >= `date` (rows() if none).
    std::size_t lower_bound(const Date& date) const;

    friend bool operator==(const Panel& a, const Panel& b);

protected:
    Panel(std::vector<Date> dates, std::vector<std::string> entities,
          Eigen::MatrixXd values, Frequency frequency, std::size_t min_rows);

private:
    std::vector<Date> dates_;
    std::vector<std::string> entities_;
    Eigen::MatrixXd values_;
    Frequency frequency_;
};

/// Observed levels (CPI index, equity index, prices). Requires T >= 2.
class TimeSeriesPanel : public Panel {
public:
    TimeSeriesPanel(std::vector<Date> dates, std::vector<std::string> entities,
                    Eigen::MatrixXd values, Frequency frequency)
        : Panel(std::move(dates), std::move(entities), std::move(values), frequency, 2) {}

    /// Rows with first <= date <= last.
    TimeSeriesPanel slice(const Date& first, const Date& last) const;
    TimeSeriesPanel select(std::span<const std::string> entities) const;
};

/// Log returns. Row t holds ln(x(t+1)/x(t)) and is dated at t+1.
class ReturnsPanel : public Panel {
public:
    ReturnsPanel(std::vector<Date> dates, std::vector<std::string> entities,
                 Eigen::MatrixXd values, Frequency frequency)
        : Panel(std::move(dates), std::move(entities), std::move(values), frequency, 1) {}

    ReturnsPanel slice(const Date& first, const Date& last) const;
    /// Rows [begin, end).
    ReturnsPanel rows_range(std::size_t begin, std::size_t end) const;
    ReturnsPanel select(std::span<const std::string> entities) const;
};

/// An L1-normalised returns trajectory.
struct NormalizedTrajectory {
    std::string entity;
    Eigen::VectorXd values;
};

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

/// Parsed CSV before any policy is applied. Missing cells are nullopt.
struct RawTable {
    std::vector<std::string> entities;
    std::vector<Date> dates;
    std::vector<std::size_t> line_numbers;
    std::vector<std::vector<std::optional<double>>> cells;  // [row][entity]
};

/// Parses `date,<entity1>,...` CSV text. Blank, `NA`, `NaN` and `null` cells
/// (and non-finite numerals) are treated as missing. Monthly frequency
/// normalises the day to 1.
RawTable read_table(std::istream& in, Frequency frequency);

struct LoadResult {
    TimeSeriesPanel panel;
    std::size_t dropped_rows = 0;
};

LoadResult read_csv(std::istream& in, Frequency frequency,
                    MissingPolicy policy = MissingPolicy::reject);
LoadResult load_csv(const std::string& path, Frequency frequency,
                    MissingPolicy policy = MissingPolicy::reject);

/// Reads a CSV whose cells already are log returns.
ReturnsPanel load_returns_csv(const std::string& path, Frequency frequency,
                              MissingPolicy policy = MissingPolicy::reject);

/// Writes the panel with the input schema. Values use the shortest decimal
/// form that parses back to the same double, so load -> write -> load is
/// exact.
void write_csv(const Panel& panel, std::ostream& out);
void write_csv(const Panel& panel, const std::string& path);

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

/// out[t][i] = ln(values[t+1][i] / values[t][i]). Throws DomainError naming
/// the entity and date of the first non-positive level.
ReturnsPanel log_returns(const TimeSeriesPanel& panel);

/// Divides by the L1 norm. Throws DataError("degenerate trajectory") when the
/// norm is zero.
NormalizedTrajectory l1_normalize(std::string entity, const Eigen::VectorXd& values);
NormalizedTrajectory l1_normalize(const ReturnsPanel& returns, std::string_view entity);
std::vector<NormalizedTrajectory> l1_normalize_all(const ReturnsPanel& returns);

}  // namespace inflscope
