#include "inflscope/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "inflscope/error.hpp"
#include "inflscope/format.hpp"

namespace inflscope {

Frequency parse_frequency(std::string_view text) {
    if (text == "monthly") return Frequency::monthly;
    if (text == "daily") return Frequency::daily;
    throw ConfigError("unknown frequency '" + std::string(text) + "' (expected monthly|daily)");
}

MissingPolicy parse_missing_policy(std::string_view text) {
    if (text == "reject") return MissingPolicy::reject;
    if (text == "drop_row" || text == "drop-row") return MissingPolicy::drop_row;
    throw ConfigError("unknown missing policy '" + std::string(text) + "' (expected reject|drop_row)");
}

std::string to_string(Frequency f) { return f == Frequency::monthly ? "monthly" : "daily"; }

// ---------------------------------------------------------------------------
// Panel
// ---------------------------------------------------------------------------

Panel::Panel(std::vector<Date> dates, std::vector<std::string> entities, Eigen::MatrixXd values,
             Frequency frequency, std::size_t min_rows)
    : dates_(std::move(dates)),
      entities_(std::move(entities)),
      values_(std::move(values)),
      frequency_(frequency) {
    if (dates_.size() < min_rows)
        throw DataError("panel needs at least " + std::to_string(min_rows) + " rows, got " +
                        std::to_string(dates_.size()));
    if (entities_.empty()) throw DataError("panel has no entities");
    if (static_cast<std::size_t>(values_.rows()) != dates_.size() ||
        static_cast<std::size_t>(values_.cols()) != entities_.size())
        throw DataError("panel values do not match dates x entities");
    for (std::size_t t = 1; t < dates_.size(); ++t)
        if (!(dates_[t - 1] < dates_[t]))
            throw DataError("dates not strictly increasing at " + dates_[t].iso());
    std::set<std::string> seen;
    for (const auto& e : entities_) {
        if (e.empty()) throw DataError("empty entity name");
        if (!seen.insert(e).second) throw DataError("duplicate entity '" + e + "'");
    }
    for (Eigen::Index j = 0; j < values_.cols(); ++j)
        for (Eigen::Index t = 0; t < values_.rows(); ++t)
            if (!std::isfinite(values_(t, j)))
                throw DataError("non-finite value for '" + entities_[j] + "' at " +
                                dates_[t].iso());
}

bool Panel::contains(std::string_view entity) const noexcept {
    return std::find(entities_.begin(), entities_.end(), entity) != entities_.end();
}

std::size_t Panel::index_of(std::string_view entity) const {
    auto it = std::find(entities_.begin(), entities_.end(), entity);
    if (it == entities_.end()) throw DataError("unknown entity '" + std::string(entity) + "'");
    return static_cast<std::size_t>(it - entities_.begin());
}

Eigen::VectorXd Panel::column(std::string_view entity) const {
    return values_.col(static_cast<Eigen::Index>(index_of(entity)));
}

Series Panel::series(std::string_view entity) const {
    return Series{std::string(entity), dates_, column(entity)};
}

std::size_t Panel::lower_bound(const Date& date) const {
    return static_cast<std::size_t>(std::lower_bound(dates_.begin(), dates_.end(), date) -
                                    dates_.begin());
}

bool operator==(const Panel& a, const Panel& b) {
    return a.frequency_ == b.frequency_ && a.dates_ == b.dates_ && a.entities_ == b.entities_ &&
           a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
           a.values_ == b.values_;
}

namespace {

struct RowSpan {
    std::size_t begin;
    std::size_t end;
};

RowSpan date_span(const Panel& p, const Date& first, const Date& last) {
    if (last < first) throw DataError("empty date range " + first.iso() + " .. " + last.iso());
    const std::size_t b = p.lower_bound(first);
    std::size_t e = b;
    while (e < p.rows() && !(last < p.dates()[e])) ++e;
    return {b, e};
}

std::vector<std::size_t> column_indices(const Panel& p, std::span<const std::string> names) {
    std::vector<std::size_t> idx;
    idx.reserve(names.size());
    for (const auto& n : names) idx.push_back(p.index_of(n));
    return idx;
}

template <class P>
P take_rows(const P& p, std::size_t b, std::size_t e) {
    std::vector<Date> d(p.dates().begin() + static_cast<std::ptrdiff_t>(b),
                        p.dates().begin() + static_cast<std::ptrdiff_t>(e));
    Eigen::MatrixXd v = p.values().middleRows(static_cast<Eigen::Index>(b),
                                              static_cast<Eigen::Index>(e - b));
    return P(std::move(d), p.entities(), std::move(v), p.frequency());
}

template <class P>
P take_cols(const P& p, std::span<const std::string> names) {
    const auto idx = column_indices(p, names);
    Eigen::MatrixXd v(static_cast<Eigen::Index>(p.rows()), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k)
        v.col(static_cast<Eigen::Index>(k)) = p.values().col(static_cast<Eigen::Index>(idx[k]));
    return P(p.dates(), std::vector<std::string>(names.begin(), names.end()), std::move(v),
             p.frequency());
}

}  // namespace

TimeSeriesPanel TimeSeriesPanel::slice(const Date& first, const Date& last) const {
    const auto s = date_span(*this, first, last);
    return take_rows(*this, s.begin, s.end);
}

TimeSeriesPanel TimeSeriesPanel::select(std::span<const std::string> entities) const {
    return take_cols(*this, entities);
}

ReturnsPanel ReturnsPanel::slice(const Date& first, const Date& last) const {
    const auto s = date_span(*this, first, last);
    return take_rows(*this, s.begin, s.end);
}

ReturnsPanel ReturnsPanel::rows_range(std::size_t begin, std::size_t end) const {
    if (begin >= end || end > rows()) throw DataError("row range out of bounds");
    return take_rows(*this, begin, end);
}

ReturnsPanel ReturnsPanel::select(std::span<const std::string> entities) const {
    return take_cols(*this, entities);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back(trim(field));
            field.clear();
        } else {
            field += c;
        }
    }
    out.emplace_back(trim(field));
    return out;
}

bool is_missing_token(std::string_view s) {
    return s.empty() || s == "NA" || s == "N/A" || s == "NaN" || s == "nan" || s == "null" ||
           s == "NULL";
}

std::string where(std::size_t line, std::string_view column) {
    return "line " + std::to_string(line) + ", column '" + std::string(column) + "'";
}

}  // namespace

RawTable read_table(std::istream& in, Frequency frequency) {
    RawTable table;
    std::string line;
    std::size_t line_no = 0;

    // header
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw IngestError("empty CSV: no header row");
    auto header = split_csv_line(line);
    if (header.size() < 2) throw IngestError("header must be 'date,<entity>,...'");
    table.entities.assign(header.begin() + 1, header.end());
    for (std::size_t j = 0; j < table.entities.size(); ++j)
        if (table.entities[j].empty())
            throw IngestError("line " + std::to_string(line_no) + ": empty entity name in column " +
                              std::to_string(j + 2));

    const std::size_t n = table.entities.size();
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() != n + 1)
            throw IngestError("line " + std::to_string(line_no) + ": expected " +
                              std::to_string(n + 1) + " fields, got " +
                              std::to_string(fields.size()));
        Date d;
        try {
            d = Date::parse(fields[0]);
        } catch (const IngestError&) {
            throw IngestError(where(line_no, header[0]) + ": unparseable date '" + fields[0] + "'");
        }
        if (frequency == Frequency::monthly) d.day = 1;

        std::vector<std::optional<double>> row(n);
        for (std::size_t j = 0; j < n; ++j) {
            std::string_view cell = fields[j + 1];
            if (is_missing_token(cell)) continue;
            if (cell.front() == '+') cell.remove_prefix(1);
            double v = 0.0;
            auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
                throw IngestError(where(line_no, table.entities[j]) + ": cannot parse number '" +
                                  fields[j + 1] + "'");
            if (std::isfinite(v)) row[j] = v;
        }
        table.dates.push_back(d);
        table.line_numbers.push_back(line_no);
        table.cells.push_back(std::move(row));
    }

    for (std::size_t t = 1; t < table.dates.size(); ++t) {
        if (table.dates[t] == table.dates[t - 1])
            throw IngestError("line " + std::to_string(table.line_numbers[t]) + ": duplicate date " +
                              table.dates[t].iso());
        if (table.dates[t] < table.dates[t - 1])
            throw IngestError("line " + std::to_string(table.line_numbers[t]) +
                              ": dates not strictly increasing");
    }
    return table;
}

namespace {

struct Dense {
    std::vector<Date> dates;
    Eigen::MatrixXd values;
    std::size_t dropped = 0;
};

Dense densify(const RawTable& table, MissingPolicy policy) {
    Dense out;
    std::vector<std::size_t> keep;
    for (std::size_t t = 0; t < table.cells.size(); ++t) {
        const auto& row = table.cells[t];
        auto missing = std::find(row.begin(), row.end(), std::nullopt);
        if (missing == row.end()) {
            keep.push_back(t);
            continue;
        }
        if (policy == MissingPolicy::reject) {
            const auto j = static_cast<std::size_t>(missing - row.begin());
            throw IngestError(where(table.line_numbers[t], table.entities[j]) +
                              ": missing value (policy reject)");
        }
        ++out.dropped;
    }
    out.values.resize(static_cast<Eigen::Index>(keep.size()),
                      static_cast<Eigen::Index>(table.entities.size()));
    for (std::size_t r = 0; r < keep.size(); ++r) {
        out.dates.push_back(table.dates[keep[r]]);
        for (std::size_t j = 0; j < table.entities.size(); ++j)
            out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) =
                *table.cells[keep[r]][j];
    }
    return out;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open '" + path + "'");
    return in;
}

}  // namespace

LoadResult read_csv(std::istream& in, Frequency frequency, MissingPolicy policy) {
    RawTable table = read_table(in, frequency);
    Dense dense = densify(table, policy);
    return LoadResult{TimeSeriesPanel(std::move(dense.dates), std::move(table.entities),
                                      std::move(dense.values), frequency),
                      dense.dropped};
}

LoadResult load_csv(const std::string& path, Frequency frequency, MissingPolicy policy) {
    auto in = open_input(path);
    try {
        return read_csv(in, frequency, policy);
    } catch (const IngestError& e) {
        throw IngestError(path + ": " + e.what());
    }
}

ReturnsPanel load_returns_csv(const std::string& path, Frequency frequency, MissingPolicy policy) {
    auto in = open_input(path);
    RawTable table;
    try {
        table = read_table(in, frequency);
    } catch (const IngestError& e) {
        throw IngestError(path + ": " + e.what());
    }
    Dense dense = densify(table, policy);
    return ReturnsPanel(std::move(dense.dates), std::move(table.entities), std::move(dense.values),
                        frequency);
}

void write_csv(const Panel& panel, std::ostream& out) {
    const bool with_day = panel.frequency() == Frequency::daily;
    out << "date";
    for (const auto& e : panel.entities()) out << ',' << csv_field(e);
    out << '\n';
    for (std::size_t t = 0; t < panel.rows(); ++t) {
        out << panel.dates()[t].iso(with_day);
        for (std::size_t j = 0; j < panel.cols(); ++j)
            out << ',' << format_exact(panel.values()(static_cast<Eigen::Index>(t),
                                                      static_cast<Eigen::Index>(j)));
        out << '\n';
    }
}

void write_csv(const Panel& panel, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot write '" + path + "'");
    write_csv(panel, out);
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

ReturnsPanel log_returns(const TimeSeriesPanel& panel) {
    const auto& x = panel.values();
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        for (Eigen::Index t = 0; t < x.rows(); ++t)
            if (!(x(t, j) > 0.0))
                throw DomainError("non-positive value " + format_number(x(t, j)) + " for '" +
                                  panel.entities()[static_cast<std::size_t>(j)] + "' at " +
                                  panel.dates()[static_cast<std::size_t>(t)].iso() +
                                  "; log returns need positive levels");
    const Eigen::Index rows = x.rows() - 1;
    Eigen::MatrixXd r(rows, x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        for (Eigen::Index t = 0; t < rows; ++t) r(t, j) = std::log(x(t + 1, j) / x(t, j));
    std::vector<Date> dates(panel.dates().begin() + 1, panel.dates().end());
    return ReturnsPanel(std::move(dates), panel.entities(), std::move(r), panel.frequency());
}

NormalizedTrajectory l1_normalize(std::string entity, const Eigen::VectorXd& values) {
    const double norm = values.lpNorm<1>();
    if (!(norm > 0.0) || !std::isfinite(norm))
        throw DataError("degenerate trajectory for '" + entity + "': L1 norm is zero");
    return NormalizedTrajectory{std::move(entity), values / norm};
}

NormalizedTrajectory l1_normalize(const ReturnsPanel& returns, std::string_view entity) {
    return l1_normalize(std::string(entity), returns.column(entity));
}

std::vector<NormalizedTrajectory> l1_normalize_all(const ReturnsPanel& returns) {
    std::vector<NormalizedTrajectory> out;
    out.reserve(returns.cols());
    for (const auto& e : returns.entities()) out.push_back(l1_normalize(returns, e));
    return out;
}

}  // namespace inflscope
