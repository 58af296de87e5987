#include "inflscope/sectorcorr.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "inflscope/error.hpp"
#include "inflscope/format.hpp"

namespace inflscope {

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\"");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\"");
    return s.substr(b, e - b + 1);
}

}  // namespace

SectorMap::SectorMap(const std::vector<std::pair<std::string, std::string>>& assignments) {
    for (const auto& [entity, sector] : assignments) {
        if (entity.empty() || sector.empty()) throw DataError("sector map has an empty field");
        auto [it, inserted] = sector_of_.emplace(entity, sector);
        if (!inserted) {
            if (it->second != sector)
                throw DataError("entity '" + entity + "' mapped to both '" + it->second +
                                "' and '" + sector + "'");
            continue;
        }
        members_[sector].push_back(entity);
    }
    if (sector_of_.empty()) throw DataError("sector map is empty");
}

SectorMap SectorMap::read(std::istream& in) {
    std::vector<std::pair<std::string, std::string>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw IngestError("sector map line " + std::to_string(line_no) +
                              ": expected 'entity,sector'");
        std::string entity = trim(line.substr(0, comma));
        std::string sector = trim(line.substr(comma + 1));
        if (line_no == 1 && sector == "sector") continue;
        rows.emplace_back(std::move(entity), std::move(sector));
    }
    return SectorMap(rows);
}

SectorMap SectorMap::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open '" + path + "'");
    return read(in);
}

const std::string& SectorMap::sector_of(std::string_view entity) const {
    auto it = sector_of_.find(entity);
    if (it == sector_of_.end()) throw DataError("entity '" + std::string(entity) + "' has no sector");
    return it->second;
}

std::vector<std::string> SectorMap::sectors() const {
    std::vector<std::string> out;
    for (const auto& [name, m] : members_) out.push_back(name);
    return out;
}

const std::vector<std::string>& SectorMap::members(std::string_view sector) const {
    auto it = members_.find(sector);
    if (it == members_.end()) throw DataError("unknown sector '" + std::string(sector) + "'");
    return it->second;
}

Eigen::MatrixXd window_correlation(const ReturnsPanel& returns,
                                   const std::vector<std::size_t>& columns, std::size_t end,
                                   std::size_t window) {
    if (window < 2 || end + 1 < window || end >= returns.rows())
        throw DataError("correlation window out of range");
    const auto k = static_cast<Eigen::Index>(columns.size());
    const auto first = static_cast<Eigen::Index>(end + 1 - window);
    const auto w = static_cast<Eigen::Index>(window);

    // Two passes: window means, then centred cross products. Values are
    // shifted by the window's first entry so a flat column centres to zeros.
    Eigen::MatrixXd centred(w, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        const auto col = static_cast<Eigen::Index>(columns[static_cast<std::size_t>(c)]);
        const double origin = returns.values()(first, col);
        double mean = 0.0;
        for (Eigen::Index t = 0; t < w; ++t) mean += returns.values()(first + t, col) - origin;
        mean /= static_cast<double>(w);
        for (Eigen::Index t = 0; t < w; ++t)
            centred(t, c) = (returns.values()(first + t, col) - origin) - mean;
    }
    Eigen::VectorXd ss(k);
    for (Eigen::Index c = 0; c < k; ++c) ss(c) = centred.col(c).squaredNorm();

    Eigen::MatrixXd corr(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = i; j < k; ++j) {
            double v;
            if (!(ss(i) > 0.0) || !(ss(j) > 0.0)) {
                v = std::numeric_limits<double>::quiet_NaN();
            } else if (i == j) {
                v = 1.0;
            } else {
                v = centred.col(i).dot(centred.col(j)) / std::sqrt(ss(i) * ss(j));
                v = std::clamp(v, -1.0, 1.0);
            }
            corr(i, j) = corr(j, i) = v;
        }
    }
    return corr;
}

RollingCorrelation rolling_correlation(const ReturnsPanel& returns, const SectorMap& map,
                                       std::string_view sector, std::size_t window) {
    const auto& names = map.members(sector);
    if (names.size() < 2)
        throw DataError("sector '" + std::string(sector) + "' has " + std::to_string(names.size()) +
                        " member(s); correlation needs at least 2");
    if (window < 2) throw DataError("correlation window must be at least 2");
    if (window > returns.rows())
        throw DataError("correlation window " + std::to_string(window) + " exceeds the " +
                        std::to_string(returns.rows()) + " available returns");
    std::vector<std::size_t> cols;
    for (const auto& n : names) cols.push_back(returns.index_of(n));

    RollingCorrelation out;
    out.sector = std::string(sector);
    out.members = names.size();
    out.window = window;
    const std::size_t k = cols.size();
    for (std::size_t end = window - 1; end < returns.rows(); ++end) {
        const Eigen::MatrixXd c = window_correlation(returns, cols, end, window);
        double sum = 0.0;
        std::size_t valid = 0;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j) {
                const double v = c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                if (std::isnan(v)) {
                    out.warnings.push_back("window ending " + returns.dates()[end].iso() +
                                           ": pair (" + names[i] + ", " + names[j] +
                                           ") has zero variance; excluded");
                    continue;
                }
                sum += v;
                ++valid;
            }
        if (valid == 0) {
            out.warnings.push_back("window ending " + returns.dates()[end].iso() +
                                   ": no pair with defined correlation; window skipped");
            continue;
        }
        out.dates.push_back(returns.dates()[end]);
        out.mean_offdiag.push_back(sum / static_cast<double>(valid));
    }
    return out;
}

SectorAverage average_sector_correlation(const RollingCorrelation& rc, const Date& from,
                                         const Date& to) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t t = 0; t < rc.dates.size(); ++t) {
        if (rc.dates[t] < from || to < rc.dates[t]) continue;
        sum += rc.mean_offdiag[t];
        ++count;
    }
    if (count == 0)
        throw DataError("no correlation windows for sector '" + rc.sector + "' between " +
                        from.iso() + " and " + to.iso());
    return SectorAverage{rc.sector, sum / static_cast<double>(count), rc.members, count};
}

SectorAverage average_sector_correlation(const RollingCorrelation& rc) {
    if (rc.dates.empty()) throw DataError("no correlation windows for sector '" + rc.sector + "'");
    return average_sector_correlation(rc, rc.dates.front(), rc.dates.back());
}

void write_rolling_correlation_csv(const RollingCorrelation& rc, Frequency frequency,
                                   std::ostream& out) {
    const bool with_day = frequency == Frequency::daily;
    out << "date,mean_offdiag\n";
    for (std::size_t t = 0; t < rc.dates.size(); ++t)
        out << rc.dates[t].iso(with_day) << ',' << format_number(rc.mean_offdiag[t]) << '\n';
}

void write_sector_summary_csv(const std::vector<SectorAverage>& rows, std::ostream& out) {
    out << "sector,mu,S_n,n_windows\n";
    for (const auto& r : rows)
        out << csv_field(r.sector) << ',' << format_number(r.mean) << ',' << r.members << ','
            << r.windows << '\n';
}

}  // namespace inflscope
