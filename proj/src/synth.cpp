#include "inflscope/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <ostream>
#include <random>

#include "inflscope/format.hpp"

namespace inflscope::synth {

namespace {

Eigen::MatrixXd levels_from_returns(const Eigen::MatrixXd& returns, double start) {
    Eigen::MatrixXd levels(returns.rows() + 1, returns.cols());
    levels.row(0).setConstant(start);
    for (Eigen::Index t = 0; t < returns.rows(); ++t)
        levels.row(t + 1) = (levels.row(t).array() * returns.row(t).array().exp()).matrix();
    return levels;
}

double bump(double t, double center, double width) {
    const double z = (t - center) / width;
    return std::exp(-0.5 * z * z);
}

}  // namespace

std::vector<Date> business_days(const Date& first, const Date& last) {
    std::vector<Date> out;
    for (long d = first.days_since_epoch(); d <= last.days_since_epoch(); ++d) {
        const Date date = Date::from_days_since_epoch(d);
        if (date.weekday() <= 5) out.push_back(date);
    }
    return out;
}

std::vector<Date> month_starts(const Date& first, std::size_t count) {
    std::vector<Date> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) out.push_back(first.add_months(static_cast<int>(k)));
    return out;
}

TimeSeriesPanel cpi_panel(std::uint64_t seed) {
    const std::vector<std::string> names{"Australia", "Canada", "France", "Germany",
                                         "Italy",     "Japan",  "UK",     "USA"};
    constexpr std::size_t kMonths = 801;  // 1955-01 .. 2021-09
    const auto dates = month_starts(Date{1955, 1, 1}, kMonths);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.0005);

    const double center = 276.0;  // 1978-01, months after 1955-01
    const double gfc = 646.0;     // 2008-11
    Eigen::MatrixXd r(static_cast<Eigen::Index>(kMonths - 1), static_cast<Eigen::Index>(names.size()));
    for (std::size_t i = 0; i < names.size(); ++i) {
        double lead = 0.0;
        if (names[i] == "Australia") lead = 48.0;
        if (names[i] == "Japan") lead = 84.0;
        for (Eigen::Index t = 0; t < r.rows(); ++t) {
            const double month = static_cast<double>(t + 1);
            r(t, static_cast<Eigen::Index>(i)) = 0.0025 + 0.01 * bump(month, center - lead, 30.0) -
                                                 0.004 * bump(month, gfc, 2.0) + noise(rng);
        }
    }
    return TimeSeriesPanel(dates, names, levels_from_returns(r, 100.0), Frequency::monthly);
}

TimeSeriesPanel rank_perturbation_panel(std::uint64_t seed, std::size_t n_series,
                                        std::size_t n_identical, double noise, std::size_t months) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    const auto rows = static_cast<Eigen::Index>(months - 1);
    const auto cols = static_cast<Eigen::Index>(n_series);

    auto path = [&] {
        Eigen::VectorXd p(rows);
        const double phase = 2.0 * std::numbers::pi * std::uniform_real_distribution<double>(0, 1)(rng);
        for (Eigen::Index t = 0; t < rows; ++t)
            p(t) = 0.003 + 0.002 * std::sin(2.0 * std::numbers::pi * static_cast<double>(t) / 60.0 + phase) +
                   0.001 * z(rng);
        return p;
    };

    const Eigen::VectorXd base = path();
    Eigen::MatrixXd r(rows, cols);
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < cols; ++j) {
        const bool similar = static_cast<std::size_t>(j) < n_identical;
        names.push_back((similar ? "S" : "X") + std::to_string(j + 1));
        if (similar) {
            for (Eigen::Index t = 0; t < rows; ++t) r(t, j) = base(t) * (1.0 + noise * z(rng));
        } else {
            r.col(j) = path();
        }
    }
    return TimeSeriesPanel(month_starts(Date{2000, 1, 1}, months), names,
                           levels_from_returns(r, 100.0), Frequency::monthly);
}

void write_sparse_csv(const SparseTable& table, std::ostream& out) {
    const bool with_day = table.frequency == Frequency::daily;
    out << "date";
    for (const auto& e : table.entities) out << ',' << csv_field(e);
    out << '\n';
    for (std::size_t t = 0; t < table.dates.size(); ++t) {
        out << table.dates[t].iso(with_day);
        for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
            out << ',';
            const double v = table.values(static_cast<Eigen::Index>(t), j);
            if (!std::isnan(v)) out << format_exact(v);
        }
        out << '\n';
    }
}

SparseTable equity_panel(std::uint64_t seed, const TimeSeriesPanel& cpi) {
    const std::size_t first = cpi.lower_bound(Date{1990, 1, 1});
    const std::size_t rows = cpi.rows() - first;
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> z(0.0, 1.0);

    SparseTable out;
    out.frequency = Frequency::monthly;
    out.entities = cpi.entities();
    out.dates.assign(cpi.dates().begin() + static_cast<std::ptrdiff_t>(first), cpi.dates().end());
    out.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cpi.cols()));

    for (std::size_t j = 0; j < cpi.cols(); ++j) {
        const auto ej = static_cast<Eigen::Index>(j);
        // Equity sensitivity to inflation surprises differs by country.
        const double sensitivity = -2.0 + 0.6 * static_cast<double>(j);
        const double vol = 0.035 + 0.004 * static_cast<double>(j % 3);
        double level = 1000.0;
        out.values(0, ej) = level;
        for (std::size_t t = 1; t < rows; ++t) {
            const auto row = static_cast<Eigen::Index>(first + t);
            const double infl = std::log(cpi.values()(row, ej) / cpi.values()(row - 1, ej));
            level *= std::exp(0.006 + sensitivity * (infl - 0.0025) + vol * z(rng));
            out.values(static_cast<Eigen::Index>(t), ej) = level;
        }
        if (cpi.entities()[j] == "Australia")
            for (std::size_t t = 0; t < rows; ++t)
                if (out.dates[t].month % 3 != 1)
                    out.values(static_cast<Eigen::Index>(t), ej) = std::nan("");
    }
    return out;
}

SectorFixture sector_panel(std::uint64_t seed) {
    struct Sector {
        const char* name;
        int members;
        double loading;
    };
    const Sector sectors[] = {{"Energy", 5, 1.6}, {"Financials", 4, 1.1},
                              {"Healthcare", 5, 0.5}, {"Utilities", 3, 1.3},
                              {"Solo", 1, 1.0}};
    const auto dates = business_days(Date{2004, 7, 1}, Date{2009, 12, 31});
    const auto rows = static_cast<Eigen::Index>(dates.size() - 1);
    std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
    std::normal_distribution<double> z(0.0, 1.0);

    Eigen::VectorXd market(rows);
    for (Eigen::Index t = 0; t < rows; ++t) {
        // Market volatility triples through the 2008-2009 crisis.
        const Date& d = dates[static_cast<std::size_t>(t + 1)];
        const bool crisis = (d.year == 2008 && d.month >= 9) || (d.year == 2009 && d.month <= 3);
        market(t) = (crisis ? 0.03 : 0.01) * z(rng);
    }

    std::vector<std::string> names;
    std::vector<std::pair<std::string, std::string>> map;
    std::vector<Eigen::VectorXd> cols;
    for (const auto& s : sectors) {
        Eigen::VectorXd factor(rows);
        for (Eigen::Index t = 0; t < rows; ++t) factor(t) = 0.006 * z(rng);
        for (int k = 0; k < s.members; ++k) {
            std::string name = std::string(s.name).substr(0, 3) + std::to_string(k + 1);
            Eigen::VectorXd r(rows);
            for (Eigen::Index t = 0; t < rows; ++t)
                r(t) = 0.0002 + s.loading * (market(t) + factor(t)) + 0.012 * z(rng);
            names.push_back(name);
            map.emplace_back(name, s.name);
            cols.push_back(std::move(r));
        }
    }
    Eigen::MatrixXd r(rows, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) r.col(static_cast<Eigen::Index>(j)) = cols[j];
    return SectorFixture{TimeSeriesPanel(dates, names, levels_from_returns(r, 50.0), Frequency::daily),
                         std::move(map)};
}

TimeSeriesPanel asset_panel(std::uint64_t seed) {
    const std::vector<std::string> names{"SPX", "LNG", "LMEX", "Energy", "CRB", "REIT", "Bitcoin"};
    const double mean[] = {0.0005, -0.0002, 0.0003, 0.0001, 0.0002, 0.0003, 0.003};
    const double vol[] = {0.010, 0.025, 0.012, 0.018, 0.009, 0.013, 0.040};
    const double market_corr[] = {1.0, 0.2, 0.4, 0.8, 0.3, 0.6, 0.1};
    const auto dates = business_days(Date{2016, 1, 1}, Date{2021, 6, 30});
    const auto rows = static_cast<Eigen::Index>(dates.size() - 1);
    std::mt19937_64 rng(seed ^ 0x2545f4914f6cdd1dULL);
    std::normal_distribution<double> z(0.0, 1.0);

    Eigen::MatrixXd r(rows, static_cast<Eigen::Index>(names.size()));
    for (Eigen::Index t = 0; t < rows; ++t) {
        const double common = z(rng);
        for (Eigen::Index j = 0; j < r.cols(); ++j) {
            const double rho = market_corr[j];
            r(t, j) = mean[j] + vol[j] * (rho * common + std::sqrt(1.0 - rho * rho) * z(rng));
        }
    }
    return TimeSeriesPanel(dates, names, levels_from_returns(r, 100.0), Frequency::daily);
}

ShiftedSlopes shifted_slope_series(std::uint64_t seed, std::size_t length,
                                   std::span<const int> shifts) {
    int pad = 0;
    for (int s : shifts) pad = std::max(pad, std::abs(s));
    const auto n = static_cast<Eigen::Index>(length);
    std::mt19937_64 rng(seed ^ 0x94d049bb133111ebULL);
    std::normal_distribution<double> z(0.0, 1.0);

    // AR(1) path over [-pad, length + pad); index i maps to x(i + pad).
    Eigen::VectorXd x(n + 2 * pad);
    double state = z(rng);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        state = 0.9 * state + z(rng);
        x(i) = 1e-4 * state;
    }

    ShiftedSlopes out;
    out.reference = x.segment(pad, n);
    out.shifts.assign(shifts.begin(), shifts.end());
    for (int s : shifts) out.shifted.push_back(x.segment(pad - s, n));
    return out;
}

void write_shifted_slopes_csv(const ShiftedSlopes& slopes, std::ostream& out) {
    out << "index,reference";
    for (int s : slopes.shifts) out << ",shift_" << s;
    out << '\n';
    for (Eigen::Index k = 0; k < slopes.reference.size(); ++k) {
        out << k << ',' << format_exact(slopes.reference(k));
        for (const auto& v : slopes.shifted) out << ',' << format_exact(v(k));
        out << '\n';
    }
}

PortfolioInstance portfolio_instance(std::uint64_t seed, std::size_t assets) {
    const auto a = static_cast<Eigen::Index>(assets);
    std::mt19937_64 rng(seed ^ 0xbf58476d1ce4e5b9ULL);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.005, 0.03);

    Eigen::MatrixXd factors(a, a);
    for (Eigen::Index i = 0; i < a; ++i)
        for (Eigen::Index j = 0; j < a; ++j) factors(i, j) = z(rng);
    Eigen::VectorXd vol(a);
    for (Eigen::Index i = 0; i < a; ++i) vol(i) = u(rng);

    // Random correlation from normalised factor loadings, then scale.
    Eigen::MatrixXd corr = factors * factors.transpose() / static_cast<double>(a) +
                           0.2 * Eigen::MatrixXd::Identity(a, a);
    const Eigen::VectorXd d = corr.diagonal().cwiseSqrt().cwiseInverse();
    corr = d.asDiagonal() * corr * d.asDiagonal();

    PortfolioInstance out;
    out.cov = vol.asDiagonal() * corr * vol.asDiagonal();
    out.mean.resize(a);
    for (Eigen::Index i = 0; i < a; ++i) out.mean(i) = 0.0025 + 0.002 * z(rng);
    return out;
}

}  // namespace inflscope::synth
