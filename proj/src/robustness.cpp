#include "inflscope/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>

#include "inflscope/error.hpp"
#include "inflscope/format.hpp"

namespace inflscope {

EmpiricalDistribution make_distribution(std::vector<double> samples, Regime label) {
    if (samples.empty()) throw DataError("empirical distribution needs at least one sample");
    std::sort(samples.begin(), samples.end());
    return EmpiricalDistribution{std::move(samples), label};
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw DataError("quantile of an empty sample");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

DecileSplit split_by_inflation_deciles(const Series& inflation, const Series& equity) {
    if (inflation.dates != equity.dates ||
        inflation.values.size() != static_cast<Eigen::Index>(inflation.dates.size()) ||
        equity.values.size() != static_cast<Eigen::Index>(equity.dates.size()))
        throw DataError("inflation series '" + inflation.name + "' and equity series '" +
                        equity.name + "' are not aligned on the same dates");
    const std::size_t n = inflation.dates.size();
    if (n < kMinJointObservations)
        throw DataError("decile split needs at least " + std::to_string(kMinJointObservations) +
                        " joint observations, got " + std::to_string(n));

    std::vector<double> sorted(inflation.values.data(), inflation.values.data() + n);
    std::sort(sorted.begin(), sorted.end());
    DecileSplit out;
    out.lower_cutoff = quantile_sorted(sorted, 0.1);
    out.upper_cutoff = quantile_sorted(sorted, 0.9);

    std::vector<double> extreme, stable;
    for (std::size_t t = 0; t < n; ++t) {
        const double x = inflation.values(static_cast<Eigen::Index>(t));
        const double r = equity.values(static_cast<Eigen::Index>(t));
        const bool low = x <= out.lower_cutoff;
        const bool high = x >= out.upper_cutoff;
        if (low) out.bottom_rows.push_back(t);
        if (high) out.top_rows.push_back(t);
        (low || high ? extreme : stable).push_back(r);
    }
    if (stable.empty())
        throw DataError("inflation series '" + inflation.name +
                        "' has no months between its decile cutoffs");
    out.extreme = make_distribution(std::move(extreme), Regime::extreme);
    out.stable = make_distribution(std::move(stable), Regime::stable);
    return out;
}

double wasserstein_1d(const EmpiricalDistribution& p, const EmpiricalDistribution& q) {
    const auto& a = p.samples;
    const auto& b = q.samples;
    if (a.empty() || b.empty()) throw DataError("Wasserstein distance of an empty sample");
    const std::size_t m = a.size(), n = b.size();
    const double scale = static_cast<double>(m) * static_cast<double>(n);

    // Walk the merged breakpoints; between consecutive breakpoints both CDFs
    // are constant at i/m and j/n.
    std::size_t i = 0, j = 0;
    double x = std::min(a[0], b[0]);
    double area = 0.0;
    while (i < m || j < n) {
        const double next = (j >= n || (i < m && a[i] <= b[j])) ? a[i] : b[j];
        const auto gap = static_cast<double>(
            std::llabs(static_cast<long long>(i * n) - static_cast<long long>(j * m)));
        area += gap / scale * (next - x);
        x = next;
        while (i < m && a[i] == x) ++i;
        while (j < n && b[j] == x) ++j;
    }
    return area;
}

RobustnessScore equity_robustness(const Series& inflation, const Series& equity) {
    const DecileSplit split = split_by_inflation_deciles(inflation, equity);
    return RobustnessScore{equity.name, wasserstein_1d(split.stable, split.extreme),
                           split.extreme.samples.size(), split.stable.samples.size()};
}

double mean_return_discrepancy(const DecileSplit& split, const Series& equity) {
    auto mean_of = [&](const std::vector<std::size_t>& rows) {
        double s = 0.0;
        for (std::size_t t : rows) s += equity.values(static_cast<Eigen::Index>(t));
        return s / static_cast<double>(rows.size());
    };
    if (split.top_rows.empty() || split.bottom_rows.empty())
        throw DataError("decile groups are empty");
    return mean_of(split.top_rows) - mean_of(split.bottom_rows);
}

double mean_return_discrepancy(const Series& inflation, const Series& equity) {
    return mean_return_discrepancy(split_by_inflation_deciles(inflation, equity), equity);
}

void write_robustness_csv(const std::vector<RobustnessRow>& rows, std::ostream& out) {
    out << "entity,ER,n_extreme,n_stable,mean_discrepancy\n";
    for (const auto& r : rows)
        out << csv_field(r.score.entity) << ',' << format_number(r.score.er) << ','
            << r.score.n_extreme << ',' << r.score.n_stable << ','
            << format_number(r.mean_discrepancy) << '\n';
}

void write_conditional_samples_csv(const DecileSplit& split, std::ostream& out) {
    out << "regime,log_return\n";
    for (double v : split.extreme.samples) out << "extreme," << format_number(v) << '\n';
    for (double v : split.stable.samples) out << "stable," << format_number(v) << '\n';
}

}  // namespace inflscope
