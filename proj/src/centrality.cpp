#include "inflscope/centrality.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ostream>
#include <stdexcept>

#include "inflscope/error.hpp"
#include "inflscope/format.hpp"

namespace inflscope {

std::string model_label(std::size_t window) {
    switch (window) {
        case kModel1Window: return "M1";
        case kModel2Window: return "M2";
        case kModel3Window: return "M3";
        default: return "window-" + std::to_string(window);
    }
}

RegressionFit fit_linear_trend(std::span<const double> y) {
    const std::size_t n = y.size();
    if (n < 3) throw DataError("trend regression needs at least 3 points");
    const double nd = static_cast<double>(n);
    const double s_mean = (nd - 1.0) / 2.0;
    double y_mean = 0.0;
    for (double v : y) y_mean += v;
    y_mean /= nd;

    double sxy = 0.0;
    for (std::size_t s = 0; s < n; ++s) sxy += (static_cast<double>(s) - s_mean) * (y[s] - y_mean);
    const double sxx = nd * (nd * nd - 1.0) / 12.0;

    RegressionFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = y_mean - fit.slope * s_mean;
    fit.residuals.resize(static_cast<Eigen::Index>(n));
    for (std::size_t s = 0; s < n; ++s)
        fit.residuals(static_cast<Eigen::Index>(s)) =
            y[s] - fit.intercept - fit.slope * static_cast<double>(s);
    fit.first = 0;
    fit.last = n - 1;
    return fit;
}

SlopeTrajectory rolling_slope(const ReturnsPanel& returns, std::string_view entity,
                              std::size_t window) {
    if (window < 3) throw DataError("rolling window must be at least 3");
    if (window > returns.rows())
        throw DataError("rolling window " + std::to_string(window) + " exceeds the " +
                        std::to_string(returns.rows()) + " available returns");
    const Eigen::VectorXd col = returns.column(entity);
    const std::size_t count = returns.rows() - window + 1;

    SlopeTrajectory out;
    out.entity = std::string(entity);
    out.window = window;
    out.dates.reserve(count);
    out.values.resize(static_cast<Eigen::Index>(count));
    for (std::size_t k = 0; k < count; ++k) {
        const std::span<const double> y(col.data() + k, window);
        out.values(static_cast<Eigen::Index>(k)) = fit_linear_trend(y).slope;
        out.dates.push_back(returns.dates()[k + window - 1]);
    }
    return out;
}

std::vector<SlopeTrajectory> rolling_slopes(const ReturnsPanel& returns, std::size_t window) {
    std::vector<SlopeTrajectory> out;
    out.reserve(returns.cols());
    for (const auto& e : returns.entities()) out.push_back(rolling_slope(returns, e, window));
    return out;
}

bool offset_score(std::span<const double> a, std::span<const double> b, int phi, double& score) {
    const std::size_t shift = static_cast<std::size_t>(std::abs(phi));
    const std::size_t len = std::min(a.size(), b.size());
    if (shift >= len) return false;
    const std::size_t overlap = len - shift;
    const std::span<const double> sa = phi >= 0 ? a.subspan(0, overlap) : a.subspan(shift, overlap);
    const std::span<const double> sb = phi >= 0 ? b.subspan(shift, overlap) : b.subspan(0, overlap);

    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t k = 0; k < overlap; ++k) {
        dot += sa[k] * sb[k];
        na += sa[k] * sa[k];
        nb += sb[k] * sb[k];
    }
    if (!(na > 0.0) || !(nb > 0.0)) return false;
    score = dot / (std::sqrt(na) * std::sqrt(nb));
    return true;
}

OffsetResult optimal_offset(std::span<const double> a, std::span<const double> b, int max_offset) {
    if (a.size() != b.size())
        throw DataError("slope trajectories differ in length (" + std::to_string(a.size()) +
                        " vs " + std::to_string(b.size()) + ")");
    if (max_offset < 0) throw std::invalid_argument("maximum offset must be non-negative");
    if (2 * static_cast<std::size_t>(max_offset) >= a.size())
        throw DataError("maximum offset " + std::to_string(max_offset) +
                        " must be below half the trajectory length " + std::to_string(a.size()));

    OffsetResult best;
    bool found = false;
    // Visit 0, -1, +1, -2, +2, ...; only strict improvements replace the
    // incumbent, which realises the tie-break.
    auto consider = [&](int phi) {
        double s = 0.0;
        if (!offset_score(a, b, phi, s)) return;
        if (!found || s > best.score) {
            best = {phi, s};
            found = true;
        }
    };
    consider(0);
    for (int m = 1; m <= max_offset; ++m) {
        consider(-m);
        consider(m);
    }
    if (!found) throw DataError("degenerate trajectories: no offset has a non-zero overlap");
    return best;
}

OffsetResult optimal_offset(const SlopeTrajectory& a, const SlopeTrajectory& b, int max_offset) {
    try {
        return optimal_offset(std::span<const double>(a.values.data(), a.values.size()),
                              std::span<const double>(b.values.data(), b.values.size()),
                              max_offset);
    } catch (const DataError& e) {
        throw DataError("'" + a.entity + "' vs '" + b.entity + "': " + e.what());
    }
}

CentralityReport centrality_report(std::span<const SlopeTrajectory> trajectories, int max_offset) {
    const std::size_t n = trajectories.size();
    if (n < 2) throw DataError("centrality needs at least 2 slope trajectories");
    for (const auto& t : trajectories)
        if (t.window != trajectories[0].window || t.values.size() != trajectories[0].values.size())
            throw DataError("slope trajectories must share model window and length");

    const auto en = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd abs_off = Eigen::MatrixXd::Zero(en, en);
    Eigen::MatrixXi signed_off = Eigen::MatrixXi::Zero(en, en);
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) {
        names.push_back(trajectories[i].entity);
        for (std::size_t j = i + 1; j < n; ++j) {
            const OffsetResult r = optimal_offset(trajectories[i], trajectories[j], max_offset);
            const auto ei = static_cast<Eigen::Index>(i), ej = static_cast<Eigen::Index>(j);
            signed_off(ei, ej) = r.offset;
            signed_off(ej, ei) = -r.offset;
            abs_off(ei, ej) = abs_off(ej, ei) = std::abs(r.offset);
        }
    }
    Eigen::VectorXd scores = abs_off.colwise().sum().transpose();
    return CentralityReport{trajectories[0].window, max_offset,
                            DistanceMatrix(std::move(names), std::move(abs_off)),
                            std::move(signed_off), std::move(scores)};
}

std::pair<CentralityReport, CentralityReport> partitioned_centrality(const ReturnsPanel& returns,
                                                                     const Date& split,
                                                                     std::size_t window,
                                                                     int max_offset) {
    const std::size_t cut = returns.lower_bound(split);
    if (cut == 0 || cut >= returns.rows())
        throw DataError("split date " + split.iso() + " is not interior to " +
                        returns.dates().front().iso() + " .. " + returns.dates().back().iso());
    if (cut <= window || returns.rows() - cut <= window)
        throw DataError("each partition must be longer than the " + std::to_string(window) +
                        "-step window (got " + std::to_string(cut) + " and " +
                        std::to_string(returns.rows() - cut) + " rows)");
    const ReturnsPanel before = returns.rows_range(0, cut);
    const ReturnsPanel after = returns.rows_range(cut, returns.rows());
    const auto sb = rolling_slopes(before, window);
    const auto sa = rolling_slopes(after, window);
    return {centrality_report(sb, max_offset), centrality_report(sa, max_offset)};
}

nlohmann::json centrality_to_json(const CentralityReport& report) {
    const std::size_t n = report.offsets.size();
    nlohmann::json matrix = nlohmann::json::array();
    nlohmann::json signed_matrix = nlohmann::json::array();
    for (std::size_t i = 0; i < n; ++i) {
        nlohmann::json row = nlohmann::json::array();
        nlohmann::json srow = nlohmann::json::array();
        for (std::size_t j = 0; j < n; ++j) {
            row.push_back(static_cast<int>(report.offsets(i, j)));
            srow.push_back(report.signed_offsets(static_cast<Eigen::Index>(i),
                                                 static_cast<Eigen::Index>(j)));
        }
        matrix.push_back(std::move(row));
        signed_matrix.push_back(std::move(srow));
    }
    nlohmann::json ordered_scores = nlohmann::json::array();
    for (std::size_t i = 0; i < n; ++i)
        ordered_scores.push_back({{"entity", report.offsets.entities()[i]},
                                  {"score", round_to_report_precision(
                                                report.scores(static_cast<Eigen::Index>(i)))}});
    // Most central first; ties keep input order.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return report.scores(static_cast<Eigen::Index>(a)) < report.scores(static_cast<Eigen::Index>(b));
    });
    nlohmann::json ranking = nlohmann::json::array();
    for (std::size_t i : order) ranking.push_back(report.offsets.entities()[i]);
    return nlohmann::json{{"model", model_label(report.window)},
                          {"window", report.window},
                          {"phi_max", report.max_offset},
                          {"entities", report.offsets.entities()},
                          {"offset_matrix", std::move(matrix)},
                          {"signed_offsets", std::move(signed_matrix)},
                          {"scores", std::move(ordered_scores)},
                          {"ranking", std::move(ranking)}};
}

void write_slopes_csv(std::span<const SlopeTrajectory> slopes, Frequency frequency,
                      std::ostream& out) {
    if (slopes.empty()) return;
    const bool with_day = frequency == Frequency::daily;
    out << "window_end_date";
    for (const auto& s : slopes) out << ',' << csv_field(s.entity);
    out << '\n';
    for (std::size_t k = 0; k < slopes[0].dates.size(); ++k) {
        out << slopes[0].dates[k].iso(with_day);
        for (const auto& s : slopes) out << ',' << format_number(s.values(static_cast<Eigen::Index>(k)));
        out << '\n';
    }
}

}  // namespace inflscope
