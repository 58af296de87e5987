#include "inflscope/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "inflscope/error.hpp"
#include "inflscope/format.hpp"
#include "inflscope/spectrum.hpp"

namespace inflscope {

Objective parse_objective(std::string_view text) {
    if (text == "variance") return Objective::variance;
    if (text == "stdev") return Objective::stdev;
    throw ConfigError("unknown objective '" + std::string(text) + "' (expected variance|stdev)");
}

std::string to_string(Objective objective) {
    return objective == Objective::variance ? "variance" : "stdev";
}

PortfolioSpec PortfolioSpec::with_defaults(std::vector<std::string> assets) {
    PortfolioSpec spec;
    const std::size_t free = assets.empty() ? 0 : assets.size() - 1;
    spec.assets = std::move(assets);
    spec.lower.assign(free, 0.025);
    spec.upper.assign(free, 0.3);
    return spec;
}

void PortfolioSpec::validate() const {
    if (assets.size() < 2) throw ConfigError("portfolio needs a core asset and at least one other");
    if (lower.size() != free_count() || upper.size() != free_count())
        throw ConfigError("portfolio bounds must list one entry per non-core asset");
    if (!(core_weight >= 0.0 && core_weight <= 1.0))
        throw ConfigError("core weight must lie in [0, 1]");
    for (std::size_t k = 0; k < free_count(); ++k)
        if (!(lower[k] >= 0.0 && lower[k] <= upper[k]))
            throw ConfigError("bounds for '" + assets[k + 1] + "' must satisfy 0 <= lo <= hi");
    if (window < 2) throw ConfigError("estimation window must be at least 2");
    if (!std::isfinite(risk_free)) throw ConfigError("risk-free rate must be finite");
}

bool PortfolioSpec::feasible() const {
    const double lo = std::accumulate(lower.begin(), lower.end(), 0.0);
    const double hi = std::accumulate(upper.begin(), upper.end(), 0.0);
    constexpr double eps = 1e-12;
    return core_weight + lo <= 1.0 + eps && 1.0 <= core_weight + hi + eps;
}

// ---------------------------------------------------------------------------
// Estimation
// ---------------------------------------------------------------------------

WindowEstimates estimate_window(const Eigen::MatrixXd& block) {
    const Eigen::Index w = block.rows();
    if (w < 2) throw DataError("covariance needs at least 2 observations");
    WindowEstimates est;
    // Shift by the first row so constant columns centre to exact zeros.
    const Eigen::MatrixXd shifted = block.rowwise() - block.row(0);
    const Eigen::RowVectorXd shift_mean = shifted.colwise().mean();
    est.mean = (block.row(0) + shift_mean).transpose();
    const Eigen::MatrixXd centred = shifted.rowwise() - shift_mean;
    est.cov = (centred.transpose() * centred) / static_cast<double>(w - 1);
    est.cov = 0.5 * (est.cov + est.cov.transpose());
    return est;
}

WindowEstimates estimate_window(const ReturnsPanel& returns, std::size_t end, std::size_t window) {
    if (window < 2) throw DataError("estimation window must be at least 2");
    if (end < window || end > returns.rows())
        throw DataError("insufficient history: window of " + std::to_string(window) +
                        " ending at row " + std::to_string(end) + " of " +
                        std::to_string(returns.rows()));
    return estimate_window(Eigen::MatrixXd(returns.values().middleRows(
        static_cast<Eigen::Index>(end - window), static_cast<Eigen::Index>(window))));
}

// ---------------------------------------------------------------------------
// Projection
// ---------------------------------------------------------------------------

Eigen::VectorXd project_box_sum(const Eigen::VectorXd& y, const Eigen::VectorXd& lo,
                                const Eigen::VectorXd& hi, double total) {
    const Eigen::Index m = y.size();
    if (lo.size() != m || hi.size() != m) throw std::invalid_argument("projection size mismatch");
    if (lo.sum() > total + 1e-12 || hi.sum() < total - 1e-12)
        throw ConfigError("box-simplex slice is empty");

    auto clamped_sum = [&](double tau) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) s += std::clamp(y(i) - tau, lo(i), hi(i));
        return s;
    };

    // sum(clamp(y - tau)) is non-increasing and piecewise linear in tau with
    // kinks at y_i - hi_i and y_i - lo_i.
    std::vector<double> knots;
    knots.reserve(static_cast<std::size_t>(2 * m));
    for (Eigen::Index i = 0; i < m; ++i) {
        knots.push_back(y(i) - hi(i));
        knots.push_back(y(i) - lo(i));
    }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    double tau = knots.front();
    if (clamped_sum(knots.front()) <= total) {
        tau = knots.front();
    } else if (clamped_sum(knots.back()) >= total) {
        tau = knots.back();
    } else {
        std::size_t a = 0, b = knots.size() - 1;  // g(a) > total > g(b)
        while (b - a > 1) {
            const std::size_t mid = (a + b) / 2;
            if (clamped_sum(knots[mid]) > total) a = mid; else b = mid;
        }
        const double ga = clamped_sum(knots[a]);
        const double gb = clamped_sum(knots[b]);
        tau = ga == gb ? knots[a] : knots[a] + (ga - total) * (knots[b] - knots[a]) / (ga - gb);
    }

    Eigen::VectorXd x(m);
    for (Eigen::Index i = 0; i < m; ++i) x(i) = std::clamp(y(i) - tau, lo(i), hi(i));

    // Push the rounding residue onto a coordinate with slack.
    const double residue = total - x.sum();
    if (residue != 0.0) {
        for (Eigen::Index i = 0; i < m; ++i) {
            const double v = std::clamp(x(i) + residue, lo(i), hi(i));
            if (v - x(i) == residue) {
                x(i) = v;
                break;
            }
        }
    }
    return x;
}

// ---------------------------------------------------------------------------
// Objective and solver
// ---------------------------------------------------------------------------

double portfolio_objective(const Eigen::VectorXd& weights, const Eigen::VectorXd& mean,
                           const Eigen::MatrixXd& cov, double risk_free, Objective objective) {
    const double excess = weights.dot(mean) - risk_free;
    const double var = weights.dot(cov * weights);
    return objective == Objective::variance ? excess / var : excess / std::sqrt(var);
}

namespace {

constexpr int kMaxIterations = 20000;
constexpr int kStallIterations = 50;
constexpr double kStallRelative = 1e-10;
constexpr double kArmijo = 1e-4;

struct Problem {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;  // regularised
    double core = 0.0;
    double risk_free = 0.0;
    Objective objective = Objective::variance;
    Eigen::VectorXd lo, hi;
    double total = 0.0;  // sum of free weights

    Eigen::VectorXd full(const Eigen::VectorXd& x) const {
        Eigen::VectorXd w(x.size() + 1);
        w(0) = core;
        w.tail(x.size()) = x;
        return w;
    }

    double value(const Eigen::VectorXd& x) const {
        return portfolio_objective(full(x), mean, cov, risk_free, objective);
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const {
        const Eigen::VectorXd w = full(x);
        const Eigen::VectorXd cw = cov * w;
        const double excess = w.dot(mean) - risk_free;
        const double var = w.dot(cw);
        const Eigen::Index m = x.size();
        if (objective == Objective::variance)
            return (mean.tail(m) * var - 2.0 * excess * cw.tail(m)) / (var * var);
        const double sd = std::sqrt(var);
        return mean.tail(m) / sd - excess * cw.tail(m) / (var * sd);
    }

    Eigen::VectorXd project(const Eigen::VectorXd& y) const { return project_box_sum(y, lo, hi, total); }
};

struct Ascent {
    Eigen::VectorXd x;
    double value;
    std::size_t iterations;
};

Ascent projected_gradient(const Problem& pb, Eigen::VectorXd x) {
    x = pb.project(x);
    double f = pb.value(x);
    double step = -1.0;
    int stall = 0;
    std::size_t it = 0;
    for (; it < static_cast<std::size_t>(kMaxIterations); ++it) {
        const Eigen::VectorXd g = pb.gradient(x);
        const double gmax = g.cwiseAbs().maxCoeff();
        if (!(gmax > 0.0) || !std::isfinite(gmax)) break;
        if (step <= 0.0) step = 0.1 / gmax;

        Eigen::VectorXd xn;
        double fn = f;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            xn = pb.project(x + step * g);
            fn = pb.value(xn);
            if (fn >= f + kArmijo * g.dot(xn - x)) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted || (xn - x).cwiseAbs().maxCoeff() == 0.0) break;

        const double gain = fn - f;
        stall = gain < kStallRelative * std::max(std::abs(f), 1e-300) ? stall + 1 : 0;
        x = std::move(xn);
        f = fn;
        step *= 2.0;
        if (stall >= kStallIterations) break;
    }
    return {std::move(x), f, it};
}

Eigen::VectorXd greedy_fill(const Problem& pb, const std::vector<Eigen::Index>& order) {
    Eigen::VectorXd x = pb.lo;
    double remaining = pb.total - pb.lo.sum();
    for (Eigen::Index i : order) {
        const double add = std::min(pb.hi(i) - pb.lo(i), std::max(remaining, 0.0));
        x(i) += add;
        remaining -= add;
    }
    return x;
}

std::vector<Eigen::Index> order_by(const Eigen::VectorXd& key, bool descending) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(key.size()));
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        return descending ? key(a) > key(b) : key(a) < key(b);
    });
    return idx;
}

}  // namespace

SolveResult solve_weights(const WindowEstimates& est, const PortfolioSpec& spec,
                          const std::optional<Eigen::VectorXd>& warm_start) {
    spec.validate();
    if (!spec.feasible())
        throw ConfigError("infeasible constraints: core weight " + format_number(spec.core_weight) +
                          " cannot be completed to 1 within the asset bounds");
    const auto a = static_cast<Eigen::Index>(spec.assets.size());
    if (est.mean.size() != a || est.cov.rows() != a || est.cov.cols() != a)
        throw DataError("estimates do not match the portfolio's " + std::to_string(a) + " assets");

    const double trace = est.cov.trace();
    if (!(trace > 0.0)) throw NumericalError("covariance is identically zero; objective undefined");
    const EigenSpectrum spectrum = eigen_decompose(est.cov);
    const double min_eig = spectrum.eigenvalues.minCoeff();
    if (min_eig < -1e-10 * trace)
        throw DataError("covariance is not positive semidefinite (eigenvalue " +
                        format_number(min_eig) + ")");

    Problem pb;
    pb.mean = est.mean;
    pb.cov = est.cov;
    pb.cov.diagonal().array() += 1e-10 * trace / static_cast<double>(a);
    pb.core = spec.core_weight;
    pb.risk_free = spec.risk_free;
    pb.objective = spec.objective;
    pb.lo = Eigen::Map<const Eigen::VectorXd>(spec.lower.data(), a - 1);
    pb.hi = Eigen::Map<const Eigen::VectorXd>(spec.upper.data(), a - 1);
    pb.total = 1.0 - spec.core_weight;

    const Eigen::VectorXd mu = pb.mean.tail(a - 1);
    const Eigen::VectorXd var = pb.cov.diagonal().tail(a - 1);
    const Eigen::VectorXd center =
        pb.project(Eigen::VectorXd::Constant(a - 1, pb.total / static_cast<double>(a - 1)));

    std::vector<Eigen::VectorXd> starts;
    if (warm_start && warm_start->size() == a)
        starts.push_back(warm_start->tail(a - 1));
    else
        starts.push_back(greedy_fill(pb, order_by(mu.cwiseQuotient(var), true)));
    starts.push_back(center);
    starts.push_back(greedy_fill(pb, order_by(mu, true)));
    starts.push_back(greedy_fill(pb, order_by(var, true)));
    starts.push_back(greedy_fill(pb, order_by(var, false)));

    SolveResult best;
    best.objective = -std::numeric_limits<double>::infinity();
    for (const auto& s : starts) {
        Ascent r = projected_gradient(pb, s);
        best.iterations += r.iterations;
        if (std::isfinite(r.value) && r.value > best.objective) {
            best.objective = r.value;
            best.weights = pb.full(r.x);
        }
    }
    if (!std::isfinite(best.objective)) throw NumericalError("portfolio objective is not finite");
    return best;
}

WeightTrajectory rolling_optimize(const ReturnsPanel& returns, const PortfolioSpec& spec,
                                  bool cold_start) {
    spec.validate();
    if (returns.rows() < spec.window)
        throw DataError("need more than " + std::to_string(spec.window) + " prices (" +
                        std::to_string(spec.window) + " returns) for one window, got " +
                        std::to_string(returns.rows()) + " returns");
    const ReturnsPanel panel = returns.select(spec.assets);

    WeightTrajectory out;
    out.assets = spec.assets;
    const std::size_t count = panel.rows() - spec.window + 1;
    out.weights.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(spec.assets.size()));
    out.dates.reserve(count);
    out.objective.reserve(count);

    std::optional<Eigen::VectorXd> previous;
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t end = spec.window + k;
        const WindowEstimates est = estimate_window(panel, end, spec.window);
        SolveResult r = solve_weights(est, spec, cold_start ? std::nullopt : previous);
        out.weights.row(static_cast<Eigen::Index>(k)) = r.weights.transpose();
        out.objective.push_back(r.objective);
        out.dates.push_back(panel.dates()[end - 1]);
        previous = std::move(r.weights);
    }
    return out;
}

WeightStats weight_stats(const WeightTrajectory& trajectory) {
    const Eigen::Index t = trajectory.weights.rows();
    if (t == 0) throw DataError("weight trajectory is empty");
    WeightStats s;
    s.assets = trajectory.assets;
    s.mean = trajectory.weights.colwise().mean().transpose();
    s.variance.resize(trajectory.weights.cols());
    // Shift by the first value so a constant column has exactly zero variance.
    for (Eigen::Index j = 0; j < trajectory.weights.cols(); ++j) {
        const Eigen::ArrayXd d = trajectory.weights.col(j).array() - trajectory.weights(0, j);
        s.variance(j) = (d - d.mean()).square().sum() / static_cast<double>(t);
    }
    return s;
}

std::vector<SweepRow> sensitivity_sweep(const ReturnsPanel& returns, const PortfolioSpec& spec,
                                        const std::vector<double>& core_weights) {
    std::vector<SweepRow> rows;
    for (double c : core_weights) {
        PortfolioSpec s = spec;
        s.core_weight = c;
        SweepRow row;
        row.core_weight = c;
        try {
            s.validate();
            if (!s.feasible()) throw ConfigError("constraints infeasible at core weight " + format_number(c));
            row.stats = weight_stats(rolling_optimize(returns, s));
            row.feasible = true;
        } catch (const ConfigError& e) {
            row.message = e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_weights_csv(const WeightTrajectory& trajectory, Frequency frequency, std::ostream& out) {
    const bool with_day = frequency == Frequency::daily;
    out << "date";
    for (const auto& a : trajectory.assets) out << ',' << csv_field(a);
    out << ",objective\n";
    for (std::size_t t = 0; t < trajectory.dates.size(); ++t) {
        out << trajectory.dates[t].iso(with_day);
        for (Eigen::Index j = 0; j < trajectory.weights.cols(); ++j)
            out << ',' << format_number(trajectory.weights(static_cast<Eigen::Index>(t), j));
        out << ',' << format_number(trajectory.objective[t]) << '\n';
    }
}

void write_weight_stats_csv(const WeightStats& stats, std::ostream& out) {
    out << "asset,mean_weight,weight_variance\n";
    for (std::size_t j = 0; j < stats.assets.size(); ++j)
        out << csv_field(stats.assets[j]) << ','
            << format_number(stats.mean(static_cast<Eigen::Index>(j))) << ','
            << format_number(stats.variance(static_cast<Eigen::Index>(j))) << '\n';
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
    out << "core_weight,asset,mean_weight\n";
    for (const auto& r : rows) {
        if (!r.feasible || !r.stats) {
            out << format_number(r.core_weight) << ",infeasible,\n";
            continue;
        }
        for (std::size_t j = 0; j < r.stats->assets.size(); ++j)
            out << format_number(r.core_weight) << ',' << csv_field(r.stats->assets[j]) << ','
                << format_number(r.stats->mean(static_cast<Eigen::Index>(j))) << '\n';
    }
}

}  // namespace inflscope
