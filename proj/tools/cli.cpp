#include "inflscope/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "inflscope/centrality.hpp"
#include "inflscope/distance.hpp"
#include "inflscope/error.hpp"
#include "inflscope/format.hpp"
#include "inflscope/optimizer.hpp"
#include "inflscope/panel.hpp"
#include "inflscope/robustness.hpp"
#include "inflscope/sectorcorr.hpp"
#include "inflscope/spectrum.hpp"
#include "inflscope/synth.hpp"

namespace inflscope::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kToolName = "inflscope";
constexpr const char* kToolVersion = "0.1.0";
constexpr const char* kManifest = "manifest.json";

class Log {
public:
    Log(std::ostream& err, bool verbose) : err_(err), verbose_(verbose) {}
    void warn(const std::string& msg) const { err_ << "warning: " << msg << '\n'; }
    void info(const std::string& msg) const {
        if (verbose_) err_ << "info: " << msg << '\n';
    }

private:
    std::ostream& err_;
    bool verbose_;
};

bool verbose_from_env() {
    const char* v = std::getenv("INFLSCOPE_VERBOSE");
    if (v == nullptr) return false;
    const std::string s(v);
    return !(s.empty() || s == "0" || s == "false" || s == "no");
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open '" + path.string() + "'");
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 initialisation failed");
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    std::ostringstream hex;
    for (unsigned int i = 0; i < len; ++i)
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return hex.str();
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Output directory of one run. The manifest is written (status "running")
/// before any analysis output and rewritten as "complete" at the end.
class Run {
public:
    Run(fs::path dir, std::string command, json parameters,
        std::vector<std::pair<std::string, fs::path>> inputs)
        : dir_(std::move(dir)) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_))
            throw ConfigError("--out: cannot create output directory '" + dir_.string() + "'");
        json in = json::object();
        for (const auto& [role, path] : inputs)
            in[role] = json{{"path", path.string()}, {"sha256", sha256_file(path)}};
        manifest_ = json{{"tool", kToolName},
                         {"version", kToolVersion},
                         {"command", std::move(command)},
                         {"parameters", std::move(parameters)},
                         {"inputs", std::move(in)},
                         {"created", utc_now()},
                         {"status", "running"},
                         {"outputs", json::array()}};
        write_manifest();
    }

    const fs::path& dir() const { return dir_; }

    std::ofstream open(const std::string& relative) {
        const fs::path path = dir_ / relative;
        fs::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ConfigError("--out: cannot write '" + path.string() + "'");
        outputs_.push_back(relative);
        return out;
    }

    void write_json(const std::string& relative, const json& value) {
        auto out = open(relative);
        out << value.dump(2) << '\n';
    }

    void finish() {
        std::sort(outputs_.begin(), outputs_.end());
        manifest_["outputs"] = outputs_;
        manifest_["status"] = "complete";
        write_manifest();
    }

private:
    void write_manifest() const {
        std::ofstream out(dir_ / kManifest, std::ios::binary);
        if (!out) throw ConfigError("--out: cannot write manifest in '" + dir_.string() + "'");
        out << manifest_.dump(2) << '\n';
    }

    fs::path dir_;
    json manifest_;
    std::vector<std::string> outputs_;
};

Date parse_date_option(const std::string& option, const std::string& text) {
    try {
        return Date::parse(text);
    } catch (const Error& e) {
        throw ConfigError(option + ": " + e.what());
    }
}

template <class F>
auto parse_enum_option(const std::string& option, F&& parse) {
    try {
        return parse();
    } catch (const ConfigError& e) {
        throw ConfigError(option + ": " + e.what());
    }
}

/// Filesystem-safe name for per-entity and per-sector outputs.
std::string file_stem(const std::string& name) {
    std::string out;
    for (char c : name) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '-' || c == '_' || c == '.';
        out += ok ? c : '_';
    }
    return out.empty() ? "_" : out;
}

// ---------------------------------------------------------------------------
// Shared input options
// ---------------------------------------------------------------------------

struct PanelInput {
    std::string path;
    std::string frequency;
    std::string missing = "reject";
    std::string kind;
    std::string from;
    std::string to;

    void add(CLI::App* cmd, const std::string& flag, const std::string& role,
             const std::string& default_frequency, const std::string& default_kind) {
        frequency = default_frequency;
        kind = default_kind;
        cmd->add_option(flag, path, role + " CSV (date,<entity...>)")
            ->required()
            ->check(CLI::ExistingFile);
        cmd->add_option("--frequency", frequency, "monthly|daily")->capture_default_str();
        cmd->add_option("--missing", missing, "reject|drop_row")->capture_default_str();
        cmd->add_option("--input", kind, "levels|returns: whether the CSV holds levels or log returns")
            ->capture_default_str();
        cmd->add_option("--from", from, "first date to use (inclusive)");
        cmd->add_option("--to", to, "last date to use (inclusive)");
    }

    json parameters() const {
        return json{{"frequency", frequency}, {"missing", missing}, {"input", kind},
                    {"from", from},           {"to", to}};
    }

    Frequency freq() const { return parse_enum_option("--frequency", [&] { return parse_frequency(frequency); }); }

    ReturnsPanel load(const Log& log) const {
        const Frequency f = freq();
        const MissingPolicy policy =
            parse_enum_option("--missing", [&] { return parse_missing_policy(missing); });
        const Date first = from.empty() ? Date{0, 1, 1} : parse_date_option("--from", from);
        const Date last = to.empty() ? Date{9999, 12, 31} : parse_date_option("--to", to);
        if (last < first) throw ConfigError("--to: must not precede --from");
        if (kind == "returns") {
            ReturnsPanel r = load_returns_csv(path, f, policy);
            return r.slice(first, last);
        }
        if (kind != "levels") throw ConfigError("--input: expected levels|returns, got '" + kind + "'");
        LoadResult loaded = load_csv(path, f, policy);
        if (loaded.dropped_rows > 0)
            log.warn(path + ": " + std::to_string(loaded.dropped_rows) +
                     (loaded.dropped_rows == 1 ? " row dropped" : " rows dropped") + " (missing values)");
        return log_returns(loaded.panel.slice(first, last));
    }
};

// ---------------------------------------------------------------------------
// trajectory
// ---------------------------------------------------------------------------

struct TrajectoryArgs {
    PanelInput cpi;
    std::string out;
    std::string linkage = "average";
    double delta = 2.5;
    std::size_t clusters = 0;
    bool eigenvectors = false;
};

/// Entities outside the main group: the largest cluster of the cut that
/// leaves n - similar + 1 clusters.
std::vector<std::string> outliers_for(const Dendrogram& dendro, std::size_t similar) {
    const std::size_t n = dendro.entities.size();
    const auto parts = cut_clusters(dendro, n - similar + 1);
    std::size_t main = 0;
    for (std::size_t c = 1; c < parts.size(); ++c)
        if (parts[c].size() > parts[main].size()) main = c;
    std::vector<std::string> out;
    for (std::size_t c = 0; c < parts.size(); ++c)
        if (c != main)
            for (std::size_t leaf : parts[c]) out.push_back(dendro.entities[leaf]);
    return out;
}

void cmd_trajectory(const TrajectoryArgs& a, const Log& log) {
    if (!(a.delta > 0.0)) throw ConfigError("--delta: threshold must be positive");
    const Linkage linkage = parse_enum_option("--linkage", [&] { return parse_linkage(a.linkage); });
    json params = a.cpi.parameters();
    params.update(json{{"linkage", a.linkage},
                       {"delta", a.delta},
                       {"clusters", a.clusters},
                       {"eigenvectors", a.eigenvectors}});
    const ReturnsPanel returns = a.cpi.load(log);
    if (a.clusters > returns.cols())
        throw ConfigError("--clusters: must not exceed the " + std::to_string(returns.cols()) + " entities");

    Run run(a.out, "trajectory", params, {{"cpi", a.cpi.path}});
    const auto trajectories = l1_normalize_all(returns);
    const DistanceMatrix dist = trajectory_distance_matrix(trajectories);
    const Dendrogram dendro = hierarchical_cluster(dist, linkage);
    const EigenSpectrum spectrum = eigen_decompose(dist);
    const SimilarityCount sim = similarity_count(spectrum, a.delta);
    log.info("trajectory: " + std::to_string(dist.size()) + " entities, " +
             std::to_string(returns.rows()) + " returns, " + std::to_string(spectrum.sweeps) + " Jacobi sweeps");

    {
        auto out = run.open("distance_matrix.csv");
        write_distance_csv(dist, out);
    }
    run.write_json("dendrogram.json", dendrogram_to_json(dendro));
    {
        auto out = run.open("spectrum.csv");
        write_spectrum_csv(spectrum, out);
    }
    json summary{{"threshold", round_to_report_precision(sim.threshold)},
                 {"k", sim.k},
                 {"entities", dist.entities()},
                 {"operator_norm", round_to_report_precision(operator_norm(dist))}};
    if (sim.similar_entities) {
        summary["similar_entities"] = *sim.similar_entities;
        summary["outliers"] = outliers_for(dendro, *sim.similar_entities);
    } else {
        summary["similar_entities"] = nullptr;
        summary["outliers"] = json::array();
        summary["note"] = "no similarity group";
    }
    run.write_json("similarity.json", summary);
    if (a.eigenvectors) {
        auto out = run.open("eigenvectors.csv");
        write_eigenvectors_csv(spectrum, out);
    }
    if (a.clusters > 0) {
        json clusters = json::array();
        for (const auto& part : cut_clusters(dendro, a.clusters)) {
            json names = json::array();
            for (std::size_t leaf : part) names.push_back(dist.entities()[leaf]);
            clusters.push_back(std::move(names));
        }
        run.write_json("clusters.json", json{{"k", a.clusters}, {"clusters", std::move(clusters)}});
    }
    run.finish();
}

// ---------------------------------------------------------------------------
// centrality
// ---------------------------------------------------------------------------

struct CentralityArgs {
    PanelInput cpi;
    std::string out;
    std::size_t window = kModel1Window;
    int phi_max = kDefaultMaxOffset;
    std::string split;
    std::string linkage = "average";
};

void write_centrality(Run& run, const CentralityReport& report, Linkage linkage, const std::string& suffix) {
    {
        auto out = run.open("offsets" + suffix + ".csv");
        write_distance_csv(report.offsets, out);
    }
    {
        auto out = run.open("offsets_signed" + suffix + ".csv");
        out << "entity";
        for (const auto& e : report.offsets.entities()) out << ',' << csv_field(e);
        out << '\n';
        for (std::size_t i = 0; i < report.offsets.size(); ++i) {
            out << csv_field(report.offsets.entities()[i]);
            for (std::size_t j = 0; j < report.offsets.size(); ++j)
                out << ',' << report.signed_offsets(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            out << '\n';
        }
    }
    run.write_json("centrality" + suffix + ".json", centrality_to_json(report));
    run.write_json("offsets_dendrogram" + suffix + ".json",
                   dendrogram_to_json(hierarchical_cluster(report.offsets, linkage)));
}

void cmd_centrality(const CentralityArgs& a, const Log& log) {
    if (a.window < 3) throw ConfigError("--window: must be at least 3");
    if (a.phi_max < 0) throw ConfigError("--phi-max: must be non-negative");
    const Linkage linkage = parse_enum_option("--linkage", [&] { return parse_linkage(a.linkage); });
    std::optional<Date> split;
    if (!a.split.empty()) split = parse_date_option("--split", a.split);
    json params = a.cpi.parameters();
    params.update(json{{"window", a.window}, {"phi_max", a.phi_max}, {"split", a.split}, {"linkage", a.linkage}});
    const ReturnsPanel returns = a.cpi.load(log);
    if (a.window >= returns.rows())
        throw DataError("--window: window " + std::to_string(a.window) + " is not shorter than the " +
                        std::to_string(returns.rows()) + " available returns");

    Run run(a.out, "centrality", params, {{"cpi", a.cpi.path}});
    const auto slopes = rolling_slopes(returns, a.window);
    {
        auto out = run.open("slopes.csv");
        write_slopes_csv(slopes, returns.frequency(), out);
    }
    const CentralityReport report = centrality_report(slopes, a.phi_max);
    write_centrality(run, report, linkage, "");
    if (split) {
        const auto [before, after] = partitioned_centrality(returns, *split, a.window, a.phi_max);
        write_centrality(run, before, linkage, "_before");
        write_centrality(run, after, linkage, "_after");
    }
    log.info("centrality: " + std::to_string(slopes.size()) + " entities, " +
             std::to_string(slopes.front().values.size()) + " slope values each");
    run.finish();
}

// ---------------------------------------------------------------------------
// robustness
// ---------------------------------------------------------------------------

struct RobustnessArgs {
    PanelInput cpi;
    std::string equity;
    std::string out;
};

/// Log returns of one equity column over its contiguous observed block.
/// Returns nullopt (after a warning) when the column has interior gaps.
std::optional<Series> equity_returns(const RawTable& table, std::size_t col, const Log& log) {
    const std::string& name = table.entities[col];
    std::size_t first = table.dates.size(), last = 0;
    for (std::size_t t = 0; t < table.dates.size(); ++t)
        if (table.cells[t][col]) {
            first = std::min(first, t);
            last = t;
        }
    if (first >= table.dates.size() || last == first) {
        log.warn("equity column '" + name + "' has fewer than 2 observations; skipped");
        return std::nullopt;
    }
    for (std::size_t t = first; t <= last; ++t)
        if (!table.cells[t][col]) {
            log.warn("equity column '" + name + "' has missing values inside its range (first at " +
                     table.dates[t].iso() + "); skipped");
            return std::nullopt;
        }
    Series s;
    s.name = name;
    s.values.resize(static_cast<Eigen::Index>(last - first));
    for (std::size_t t = first + 1; t <= last; ++t) {
        const double prev = *table.cells[t - 1][col];
        const double cur = *table.cells[t][col];
        if (!(prev > 0.0) || !(cur > 0.0))
            throw DomainError("equity column '" + name + "': non-positive level at " +
                              table.dates[cur > 0.0 ? t - 1 : t].iso());
        s.dates.push_back(table.dates[t]);
        s.values(static_cast<Eigen::Index>(t - first - 1)) = std::log(cur / prev);
    }
    return s;
}

/// Restricts both series to their common dates.
std::pair<Series, Series> align(const Series& a, const Series& b) {
    std::vector<std::size_t> ia, ib;
    for (std::size_t i = 0, j = 0; i < a.dates.size() && j < b.dates.size();) {
        if (a.dates[i] < b.dates[j]) {
            ++i;
        } else if (b.dates[j] < a.dates[i]) {
            ++j;
        } else {
            ia.push_back(i++);
            ib.push_back(j++);
        }
    }
    auto take = [](const Series& s, const std::vector<std::size_t>& idx) {
        Series out{s.name, {}, Eigen::VectorXd(static_cast<Eigen::Index>(idx.size()))};
        for (std::size_t k = 0; k < idx.size(); ++k) {
            out.dates.push_back(s.dates[idx[k]]);
            out.values(static_cast<Eigen::Index>(k)) = s.values(static_cast<Eigen::Index>(idx[k]));
        }
        return out;
    };
    return {take(a, ia), take(b, ib)};
}

void cmd_robustness(const RobustnessArgs& a, const Log& log) {
    json params = a.cpi.parameters();
    const ReturnsPanel cpi = a.cpi.load(log);
    RawTable equity;
    {
        std::ifstream in(a.equity, std::ios::binary);
        if (!in) throw IngestError("cannot open '" + a.equity + "'");
        equity = read_table(in, cpi.frequency());
    }

    Run run(a.out, "robustness", params, {{"cpi", a.cpi.path}, {"equity_index", a.equity}});
    std::vector<RobustnessRow> rows;
    for (std::size_t col = 0; col < equity.entities.size(); ++col) {
        const std::string& name = equity.entities[col];
        std::string cpi_name;
        if (cpi.contains(name)) {
            cpi_name = name;
        } else if (cpi.cols() == 1) {
            cpi_name = cpi.entities().front();
        } else {
            throw DataError("equity column '" + name + "' has no CPI column of the same name");
        }
        const auto eq = equity_returns(equity, col, log);
        if (!eq) continue;
        const auto [infl, ret] = align(cpi.series(cpi_name), *eq);
        if (infl.dates.size() < kMinJointObservations)
            throw DataError("equity column '" + name + "' and CPI column '" + cpi_name + "' share only " +
                            std::to_string(infl.dates.size()) + " dates; need at least " +
                            std::to_string(kMinJointObservations));
        const DecileSplit split = split_by_inflation_deciles(infl, ret);
        RobustnessRow row;
        row.score = RobustnessScore{name, wasserstein_1d(split.stable, split.extreme),
                                    split.extreme.samples.size(), split.stable.samples.size()};
        row.mean_discrepancy = mean_return_discrepancy(split, ret);
        rows.push_back(row);
        auto out = run.open("samples/" + file_stem(name) + ".csv");
        write_conditional_samples_csv(split, out);
    }
    if (rows.empty()) throw DataError("no equity column could be scored");
    {
        auto out = run.open("robustness.csv");
        write_robustness_csv(rows, out);
    }
    run.finish();
}

// ---------------------------------------------------------------------------
// sectorcorr
// ---------------------------------------------------------------------------

struct SectorArgs {
    PanelInput returns;
    std::string map;
    std::string out;
    std::size_t window = kDefaultCorrelationWindow;
    std::string avg_from;
    std::string avg_to;
};

void cmd_sectorcorr(const SectorArgs& a, const Log& log) {
    if (a.window < 2) throw ConfigError("--window: must be at least 2");
    std::optional<Date> avg_from, avg_to;
    if (!a.avg_from.empty()) avg_from = parse_date_option("--average-from", a.avg_from);
    if (!a.avg_to.empty()) avg_to = parse_date_option("--average-to", a.avg_to);
    json params = a.returns.parameters();
    params.update(json{{"window", a.window}, {"average_from", a.avg_from}, {"average_to", a.avg_to}});
    const ReturnsPanel returns = a.returns.load(log);
    const SectorMap full = SectorMap::load(a.map);

    // Keep only mapped entities present in the panel.
    std::vector<std::pair<std::string, std::string>> present;
    for (const auto& sector : full.sectors())
        for (const auto& e : full.members(sector)) {
            if (returns.contains(e))
                present.emplace_back(e, sector);
            else
                log.warn("sector map entity '" + e + "' is not in the returns panel; ignored");
        }
    if (present.empty()) throw DataError("no sector-map entity appears in the returns panel");
    const SectorMap map(present);

    Run run(a.out, "sectorcorr", params, {{"sector_returns", a.returns.path}, {"sector_map", a.map}});
    std::vector<SectorAverage> summary;
    for (const auto& sector : map.sectors()) {
        if (map.members(sector).size() < 2) {
            log.warn("sector '" + sector + "' has a single member; skipped");
            continue;
        }
        const RollingCorrelation rc = rolling_correlation(returns, map, sector, a.window);
        for (const auto& w : rc.warnings) log.warn("sector '" + sector + "': " + w);
        {
            auto out = run.open("rolling/" + file_stem(sector) + ".csv");
            write_rolling_correlation_csv(rc, returns.frequency(), out);
        }
        if (rc.dates.empty()) {
            log.warn("sector '" + sector + "' has no valid correlation window; omitted from summary");
            continue;
        }
        const Date from = avg_from.value_or(rc.dates.front());
        const Date to = avg_to.value_or(rc.dates.back());
        summary.push_back(average_sector_correlation(rc, from, to));
    }
    if (summary.empty()) throw DataError("no sector has at least 2 members with valid correlations");
    {
        auto out = run.open("sector_summary.csv");
        write_sector_summary_csv(summary, out);
    }
    run.finish();
}

// ---------------------------------------------------------------------------
// optimize
// ---------------------------------------------------------------------------

struct OptimizeArgs {
    PanelInput returns;
    std::string out;
    std::vector<std::string> assets;
    double core_weight = 0.4;
    double lower = 0.025;
    double upper = 0.3;
    double risk_free = 0.0025;
    std::size_t window = 250;
    std::string objective = "variance";
    bool cold_start = false;
    std::vector<double> sweep;
};

void cmd_optimize(const OptimizeArgs& a, const Log& log) {
    const Objective objective = parse_enum_option("--objective", [&] { return parse_objective(a.objective); });
    if (a.window < 2) throw ConfigError("--window: must be at least 2");
    const ReturnsPanel returns = a.returns.load(log);
    std::vector<std::string> assets = a.assets.empty() ? returns.entities() : a.assets;
    for (const auto& name : assets)
        if (!returns.contains(name)) throw ConfigError("--assets: '" + name + "' is not a column of the returns file");

    PortfolioSpec spec = PortfolioSpec::with_defaults(assets);
    spec.core_weight = a.core_weight;
    spec.lower.assign(spec.free_count(), a.lower);
    spec.upper.assign(spec.free_count(), a.upper);
    spec.risk_free = a.risk_free;
    spec.window = a.window;
    spec.objective = objective;
    spec.validate();
    if (!spec.feasible())
        throw ConfigError("--core-weight: constraints are infeasible (core " + format_number(a.core_weight) +
                          ", bounds [" + format_number(a.lower) + ", " + format_number(a.upper) + "] on " +
                          std::to_string(spec.free_count()) + " assets)");

    json params = a.returns.parameters();
    params.update(json{{"assets", assets},
                       {"core_weight", a.core_weight},
                       {"lower", a.lower},
                       {"upper", a.upper},
                       {"risk_free", a.risk_free},
                       {"window", a.window},
                       {"objective", a.objective},
                       {"cold_start", a.cold_start},
                       {"sweep", a.sweep}});
    Run run(a.out, "optimize", params, {{"asset_returns", a.returns.path}});
    const WeightTrajectory traj = rolling_optimize(returns, spec, a.cold_start);
    log.info("optimize: " + std::to_string(traj.dates.size()) + " windows");
    {
        auto out = run.open("weights.csv");
        write_weights_csv(traj, returns.frequency(), out);
    }
    {
        auto out = run.open("weight_stats.csv");
        write_weight_stats_csv(weight_stats(traj), out);
    }
    if (!a.sweep.empty()) {
        const auto rows = sensitivity_sweep(returns, spec, a.sweep);
        for (const auto& r : rows)
            if (!r.feasible) log.warn("core weight " + format_number(r.core_weight) + ": " + r.message);
        auto out = run.open("sweep.csv");
        write_sweep_csv(rows, out);
    }
    run.finish();
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string out;
    std::uint64_t seed = 20211;
};

void cmd_synth(const SynthArgs& a, const Log& log) {
    Run run(a.out, "synth", json{{"seed", a.seed}}, {});
    const TimeSeriesPanel cpi = synth::cpi_panel(a.seed);
    {
        auto out = run.open("cpi.csv");
        write_csv(cpi, out);
    }
    {
        auto out = run.open("equity.csv");
        synth::write_sparse_csv(synth::equity_panel(a.seed, cpi), out);
    }
    {
        auto out = run.open("rank_perturbation.csv");
        write_csv(synth::rank_perturbation_panel(a.seed), out);
    }
    const synth::SectorFixture sectors = synth::sector_panel(a.seed);
    {
        auto out = run.open("sector_returns.csv");
        write_csv(log_returns(sectors.prices), out);
    }
    {
        auto out = run.open("sector_map.csv");
        out << "entity,sector\n";
        for (const auto& [entity, sector] : sectors.sector_map)
            out << csv_field(entity) << ',' << csv_field(sector) << '\n';
    }
    {
        auto out = run.open("asset_returns.csv");
        write_csv(log_returns(synth::asset_panel(a.seed)), out);
    }
    {
        const std::vector<int> shifts{-24, -7, -1, 0, 1, 5, 12, 24};
        auto out = run.open("shifted_slopes.csv");
        synth::write_shifted_slopes_csv(synth::shifted_slope_series(a.seed, 400, shifts), out);
    }
    {
        json instances = json::array();
        for (std::uint64_t k = 0; k < 50; ++k) {
            const auto inst = synth::portfolio_instance(a.seed + k, 4);
            json cov = json::array();
            for (Eigen::Index i = 0; i < inst.cov.rows(); ++i) {
                json row = json::array();
                for (Eigen::Index j = 0; j < inst.cov.cols(); ++j) row.push_back(inst.cov(i, j));
                cov.push_back(std::move(row));
            }
            instances.push_back(json{{"mean", std::vector<double>(inst.mean.data(), inst.mean.data() + inst.mean.size())},
                                     {"cov", std::move(cov)}});
        }
        run.write_json("portfolio_instances.json",
                       json{{"core_weight", 0.4}, {"lower", 0.025}, {"upper", 0.3}, {"risk_free", 0.0025},
                            {"instances", std::move(instances)}});
    }
    log.info("synth: fixtures written to " + run.dir().string());
    run.finish();
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

struct ReportArgs {
    std::vector<std::string> runs;
    std::string out;
};

std::vector<std::vector<std::string>> read_csv_rows(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> fields;
        std::string field;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else if (c == '"') {
                    quoted = false;
                } else {
                    field += c;
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
            } else {
                field += c;
            }
        }
        fields.push_back(std::move(field));
        rows.push_back(std::move(fields));
    }
    return rows;
}

void markdown_table(std::ostream& md, const fs::path& csv, std::size_t max_rows = 50) {
    const auto rows = read_csv_rows(csv);
    if (rows.empty()) return;
    auto line = [&](const std::vector<std::string>& r) {
        md << '|';
        for (const auto& f : r) md << ' ' << f << " |";
        md << '\n';
    };
    line(rows[0]);
    md << '|';
    for (std::size_t i = 0; i < rows[0].size(); ++i) md << " --- |";
    md << '\n';
    for (std::size_t r = 1; r < rows.size() && r <= max_rows; ++r) line(rows[r]);
    if (rows.size() > max_rows + 1) md << "\n(" << rows.size() - 1 - max_rows << " more rows)\n";
    md << '\n';
}

json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IngestError("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IngestError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void summarise_run(std::ostream& md, const fs::path& dir, const json& manifest) {
    const std::string command = manifest.value("command", "");
    md << "## " << dir.filename().string() << " (" << command << ")\n\n";
    if (manifest.contains("inputs"))
        for (const auto& [role, info] : manifest["inputs"].items())
            md << "- input `" << role << "` sha256 `" << info.value("sha256", "") << "`\n";
    if (manifest.contains("parameters"))
        for (const auto& [key, value] : manifest["parameters"].items())
            md << "- " << key << ": `" << value.dump() << "`\n";
    md << '\n';

    if (command == "trajectory") {
        const json s = read_json(dir / "similarity.json");
        md << "Eigenvalues below " << s["threshold"].dump() << ": " << s["k"].dump() << ". ";
        if (s["similar_entities"].is_null()) {
            md << "No similarity group.\n\n";
        } else {
            md << "Similar entities: " << s["similar_entities"].dump() << ". Outliers: ";
            std::string names;
            for (const auto& o : s["outliers"]) names += (names.empty() ? "" : ", ") + o.get<std::string>();
            md << (names.empty() ? "none" : names) << ".\n\n";
        }
        md << "Operator norm: " << s["operator_norm"].dump() << "\n\n";
        markdown_table(md, dir / "spectrum.csv");
    } else if (command == "centrality") {
        const json c = read_json(dir / "centrality.json");
        md << "Model " << c["model"].get<std::string>() << ", phi_max " << c["phi_max"].dump() << ".\n\n";
        md << "| rank | entity | score |\n| --- | --- | --- |\n";
        std::map<std::string, json> score;
        for (const auto& s : c["scores"]) score[s["entity"].get<std::string>()] = s["score"];
        std::size_t rank = 1;
        for (const auto& e : c["ranking"])
            md << "| " << rank++ << " | " << e.get<std::string>() << " | " << score[e.get<std::string>()].dump()
               << " |\n";
        md << '\n';
    } else if (command == "robustness") {
        markdown_table(md, dir / "robustness.csv");
    } else if (command == "sectorcorr") {
        markdown_table(md, dir / "sector_summary.csv");
    } else if (command == "optimize") {
        markdown_table(md, dir / "weight_stats.csv");
        if (fs::exists(dir / "sweep.csv")) markdown_table(md, dir / "sweep.csv", 200);
    } else if (manifest.contains("outputs")) {
        for (const auto& o : manifest["outputs"]) md << "- " << o.get<std::string>() << '\n';
        md << '\n';
    }
}

void cmd_report(const ReportArgs& a, const Log& log) {
    std::vector<fs::path> dirs;
    std::vector<std::pair<std::string, fs::path>> inputs;
    for (const auto& r : a.runs) {
        const fs::path dir(r);
        const fs::path manifest = dir / kManifest;
        if (!fs::is_regular_file(manifest)) throw ConfigError("--run: no manifest in '" + r + "'");
        dirs.push_back(dir);
        inputs.emplace_back("run:" + dir.filename().string(), manifest);
    }
    json params{{"runs", json::array()}};
    for (const auto& d : dirs) params["runs"].push_back(d.filename().string());
    Run run(a.out, "report", params, {});

    auto md = run.open("report.md");
    md << "# inflscope report\n\n";
    for (const auto& dir : dirs) {
        const json manifest = read_json(dir / kManifest);
        if (manifest.value("status", "") != "complete") {
            log.warn("run '" + dir.string() + "' did not complete; summarised from its manifest only");
            md << "## " << dir.filename().string() << " (incomplete)\n\n";
            continue;
        }
        summarise_run(md, dir, manifest);
    }
    md.close();
    run.finish();
}

/// Reads a plain key=value file and scopes every key to one subcommand.
class SubcommandConfig : public CLI::ConfigBase {
public:
    explicit SubcommandConfig(std::string subcommand) : subcommand_(std::move(subcommand)) {}

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        auto items = CLI::ConfigBase::from_config(input);
        for (auto& item : items)
            if (item.parents.empty() || item.parents.front() != subcommand_)
                item.parents.insert(item.parents.begin(), subcommand_);
        return items;
    }

private:
    std::string subcommand_;
};

int run_impl(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    const Log log(err, verbose_from_env());
    CLI::App app{"Inflation co-movement, centrality, robustness, sector correlation and portfolio analytics",
                 kToolName};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    app.fallthrough();
    app.set_config("--config", "", "key=value file of option defaults for the subcommand; command-line values win");
    app.allow_config_extras(CLI::config_extras_mode::error);

    auto add_common = [](CLI::App* cmd, std::string& out_dir) {
        cmd->add_option("--out", out_dir, "output directory")->required();
    };

    TrajectoryArgs ta;
    auto* traj = app.add_subcommand("trajectory", "distance matrix, dendrogram and eigenspectrum of CPI trajectories");
    ta.cpi.add(traj, "--cpi", "CPI", "monthly", "levels");
    add_common(traj, ta.out);
    traj->add_option("--linkage", ta.linkage, "average|single|complete")->capture_default_str();
    traj->add_option("--delta", ta.delta, "eigenvalue threshold for the similarity count")->capture_default_str();
    traj->add_option("--clusters", ta.clusters, "also write the partition into this many clusters");
    traj->add_flag("--eigenvectors", ta.eigenvectors, "also write the eigenvector matrix");

    CentralityArgs ca;
    auto* cent = app.add_subcommand("centrality", "rolling trend slopes, optimal offsets and centrality scores");
    ca.cpi.add(cent, "--cpi", "CPI", "monthly", "levels");
    add_common(cent, ca.out);
    cent->add_option("--window", ca.window, "rolling regression window")->capture_default_str();
    cent->add_option("--phi-max", ca.phi_max, "largest offset searched")->capture_default_str();
    cent->add_option("--split", ca.split, "also report the periods before and from this date");
    cent->add_option("--linkage", ca.linkage, "linkage for the offset dendrogram")->capture_default_str();

    RobustnessArgs ra;
    auto* rob = app.add_subcommand("robustness", "equity robustness under inflation extremes");
    ra.cpi.add(rob, "--cpi", "CPI", "monthly", "levels");
    add_common(rob, ra.out);
    rob->add_option("--equity-index", ra.equity, "equity index levels CSV")->required()->check(CLI::ExistingFile);

    SectorArgs sa;
    auto* sec = app.add_subcommand("sectorcorr", "rolling mean correlation within sectors");
    sa.returns.add(sec, "--sector-returns", "sector equity", "daily", "returns");
    add_common(sec, sa.out);
    sec->add_option("--sector-map", sa.map, "entity,sector CSV")->required()->check(CLI::ExistingFile);
    sec->add_option("--window", sa.window, "correlation window")->capture_default_str();
    sec->add_option("--average-from", sa.avg_from, "first window end included in the summary average");
    sec->add_option("--average-to", sa.avg_to, "last window end included in the summary average");

    OptimizeArgs oa;
    auto* opt = app.add_subcommand("optimize", "rolling constrained risk-adjusted portfolio weights");
    oa.returns.add(opt, "--asset-returns", "asset", "daily", "returns");
    add_common(opt, oa.out);
    opt->add_option("--assets", oa.assets, "assets to use, core holding first (default: all columns)")
        ->delimiter(',');
    opt->add_option("--core-weight", oa.core_weight, "fixed weight of the core holding")->capture_default_str();
    opt->add_option("--lower", oa.lower, "lower bound for every other asset")->capture_default_str();
    opt->add_option("--upper", oa.upper, "upper bound for every other asset")->capture_default_str();
    opt->add_option("--risk-free", oa.risk_free, "risk-free return per period")->capture_default_str();
    opt->add_option("--window", oa.window, "estimation window")->capture_default_str();
    opt->add_option("--objective", oa.objective, "variance|stdev")->capture_default_str();
    opt->add_flag("--cold-start", oa.cold_start, "solve every window independently");
    opt->add_option("--sweep", oa.sweep, "core weights for a sensitivity sweep")->delimiter(',');

    SynthArgs ya;
    auto* syn = app.add_subcommand("synth", "write the synthetic fixtures");
    syn->add_option("--out", ya.out, "output directory")->required();
    syn->add_option("--seed", ya.seed, "random seed")->capture_default_str();

    ReportArgs pa;
    auto* rep = app.add_subcommand("report", "summarise completed runs into report.md");
    rep->add_option("--run", pa.runs, "run output directory (repeatable)")->required()->check(CLI::ExistingDirectory);
    rep->add_option("--out", pa.out, "output directory")->required();

    const auto subcommands = app.get_subcommands({});
    for (const auto& a : args)
        if (std::any_of(subcommands.begin(), subcommands.end(),
                        [&](const CLI::App* sub) { return sub->get_name() == a; })) {
            app.config_formatter(std::make_shared<SubcommandConfig>(a));
            break;
        }

    std::vector<std::string> argv_store{kToolName};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& s : argv_store) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    if (traj->parsed()) cmd_trajectory(ta, log);
    else if (cent->parsed()) cmd_centrality(ca, log);
    else if (rob->parsed()) cmd_robustness(ra, log);
    else if (sec->parsed()) cmd_sectorcorr(sa, log);
    else if (opt->parsed()) cmd_optimize(oa, log);
    else if (syn->parsed()) cmd_synth(ya, log);
    else if (rep->parsed()) cmd_report(pa, log);
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return run_impl(args, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const fs::filesystem_error& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUnexpected;
    }
}

}  // namespace inflscope::cli
