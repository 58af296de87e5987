#pragma once

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "inflscope/date.hpp"
#include "inflscope/panel.hpp"

namespace testing {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double normal(Rng& rng, double sd = 1.0) { return std::normal_distribution<double>(0.0, sd)(rng); }

inline std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline Eigen::VectorXd random_vector(Rng& rng, Eigen::Index n, double sd = 1.0) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng, sd);
    return v;
}

inline Eigen::MatrixXd random_symmetric(Rng& rng, Eigen::Index n, double scale = 1.0) {
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j <= i; ++j) a(i, j) = a(j, i) = uniform(rng, -scale, scale);
    return a;
}

/// Symmetric matrix with zero diagonal and positive off-diagonal entries.
inline Eigen::MatrixXd random_dissimilarity(Rng& rng, Eigen::Index n) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = uniform(rng, 0.1, 10.0);
    return d;
}

inline std::vector<std::string> names(std::size_t n, const std::string& prefix = "E") {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

inline std::vector<inflscope::Date> months(std::size_t n, inflscope::Date first = {2000, 1, 1}) {
    std::vector<inflscope::Date> out;
    for (std::size_t k = 0; k < n; ++k) out.push_back(first.add_months(static_cast<int>(k)));
    return out;
}

inline std::vector<inflscope::Date> days(std::size_t n, inflscope::Date first = {2020, 1, 1}) {
    std::vector<inflscope::Date> out;
    const long d0 = first.days_since_epoch();
    for (std::size_t k = 0; k < n; ++k) out.push_back(inflscope::Date::from_days_since_epoch(d0 + static_cast<long>(k)));
    return out;
}

inline inflscope::ReturnsPanel returns_panel(const Eigen::MatrixXd& r,
                                             inflscope::Frequency f = inflscope::Frequency::monthly) {
    const auto rows = static_cast<std::size_t>(r.rows());
    return inflscope::ReturnsPanel(f == inflscope::Frequency::monthly ? months(rows) : days(rows),
                                   names(static_cast<std::size_t>(r.cols())), r, f);
}

inline Eigen::MatrixXd random_levels(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd x(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        x(0, j) = uniform(rng, 50.0, 150.0);
        for (Eigen::Index t = 1; t < rows; ++t) x(t, j) = x(t - 1, j) * std::exp(normal(rng, 0.02));
    }
    return x;
}

/// Fresh directory under the system temp path, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("inflscope-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }
    std::string write(const std::string& name, const std::string& text) const {
        std::ofstream(path_ / name, std::ios::binary) << text;
        return file(name);
    }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace testing
