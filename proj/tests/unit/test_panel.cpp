#include <cmath>
#include <numbers>
#include <sstream>

#include <doctest.h>

#include "inflscope/error.hpp"
#include "inflscope/panel.hpp"
#include "support.hpp"

using namespace inflscope;
using namespace testing;

namespace {

LoadResult parse(const std::string& text, Frequency f = Frequency::monthly,
                 MissingPolicy p = MissingPolicy::reject) {
    std::istringstream in(text);
    return read_csv(in, f, p);
}

std::string error_of(const std::string& text, MissingPolicy p = MissingPolicy::reject) {
    try {
        parse(text, Frequency::monthly, p);
    } catch (const IngestError& e) {
        return e.what();
    }
    return "";
}

TimeSeriesPanel column_panel(const std::vector<double>& v) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(v.size()), 1);
    for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i), 0) = v[i];
    return TimeSeriesPanel(months(v.size()), {"A"}, x, Frequency::monthly);
}

}  // namespace

TEST_SUITE("panel") {

TEST_CASE("well-formed 3x2 csv") {
    const auto r = parse("date,A,B\n2000-01,1,2\n2000-02,3,4\n2000-03,5,6\n");
    CHECK(r.panel.rows() == 3);
    CHECK(r.panel.cols() == 2);
    CHECK(r.dropped_rows == 0);
    CHECK(r.panel.entities() == std::vector<std::string>{"A", "B"});
    CHECK(r.panel.values()(2, 1) == 6.0);
    CHECK(r.panel.dates()[1] == Date{2000, 2, 1});
}

TEST_CASE("blank cell with drop_row drops one row") {
    const auto r = parse("date,A,B\n2000-01,1,2\n2000-02,,4\n2000-03,5,6\n", Frequency::monthly,
                         MissingPolicy::drop_row);
    CHECK(r.panel.rows() == 2);
    CHECK(r.dropped_rows == 1);
    CHECK(r.panel.dates()[1] == Date{2000, 3, 1});
}

TEST_CASE("blank cell with reject names row and column") {
    const std::string msg = error_of("date,A,B\n2000-01,1,2\n2000-02,,4\n2000-03,5,6\n");
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("column 'A'") != std::string::npos);
}

TEST_CASE("missing tokens") {
    for (const char* token : {"NA", "N/A", "NaN", "null", "nan", "inf"}) {
        const auto r = parse(std::string("date,A\n2000-01,1\n2000-02,") + token + "\n2000-03,2\n",
                             Frequency::monthly, MissingPolicy::drop_row);
        CHECK(r.dropped_rows == 1);
    }
}

TEST_CASE("out-of-order and duplicate dates") {
    CHECK(error_of("date,A\n2000-02,1\n2000-01,2\n").find("dates not strictly increasing") !=
          std::string::npos);
    CHECK(error_of("date,A\n2000-01,1\n2000-01,2\n").find("duplicate date") != std::string::npos);
}

TEST_CASE("unparseable cells name row and column") {
    const std::string num = error_of("date,A,B\n2000-01,1,2\n2000-02,3,x4\n");
    CHECK(num.find("line 3, column 'B'") != std::string::npos);
    const std::string date = error_of("date,A\n2000-13,1\n2000-02,2\n");
    CHECK(date.find("line 2, column 'date'") != std::string::npos);
    CHECK(error_of("date,A\n2000-01,1,2\n").find("expected 2 fields") != std::string::npos);
}

TEST_CASE("date forms, BOM, CRLF and quoting") {
    const auto r = parse("\xEF\xBB\xBF" "date,\"Hong Kong, SAR\",B\r\n2000-01-15,1,2\r\n2000-02-01,3,4\r\n");
    CHECK(r.panel.entities()[0] == "Hong Kong, SAR");
    CHECK(r.panel.dates()[0] == Date{2000, 1, 1});  // monthly normalises the day
    const auto d = parse("date,A\n2020-01-02,1\n2020-01-03,2\n", Frequency::daily);
    CHECK(d.panel.dates()[1] == Date{2020, 1, 3});
}

TEST_CASE("panel invariants") {
    CHECK_THROWS_AS(TimeSeriesPanel(months(1), {"A"}, Eigen::MatrixXd::Ones(1, 1), Frequency::monthly),
                    DataError);
    CHECK_THROWS_AS(TimeSeriesPanel(months(2), {"A", "A"}, Eigen::MatrixXd::Ones(2, 2), Frequency::monthly),
                    DataError);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(2, 1);
    bad(1, 0) = std::nan("");
    CHECK_THROWS_AS(TimeSeriesPanel(months(2), {"A"}, bad, Frequency::monthly), DataError);
}

TEST_CASE("log returns of constant and exponential columns") {
    const auto c = log_returns(column_panel({7.0, 7.0, 7.0}));
    CHECK(c.rows() == 2);
    CHECK(c.values()(0, 0) == 0.0);
    CHECK(c.values()(1, 0) == 0.0);
    const double e = std::numbers::e;
    const auto x = log_returns(column_panel({1.0, e, e * e}));
    CHECK(x.values()(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(x.values()(1, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(x.dates().front() == Date{2000, 2, 1});
}

TEST_CASE("log returns match an extended-precision oracle") {
    Rng rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> v(10);
        for (auto& x : v) x = uniform(rng, 0.01, 1000.0);
        const auto r = log_returns(column_panel(v));
        for (std::size_t t = 0; t + 1 < v.size(); ++t) {
            const long double oracle =
                std::log(static_cast<long double>(v[t + 1])) - std::log(static_cast<long double>(v[t]));
            CHECK(std::abs(static_cast<long double>(r.values()(static_cast<Eigen::Index>(t), 0)) - oracle) <
                  1e-14L * std::max(1.0L, std::abs(oracle)));
        }
    }
}

TEST_CASE("non-positive level names entity and date") {
    Eigen::MatrixXd x(3, 2);
    x << 1, 1, 2, 0, 3, 1;
    const TimeSeriesPanel p(months(3), {"A", "B"}, x, Frequency::monthly);
    try {
        log_returns(p);
        FAIL("expected DomainError");
    } catch (const DomainError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("'B'") != std::string::npos);
        CHECK(msg.find("2000-02-01") != std::string::npos);
    }
}

TEST_CASE("l1 normalisation examples") {
    Eigen::VectorXd v(3);
    v << 1, -1, 2;
    const auto t = l1_normalize("A", v);
    CHECK(t.values(0) == 0.25);
    CHECK(t.values(1) == -0.25);
    CHECK(t.values(2) == 0.5);
    try {
        l1_normalize("Z", Eigen::VectorXd::Zero(3));
        FAIL("expected DataError");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("degenerate trajectory") != std::string::npos);
    }
}

TEST_CASE("l1 normalisation is a positive rescaling with unit norm") {
    Rng rng(12);
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::VectorXd v = random_vector(rng, static_cast<Eigen::Index>(uniform_int(rng, 1, 40)));
        const auto t = l1_normalize("A", v);
        double norm = 0.0;
        for (Eigen::Index i = 0; i < t.values.size(); ++i) norm += std::abs(t.values(i));
        CHECK(std::abs(norm - 1.0) < 1e-12);
        // Same direction: the ratio is a single positive constant.
        const double scale = v(0) / t.values(0);
        CHECK(scale > 0.0);
        for (Eigen::Index i = 0; i < v.size(); ++i) CHECK(std::abs(v(i) - scale * t.values(i)) < 1e-12 * scale);
        // Idempotent.
        const auto again = l1_normalize("A", t.values);
        CHECK((again.values - t.values).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("cumulative log returns reconstruct relative levels") {
    Rng rng(13);
    for (int rep = 0; rep < 50; ++rep) {
        const auto rows = static_cast<Eigen::Index>(uniform_int(rng, 2, 120));
        const auto cols = static_cast<Eigen::Index>(uniform_int(rng, 1, 6));
        const Eigen::MatrixXd x = random_levels(rng, rows, cols);
        const TimeSeriesPanel p(months(static_cast<std::size_t>(rows)), names(static_cast<std::size_t>(cols)), x,
                                Frequency::monthly);
        const auto r = log_returns(p);
        CHECK(r.rows() == p.rows() - 1);
        for (Eigen::Index j = 0; j < cols; ++j) {
            double cum = 0.0;
            for (Eigen::Index t = 1; t < rows; ++t) {
                cum += r.values()(t - 1, j);
                CHECK(std::abs(std::exp(cum) - x(t, j) / x(0, j)) < 1e-10 * std::max(1.0, x(t, j) / x(0, j)));
            }
        }
    }
}

TEST_CASE("load, write, load round-trips exactly") {
    Rng rng(14);
    TempDir dir;
    for (int rep = 0; rep < 30; ++rep) {
        const bool daily = rep % 2 == 1;
        const auto rows = uniform_int(rng, 2, 60);
        const auto cols = uniform_int(rng, 1, 5);
        Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (Eigen::Index t = 0; t < x.rows(); ++t)
            for (Eigen::Index j = 0; j < x.cols(); ++j) x(t, j) = normal(rng, std::pow(10.0, uniform(rng, -8, 8)));
        const Frequency f = daily ? Frequency::daily : Frequency::monthly;
        const TimeSeriesPanel p(daily ? days(rows) : months(rows), names(cols), x, f);
        const std::string path = dir.file("p" + std::to_string(rep) + ".csv");
        write_csv(p, path);
        const auto once = load_csv(path, f);
        write_csv(once.panel, path);
        const auto twice = load_csv(path, f);
        CHECK(once.panel == p);
        CHECK(twice.panel == p);
    }
}

TEST_CASE("returns csv, slicing and selection") {
    TempDir dir;
    const auto path = dir.write("r.csv", "date,A,B\n2000-01,0.1,-0.2\n2000-02,0.3,0.4\n2000-03,0.5,0.6\n");
    const ReturnsPanel r = load_returns_csv(path, Frequency::monthly);
    CHECK(r.rows() == 3);
    const auto s = r.slice(Date{2000, 2, 1}, Date{2000, 3, 1});
    CHECK(s.rows() == 2);
    CHECK(s.values()(0, 0) == 0.3);
    const std::vector<std::string> pick{"B"};
    const auto b = r.select(pick);
    CHECK(b.cols() == 1);
    CHECK(b.values()(2, 0) == 0.6);
    CHECK(r.rows_range(1, 2).values()(0, 1) == 0.4);
    CHECK_THROWS_AS(r.index_of("C"), DataError);
    CHECK(r.lower_bound(Date{2000, 1, 15}) == 1);
}

TEST_CASE("option parsing") {
    CHECK(parse_frequency("daily") == Frequency::daily);
    CHECK(parse_missing_policy("drop_row") == MissingPolicy::drop_row);
    CHECK_THROWS_AS(parse_frequency("weekly"), ConfigError);
    CHECK_THROWS_AS(parse_missing_policy("zero_fill"), ConfigError);
}

}
